"""Command line entry point.

Subcommands: generate (write environment data + manifest), run (one config
x replications -> runs.csv + series.csv), sweep (Cartesian grid + pareto.csv),
report (render pareto.svg and curves.svg from the CSVs).

Exit codes: 0 success, 1 configuration error, 2 runtime/protocol error.
"""

from __future__ import annotations

import argparse
import sys

from .config import RunConfig, apply_env_overrides, expand_sweep, parse_config_file
from .errors import ConfigError


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # argparse exits with 2 by default; bad flags are configuration errors.
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="influencebandit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True, help="flat key=value config file")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override run.base_seed")
        p.add_argument("--parallel", type=int, default=1, help="worker processes")
        p.add_argument("--svg", action="store_true", help="also render figures")
        p.add_argument("--loglog", action="store_true", help="log-log axes in figures")

    common(sub.add_parser("generate", help="write environment data and manifest"))
    common(sub.add_parser("run", help="run one config with replications"))
    common(sub.add_parser("sweep", help="run the sweep grid from the config"))
    common(sub.add_parser("report", help="render figures from CSV output"), needs_config=False)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "report":
            from .report import render_report

            for path in render_report(args.out, loglog=args.loglog):
                print(path)
            return 0

        mapping = apply_env_overrides(parse_config_file(args.config))
        if args.seed is not None:
            mapping["run.base_seed"] = str(args.seed)

        from . import runner

        if args.command == "generate":
            rc = RunConfig.from_mapping(mapping)
            runner.generate_environment_files(rc, args.out)
            print(args.out)
            return 0

        if args.command == "run":
            configs = [RunConfig.from_mapping(mapping)]
            pareto = False
        else:  # sweep
            configs = [RunConfig.from_mapping(cell) for cell in expand_sweep(mapping)]
            pareto = True
        grouped = runner.run_many(configs, parallel=args.parallel)
        runner.write_outputs(args.out, configs, grouped, pareto=pareto)
        if args.svg:
            from .report import render_report

            render_report(args.out, loglog=args.loglog)
        print(args.out)
        return 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - surface runtime errors as exit 2
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
