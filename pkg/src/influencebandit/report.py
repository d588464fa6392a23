"""Render sweep results to SVG figures next to the CSV output.

curves.svg: mean cumulative regret and estimation error trajectories per
config. pareto.svg: final (regret, error) scatter with the non-dominated
configs joined. Both are self-contained 800x600 canvases.
"""

from __future__ import annotations

import csv
import os
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .errors import ConfigError, DataError
from .runner import RUNS_HEADER, SERIES_HEADER

FIGSIZE = (800 / 72, 600 / 72)   # svg canvas reads 800x600
DPI = 100


def _read_csv(path: str, expected_header: list[str]) -> list[dict]:
    if not os.path.exists(path):
        raise ConfigError(f"input file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != expected_header:
            raise DataError(f"{path}: unexpected schema {header}; expected {expected_header}")
        return [dict(zip(header, row)) for row in reader]


def _config_label(row: dict) -> str:
    parts = [row["policy"]]
    if row.get("beta"):
        parts.append(f"b={float(row['beta']):g}")
    if row.get("C_or_objective"):
        co = row["C_or_objective"]
        parts.append(f"C={float(co):g}" if co.replace(".", "", 1).replace("-", "", 1).isdigit() else f"O={co}")
    parts.append(f"k={row['k']}")
    return " ".join(parts)


def _save(fig, path: str) -> None:
    fig.savefig(path, format="svg", dpi=DPI, metadata={"Date": None})
    plt.close(fig)


def render_curves(runs_path: str, series_path: str, out_path: str, loglog: bool = False) -> str:
    runs = _read_csv(runs_path, RUNS_HEADER)
    series = _read_csv(series_path, SERIES_HEADER)
    labels = {}
    for row in runs:
        labels.setdefault(row["config_hash"], _config_label(row))

    regret_acc: dict[str, dict[int, list[float]]] = defaultdict(lambda: defaultdict(list))
    rmse_acc: dict[str, dict[int, list[float]]] = defaultdict(lambda: defaultdict(list))
    for row in series:
        h, t = row["config_hash"], int(row["t"])
        regret_acc[h][t].append(float(row["cum_regret"]))
        if row["rmse"]:
            rmse_acc[h][t].append(float(row["rmse"]))

    fig, (ax_reg, ax_err) = plt.subplots(2, 1, figsize=FIGSIZE, sharex=True)
    for h in sorted(regret_acc):
        ts = sorted(regret_acc[h])
        mean_reg = [sum(regret_acc[h][t]) / len(regret_acc[h][t]) for t in ts]
        ax_reg.plot(ts, mean_reg, label=labels.get(h, h), linewidth=1.2)
        if rmse_acc[h]:
            rs = sorted(rmse_acc[h])
            mean_rmse = [sum(rmse_acc[h][t]) / len(rmse_acc[h][t]) for t in rs]
            ax_err.plot(rs, mean_rmse, linewidth=1.2)
    ax_reg.set_ylabel("cumulative regret")
    ax_err.set_ylabel("holdout RMSE")
    ax_err.set_xlabel("round")
    if loglog:
        for ax in (ax_reg, ax_err):
            ax.set_xscale("log")
            ax.set_yscale("log")
    ax_reg.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    _save(fig, out_path)
    return out_path


def _pareto_rows_from_runs(runs_path: str) -> list[dict]:
    """Aggregate runs.csv into pareto-style rows when no pareto.csv exists."""
    from .metrics import pareto_summary

    runs = _read_csv(runs_path, RUNS_HEADER)
    triples = []
    for row in runs:
        label = {key: row[key] for key in ("config_hash", "policy", "beta", "C_or_objective", "k", "T")}
        triples.append((label, float(row["final_regret"]), float(row["final_rmse"] or "nan")))
    rows = []
    for agg in pareto_summary(triples, key_fields=("config_hash",)):
        rows.append({
            **agg.config,
            "mean_regret": repr(agg.mean_regret),
            "std_regret": repr(agg.std_regret),
            "mean_rmse": repr(agg.mean_rmse),
            "std_rmse": repr(agg.std_rmse),
            "replications": str(agg.replications),
            "dominated": str(int(agg.dominated)),
        })
    return rows


def render_pareto(pareto_path: str, out_path: str, loglog: bool = False, runs_path: str | None = None) -> str:
    from .runner import PARETO_HEADER

    if os.path.exists(pareto_path):
        rows = _read_csv(pareto_path, PARETO_HEADER)
    elif runs_path is not None:
        rows = _pareto_rows_from_runs(runs_path)
    else:
        raise ConfigError(f"input file not found: {pareto_path}")
    if not rows:
        raise DataError(f"{pareto_path}: no rows")
    fig, ax = plt.subplots(figsize=FIGSIZE)
    front = [r for r in rows if r["dominated"] == "0"]
    dominated = [r for r in rows if r["dominated"] != "0"]
    if dominated:
        ax.errorbar(
            [float(r["mean_regret"]) for r in dominated],
            [float(r["mean_rmse"]) for r in dominated],
            xerr=[float(r["std_regret"]) for r in dominated],
            yerr=[float(r["std_rmse"]) for r in dominated],
            fmt="o", color="0.6", capsize=2, label="dominated",
        )
    front.sort(key=lambda r: float(r["mean_regret"]))
    ax.errorbar(
        [float(r["mean_regret"]) for r in front],
        [float(r["mean_rmse"]) for r in front],
        xerr=[float(r["std_regret"]) for r in front],
        yerr=[float(r["std_rmse"]) for r in front],
        fmt="o-", color="C3", capsize=2, label="non-dominated",
    )
    for r in rows:
        ax.annotate(
            _config_label(r), (float(r["mean_regret"]), float(r["mean_rmse"])),
            fontsize=6, textcoords="offset points", xytext=(3, 3),
        )
    if loglog:
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.set_xlabel("final cumulative regret")
    ax.set_ylabel("final holdout RMSE")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, out_path)
    return out_path


def render_report(out_dir: str, loglog: bool = False) -> list[str]:
    """Read runs/series/pareto CSVs in out_dir and write the figures there."""
    produced = []
    runs_path = os.path.join(out_dir, "runs.csv")
    series_path = os.path.join(out_dir, "series.csv")
    produced.append(render_curves(runs_path, series_path, os.path.join(out_dir, "curves.svg"), loglog))
    pareto_path = os.path.join(out_dir, "pareto.csv")
    produced.append(render_pareto(pareto_path, os.path.join(out_dir, "pareto.svg"), loglog, runs_path=runs_path))
    return produced
