"""Flat key=value run configuration with dotted sections.

Sections: env.* (environment construction), policy.* (strategy and its
hyperparameters), run.* (horizon, batch size, replications, seed), sweep.*
(comma-separated grids). Environment variables prefixed IB_ override file
keys, e.g. IB_RUN_T=500 overrides run.T.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field

from .errors import ConfigError

ENV_PREFIX = "IB_"

DEFAULTS = {
    "env.kind": "barabasi_albert",
    "env.n": "500",
    "env.param": "10",
    "env.d_node": "8",
    "env.structural": "true",
    "env.ground_truth": "linear",
    "env.tau": "4.0",
    "env.holdout": "500",
    "env.pool_mode": "network",
    "env.pool_size": "500",
    "env.edge_list": "",
    "env.node_features": "",
    "policy.name": "influence_cb",
    "policy.beta": "0.25",
    "policy.C": "",
    "policy.objective": "",
    "policy.alpha": "2.0",
    "policy.lr": "0.1",
    "policy.sigma": "1.0",
    "policy.lambda": "1.0",
    "policy.c_min": "1.0",
    "policy.c_max": "9.0",
    "policy.gamma": "1.0",
    "policy.warmup": "10",
    "policy.epsilon": "1e-8",
    "run.T": "2000",
    "run.k": "5",
    "run.replications": "10",
    "run.base_seed": "1",
}

POLICY_NAMES = (
    "influence_cb",
    "lin_ucb",
    "lin_ts",
    "sgd_explore",
    "sgd_exploit",
    "random",
    "similarity",
    "ridge_linkpred",
    "uniform",
)


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def parse_config_file(path: str) -> dict[str, str]:
    try:
        with open(path) as fh:
            return parse_config_text(fh.read(), source=path)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")


def apply_env_overrides(cfg: dict[str, str], environ=None) -> dict[str, str]:
    environ = os.environ if environ is None else environ
    out = dict(cfg)
    known = set(DEFAULTS) | set(cfg)
    by_env_name = {k.upper().replace(".", "_"): k for k in known}
    for name, value in environ.items():
        if not name.startswith(ENV_PREFIX):
            continue
        tail = name[len(ENV_PREFIX):]
        if tail in by_env_name:
            out[by_env_name[tail]] = value
    return out


def _get(cfg: dict[str, str], key: str) -> str:
    return cfg.get(key, DEFAULTS.get(key, ""))


def _as_int(cfg, key):
    raw = _get(cfg, key)
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}")


def _as_float(cfg, key):
    raw = _get(cfg, key)
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}")


def _as_bool(cfg, key):
    raw = _get(cfg, key).lower()
    if raw in ("true", "1", "yes"):
        return True
    if raw in ("false", "0", "no"):
        return False
    raise ConfigError(f"{key}: expected true/false, got {raw!r}")


@dataclass
class RunConfig:
    """Validated settings for one (environment, policy, horizon) cell."""

    env_kind: str
    env_n: int
    env_param: float
    d_node: int
    structural: bool
    ground_truth: str
    tau: float
    holdout: int
    pool_mode: str
    pool_size: int
    edge_list: str
    node_features: str

    policy_name: str
    beta: float
    C: float | None
    objective: str | None
    alpha: float
    lr: float
    sigma: float
    lam: float
    adaptive: dict = field(default_factory=dict)

    T: int = 2000
    k: int = 5
    replications: int = 10
    base_seed: int = 1

    @classmethod
    def from_mapping(cls, cfg: dict[str, str]) -> "RunConfig":
        kind = _get(cfg, "env.kind")
        if kind not in ("barabasi_albert", "erdos_renyi", "external"):
            raise ConfigError(f"env.kind: unknown generator {kind!r}")
        ground_truth = _get(cfg, "env.ground_truth")
        if ground_truth not in ("linear", "mlp"):
            raise ConfigError(f"env.ground_truth: must be linear or mlp, got {ground_truth!r}")
        pool_mode = _get(cfg, "env.pool_mode")
        if pool_mode not in ("network", "neighbor", "fixed"):
            raise ConfigError(f"env.pool_mode: must be network, neighbor or fixed, got {pool_mode!r}")

        policy_name = _get(cfg, "policy.name")
        if policy_name not in POLICY_NAMES:
            raise ConfigError(f"policy.name: unknown policy {policy_name!r}")
        beta = _as_float(cfg, "policy.beta")
        if not 0.0 <= beta <= 1.0:
            raise ConfigError(f"policy.beta: must be in [0, 1], got {beta}")

        c_raw = _get(cfg, "policy.C")
        obj_raw = _get(cfg, "policy.objective")
        C = float(c_raw) if c_raw else None
        objective = obj_raw if obj_raw else None
        if policy_name == "influence_cb":
            if (C is None) == (objective is None):
                raise ConfigError("policy.C / policy.objective: set exactly one for influence_cb")
            if C is not None and C <= 0:
                raise ConfigError(f"policy.C: must be > 0, got {C}")
            if objective is not None and objective not in ("regret", "rmse"):
                raise ConfigError(f"policy.objective: must be regret or rmse, got {objective!r}")

        T = _as_int(cfg, "run.T")
        k = _as_int(cfg, "run.k")
        replications = _as_int(cfg, "run.replications")
        if T < 0:
            raise ConfigError(f"run.T: must be >= 0, got {T}")
        if k < 1:
            raise ConfigError(f"run.k: must be >= 1, got {k}")
        if replications < 1:
            raise ConfigError(f"run.replications: must be >= 1, got {replications}")
        pool_size = _as_int(cfg, "env.pool_size")
        if pool_mode == "network" and k > pool_size:
            raise ConfigError(f"run.k: k={k} exceeds env.pool_size={pool_size}")

        return cls(
            env_kind=kind,
            env_n=_as_int(cfg, "env.n"),
            env_param=_as_float(cfg, "env.param"),
            d_node=_as_int(cfg, "env.d_node"),
            structural=_as_bool(cfg, "env.structural"),
            ground_truth=ground_truth,
            tau=_as_float(cfg, "env.tau"),
            holdout=_as_int(cfg, "env.holdout"),
            pool_mode=pool_mode,
            pool_size=pool_size,
            edge_list=_get(cfg, "env.edge_list"),
            node_features=_get(cfg, "env.node_features"),
            policy_name=policy_name,
            beta=beta,
            C=C,
            objective=objective,
            alpha=_as_float(cfg, "policy.alpha"),
            lr=_as_float(cfg, "policy.lr"),
            sigma=_as_float(cfg, "policy.sigma"),
            lam=_as_float(cfg, "policy.lambda"),
            adaptive={
                "c_min": _as_float(cfg, "policy.c_min"),
                "c_max": _as_float(cfg, "policy.c_max"),
                "gamma": _as_float(cfg, "policy.gamma"),
                "warmup": _as_int(cfg, "policy.warmup"),
                "epsilon": _as_float(cfg, "policy.epsilon"),
            },
            T=T,
            k=k,
            replications=replications,
            base_seed=_as_int(cfg, "run.base_seed"),
        )

    def canonical_items(self) -> list[tuple[str, str]]:
        """Key=value pairs that define this cell's identity (drops axes the
        chosen policy does not consume, so sweep cells dedupe cleanly)."""
        items = {
            "env.kind": self.env_kind,
            "env.n": str(self.env_n),
            "env.param": repr(self.env_param),
            "env.d_node": str(self.d_node),
            "env.structural": str(self.structural).lower(),
            "env.ground_truth": self.ground_truth,
            "env.holdout": str(self.holdout),
            "env.pool_mode": self.pool_mode,
            "policy.name": self.policy_name,
            "run.T": str(self.T),
            "run.k": str(self.k),
            "run.base_seed": str(self.base_seed),
        }
        if self.ground_truth == "mlp":
            items["env.tau"] = repr(self.tau)
        if self.pool_mode == "network":
            items["env.pool_size"] = str(self.pool_size)
        if self.env_kind == "external":
            items["env.edge_list"] = self.edge_list
            items["env.node_features"] = self.node_features
        if self.policy_name == "influence_cb":
            items["policy.beta"] = repr(self.beta)
            items["policy.alpha"] = repr(self.alpha)
            if self.C is not None:
                items["policy.C"] = repr(self.C)
            else:
                items["policy.objective"] = self.objective
                for key, val in sorted(self.adaptive.items()):
                    items[f"policy.{key}"] = repr(val)
        elif self.policy_name == "lin_ucb":
            items["policy.alpha"] = repr(self.alpha)
        elif self.policy_name == "lin_ts":
            items["policy.sigma"] = repr(self.sigma)
        elif self.policy_name in ("sgd_explore", "sgd_exploit"):
            items["policy.lr"] = repr(self.lr)
        if self.policy_name in ("influence_cb", "lin_ucb", "lin_ts", "uniform", "ridge_linkpred"):
            items["policy.lambda"] = repr(self.lam)
        return sorted(items.items())

    def config_hash(self) -> str:
        blob = "\n".join(f"{k}={v}" for k, v in self.canonical_items())
        return hashlib.sha256(blob.encode()).hexdigest()[:12]

    def c_or_objective(self) -> str:
        if self.policy_name != "influence_cb":
            return ""
        return repr(self.C) if self.C is not None else self.objective


def expand_sweep(cfg: dict[str, str]) -> list[dict[str, str]]:
    """Cartesian product over sweep.* axes; cells that collapse to the same
    canonical config (axes the policy ignores) are deduplicated."""
    axes = []
    mapping = {
        "sweep.policy": "policy.name",
        "sweep.beta": "policy.beta",
        "sweep.C": "policy.C",
        "sweep.objective": "policy.objective",
        "sweep.k": "run.k",
    }
    for sweep_key, target in mapping.items():
        raw = cfg.get(sweep_key, "")
        if raw:
            values = [v.strip() for v in raw.split(",") if v.strip()]
            if values:
                axes.append((target, values))
    cells = [dict(cfg)]
    for target, values in axes:
        cells = [dict(cell, **{target: v}) for cell in cells for v in values]
    # Fixed C and adaptive objective are mutually exclusive on a cell.
    for cell in cells:
        if cell.get("policy.C") and cell.get("policy.objective"):
            raise ConfigError("sweep produced a cell with both policy.C and policy.objective set")
    seen = {}
    for cell in cells:
        rc = RunConfig.from_mapping(cell)
        seen.setdefault(rc.config_hash(), cell)
    return list(seen.values())
