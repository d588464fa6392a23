"""Post-processing of run logs: regret curves, estimation error, Pareto tables."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InvariantError
from .simcore import RunLog


@dataclass
class MetricSeries:
    rounds: np.ndarray
    cumulative_regret: np.ndarray
    rmse_rounds: np.ndarray
    rmse: np.ndarray
    final_regret: float
    final_rmse: float


@dataclass
class ParetoRow:
    config: dict
    mean_regret: float
    std_regret: float
    mean_rmse: float
    std_rmse: float
    replications: int
    dominated: bool = False


def cumulative_regret(outcomes) -> np.ndarray:
    """Prefix sums of per-round regret (oracle value minus selected value)."""
    gaps = np.array([o.oracle_value - o.selected_value for o in outcomes])
    if np.any(gaps < 0):
        raise InvariantError("negative per-round regret in the outcome log")
    return np.cumsum(gaps)


def rmse_holdout(theta_hat: np.ndarray, X: np.ndarray, p_true: np.ndarray) -> float:
    """Root mean squared error of clip(x.theta, 0, 1) against the hidden
    probabilities over an evaluation edge set."""
    if len(p_true) == 0:
        raise ConfigError("empty evaluation edge set")
    p_hat = np.clip(np.asarray(X, dtype=float) @ np.asarray(theta_hat, dtype=float), 0.0, 1.0)
    return float(np.sqrt(np.mean((p_hat - np.asarray(p_true, dtype=float)) ** 2)))


def rmse_probabilities(p_hat: np.ndarray, p_true: np.ndarray) -> float:
    if len(p_true) == 0:
        raise ConfigError("empty evaluation edge set")
    p_hat = np.clip(np.asarray(p_hat, dtype=float), 0.0, 1.0)
    return float(np.sqrt(np.mean((p_hat - np.asarray(p_true, dtype=float)) ** 2)))


def series_from_log(log: RunLog, eval_X: np.ndarray, eval_p: np.ndarray) -> MetricSeries:
    """Regret curve plus estimation error recomputed at each model snapshot."""
    if log.outcomes:
        rounds = np.array([o.round for o in log.outcomes])
        cum = cumulative_regret(log.outcomes)
    else:
        rounds = np.array([], dtype=np.int64)
        cum = np.array([])
    rmse_rounds, rmse_vals = [], []
    for snap in log.snapshots:
        if snap.theta is not None:
            val = rmse_holdout(snap.theta, eval_X, eval_p)
        elif snap.eval_probs is not None:
            val = rmse_probabilities(snap.eval_probs, eval_p)
        else:
            val = float("nan")
        rmse_rounds.append(snap.round)
        rmse_vals.append(val)
    return MetricSeries(
        rounds=rounds,
        cumulative_regret=cum,
        rmse_rounds=np.array(rmse_rounds, dtype=np.int64),
        rmse=np.array(rmse_vals),
        final_regret=float(cum[-1]) if len(cum) else 0.0,
        final_rmse=rmse_vals[-1] if rmse_vals else float("nan"),
    )


def pareto_summary(runs: list[tuple[dict, float, float]], key_fields: tuple[str, ...] | None = None) -> list[ParetoRow]:
    """Aggregate (config, final_regret, final_rmse) triples by config and
    flag the rows no other row dominates (<= on both means, < on one)."""
    if not runs:
        raise ConfigError("pareto summary needs at least one run")
    groups: dict[tuple, list[tuple[float, float]]] = {}
    configs: dict[tuple, dict] = {}
    for cfg, regret, rmse in runs:
        if key_fields is None:
            key = tuple(sorted(cfg.items()))
        else:
            key = tuple((f, cfg.get(f)) for f in key_fields)
        groups.setdefault(key, []).append((regret, rmse))
        configs[key] = cfg
    rows = []
    for key, vals in sorted(groups.items(), key=lambda kv: kv[0]):
        regs = np.array([v[0] for v in vals])
        rmses = np.array([v[1] for v in vals])
        rows.append(
            ParetoRow(
                config=configs[key],
                mean_regret=float(regs.mean()),
                std_regret=float(regs.std(ddof=1)) if len(regs) > 1 else 0.0,
                mean_rmse=float(np.nanmean(rmses)),
                std_rmse=float(np.nanstd(rmses, ddof=1)) if len(rmses) > 1 else 0.0,
                replications=len(vals),
            )
        )
    for row in rows:
        row.dominated = any(
            other is not row
            and other.mean_regret <= row.mean_regret
            and other.mean_rmse <= row.mean_rmse
            and (other.mean_regret < row.mean_regret or other.mean_rmse < row.mean_rmse)
            for other in rows
        )
    return rows
