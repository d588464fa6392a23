"""Independent reference implementations used to check the main code paths.

Everything here is deliberately brute-force or closed-form and shares no
helper code with the modules it verifies.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import ConfigError


@dataclass
class HardInstance:
    """A two-block arm set with reward means 3/4 and 1/4 (gap exactly 1/2).

    The first k arms put weight on the first coordinate, the remaining M-k
    on the second; tail coordinates are zero so expected rewards are exact.
    """

    arms: np.ndarray          # (M, d)
    theta_star: np.ndarray    # (d,)
    k: int
    gap: float = 0.5


def build_hard_instance(M: int, k: int, d: int) -> HardInstance:
    if not M > k >= 1:
        raise ConfigError(f"need M > k >= 1, got M={M}, k={k}")
    if d < 2:
        raise ConfigError(f"need d >= 2, got d={d}")
    arms = np.zeros((M, d))
    arms[:k, 0] = 1.0
    arms[k:, 1] = 1.0
    theta = np.zeros(d)
    theta[0] = 0.75
    theta[1] = 0.25
    return HardInstance(arms=arms, theta_star=theta, k=k)


def brute_topk(values, k: int) -> tuple[int, ...]:
    """Exhaustively enumerate all k-subsets and return the sum-maximizing one.

    Ties are broken toward the lexicographically smallest index tuple, which
    matches a greedy sort on (value descending, index ascending).
    """
    values = list(values)
    if len(values) < k:
        raise ConfigError(f"need at least k={k} values, got {len(values)}")
    best = None
    best_sum = -np.inf
    for subset in combinations(range(len(values)), k):
        s = sum(values[i] for i in subset)
        if s > best_sum:
            best_sum = s
            best = subset
    return best


def grid_design_oracle(arms: np.ndarray, k: int, step: float) -> tuple[np.ndarray, float]:
    """Exhaustive grid search over the capped simplex (coordinates <= 1/k).

    Only tractable for very small arm counts; returns the grid point with
    the smallest maximum leverage and that value.
    """
    arms = np.asarray(arms, dtype=float)
    M = arms.shape[0]
    if M > 4:
        raise ConfigError(f"grid oracle supports at most 4 arms, got {M}")
    if step not in (0.01, 0.005):
        raise ConfigError(f"step must be 0.01 or 0.005, got {step}")
    units = round(1.0 / step)
    cap_units = int(np.floor(units / k + 1e-9))

    grids = []

    def compositions(prefix, remaining, slots):
        if slots == 1:
            if remaining <= cap_units:
                grids.append(prefix + [remaining])
            return
        lo = max(0, remaining - cap_units * (slots - 1))
        hi = min(cap_units, remaining)
        for u in range(lo, hi + 1):
            compositions(prefix + [u], remaining - u, slots - 1)

    compositions([], units, M)
    W = np.array(grids, dtype=float) * step

    best_w = None
    best_f = np.inf
    d = arms.shape[1]
    outer = np.einsum("mi,mj->mij", arms, arms)
    chunk = 20000
    for start in range(0, W.shape[0], chunk):
        Wc = W[start:start + chunk]
        Ms = np.einsum("bm,mij->bij", Wc, outer)
        dets = np.linalg.det(Ms)
        ok = np.abs(dets) > 1e-12
        if not np.any(ok):
            continue
        inv = np.linalg.inv(Ms[ok])
        lev = np.einsum("mi,bij,mj->bm", arms, inv, arms)
        fmax = lev.max(axis=1)
        idx = int(np.argmin(fmax))
        if fmax[idx] < best_f:
            best_f = float(fmax[idx])
            best_w = Wc[ok][idx].copy()
    if best_w is None:
        raise ConfigError("no nonsingular grid point found; arms may not span")
    return best_w, best_f


def fit_rate(t: np.ndarray, values: np.ndarray, window: float = 0.5) -> float:
    """Least-squares slope of log(value) against log(t) over the last
    `window` fraction of the series."""
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    if t.shape != values.shape or t.ndim != 1:
        raise ConfigError("t and values must be 1-d arrays of equal length")
    n = len(t)
    start = int(np.floor(n * (1.0 - window)))
    tw, vw = t[start:], values[start:]
    if np.any(vw <= 0) or np.any(tw <= 0):
        raise ConfigError("rate fit window contains non-positive values")
    slope, _ = np.polyfit(np.log(tw), np.log(vw), 1)
    return float(slope)


class OmniscientPolicy:
    """Test policy that selects the true top-k edges of every pool.

    Accrues exactly zero regret by construction; used to validate regret
    accounting.
    """

    name = "omniscient"

    def __init__(self, k: int, p_true_by_edge: dict[int, float]):
        self.k = k
        self._p = p_true_by_edge

    @property
    def hyperparameters(self) -> dict:
        return {}

    def select(self, pool) -> np.ndarray:
        p = np.array([self._p[int(e)] for e in pool.edge_ids])
        order = np.lexsort((pool.edge_ids, -p))
        return pool.edge_ids[order[: self.k]]

    def update(self, selected, rewards) -> None:
        pass

    theta_hat = None

    def predict_probabilities(self, X, edge_ids=None):
        if edge_ids is None:
            return None
        return np.array([self._p[int(e)] for e in edge_ids])
