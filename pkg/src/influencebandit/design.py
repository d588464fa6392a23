"""Constrained optimal-design machinery over the capped simplex.

Solves min over weights w (w_i >= 0, sum 1, w_i <= 1/k) of the maximum
leverage x_i^T M(w)^-1 x_i by Frank-Wolfe ascent on the log-det surrogate,
whose linear subproblem over the capped simplex is a greedy sort. The
resulting weights feed a rounded play-count allocation and a precomputed
schedule policy for fixed action sets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .linmodel import LinearModel


@dataclass
class DesignWeights:
    w: np.ndarray
    cap: float
    f_value: float
    iterations: int
    converged: bool


@dataclass
class Allocation:
    counts: np.ndarray   # (M,) non-negative ints summing to k*T, each <= T
    T: int
    k: int


def _leverages(X: np.ndarray, w: np.ndarray) -> np.ndarray:
    Mw = X.T @ (w[:, None] * X)
    solved = np.linalg.solve(Mw, X.T)          # (d, M)
    return np.einsum("md,dm->m", X, solved)


def _capped_lmo(grad: np.ndarray, cap: float) -> np.ndarray:
    """Maximize <grad, s> over the capped simplex: fill the best coordinates
    greedily up to the cap (ties toward smaller index)."""
    M = len(grad)
    order = np.lexsort((np.arange(M), -grad))
    s = np.zeros(M)
    remaining = 1.0
    for i in order:
        take = min(cap, remaining)
        s[i] = take
        remaining -= take
        if remaining <= 0:
            break
    return s


def eval_max_leverage(arms: np.ndarray, w: np.ndarray) -> float:
    """max_i x_i^T M(w)^-1 x_i with M(w) = sum_j w_j x_j x_j^T.

    Raises numpy.linalg.LinAlgError when M(w) is singular.
    """
    X = np.asarray(arms, dtype=float)
    w = np.asarray(w, dtype=float)
    Mw = X.T @ (w[:, None] * X)
    inv = np.linalg.inv(Mw)
    lev = np.einsum("mi,ij,mj->m", X, inv, X)
    return float(lev.max())


def solve_gk_design(arms: np.ndarray, k: int, max_iters: int = 5000, tol: float = 1e-4) -> DesignWeights:
    X = np.asarray(arms, dtype=float)
    M, d = X.shape
    if not M > k >= 1:
        raise ConfigError(f"need M > k >= 1, got M={M}, k={k}")
    if np.linalg.matrix_rank(X) < d:
        raise ConfigError("arm set does not span the feature space")
    cap = 1.0 / k

    w = np.full(M, 1.0 / M)
    iterations = 0
    converged = False
    restarted = False
    while iterations < max_iters:
        iterations += 1
        try:
            lev = _leverages(X, w)
        except np.linalg.LinAlgError:
            if restarted:
                raise ConfigError("design matrix singular even at the uniform weights")
            w = np.full(M, 1.0 / M)
            restarted = True
            continue
        s = _capped_lmo(lev, cap)
        # sum_j w_j lev_j = trace(M(w)^-1 M(w)) = d, so the duality gap of
        # the log-det objective is <lev, s> - d.
        gap = float(lev @ s) - d
        if gap < tol:
            converged = True
            break
        gamma = 2.0 / (iterations + 2.0)
        w = (1.0 - gamma) * w + gamma * s

    f_value = eval_max_leverage(X, w)
    return DesignWeights(w=w, cap=cap, f_value=f_value, iterations=iterations, converged=converged)


def round_allocation(weights: DesignWeights, k: int, T: int) -> Allocation:
    """Largest-remainder rounding of k*T*w subject to the per-arm cap T."""
    w = np.asarray(weights.w, dtype=float)
    total = k * T
    targets = np.minimum(total * w, T)
    counts = np.floor(targets + 1e-9).astype(np.int64)
    deficit = total - int(counts.sum())
    if deficit < 0:
        raise ConfigError("allocation rounding overflow; weights are not on the simplex")
    remainders = targets - counts
    order = np.lexsort((np.arange(len(w)), -remainders))
    for i in order:
        if deficit == 0:
            break
        if counts[i] < T:
            counts[i] += 1
            deficit -= 1
    if deficit != 0:
        # Remaining capacity always exists because M*T >= k*T.
        for i in range(len(counts)):
            while deficit > 0 and counts[i] < T:
                counts[i] += 1
                deficit -= 1
    return Allocation(counts=counts, T=T, k=k)


def build_schedule(allocation: Allocation) -> np.ndarray:
    """(T, k) arm-index schedule consuming exactly counts[i] plays per arm
    with k distinct arms per round.

    Filling each round with the k largest remaining counts is always
    feasible when every count is at most T and they sum to k*T.
    """
    counts = allocation.counts.astype(np.int64).copy()
    T, k = allocation.T, allocation.k
    if counts.sum() != k * T or np.any(counts > T) or np.any(counts < 0):
        raise ConfigError("allocation is not schedulable")
    idx = np.arange(len(counts))
    schedule = np.zeros((T, k), dtype=np.int64)
    for t in range(T):
        order = np.lexsort((idx, -counts))
        chosen = order[:k]
        if counts[chosen[-1]] <= 0:
            raise ConfigError("allocation is not schedulable")
        schedule[t] = np.sort(chosen)
        counts[chosen] -= 1
    return schedule


class StaticDesignPolicy:
    """Plays a precomputed design schedule on a fixed action pool while
    fitting a ridge model from the observed rewards."""

    name = "static_design"

    def __init__(self, allocation: Allocation, edge_ids: np.ndarray, d: int, lam: float = 1.0):
        self.k = allocation.k
        self.edge_ids = np.asarray(edge_ids, dtype=np.int64)
        if len(self.edge_ids) != len(allocation.counts):
            raise ConfigError("allocation size does not match the arm count")
        self.schedule = build_schedule(allocation)
        self.model = LinearModel(d, lam)
        self._t = 0
        self._pool_X: dict[int, np.ndarray] = {}

    @property
    def hyperparameters(self) -> dict:
        return {"T": self.schedule.shape[0], "k": self.k}

    @property
    def theta_hat(self) -> np.ndarray:
        return self.model.theta_hat

    def select(self, pool) -> np.ndarray:
        if pool.mode_tag != "fixed":
            raise ConfigError("the static design policy requires the fixed pool mode")
        if self._t >= self.schedule.shape[0]:
            raise ConfigError("static design schedule exhausted")
        self._pool_X = {int(e): x for e, x in zip(pool.edge_ids, pool.X)}
        chosen = self.edge_ids[self.schedule[self._t]]
        self._t += 1
        return chosen

    def update(self, selected, rewards) -> None:
        for e, r in zip(selected, rewards):
            self.model.observe(self._pool_X[int(e)], float(r), int(e))
        self.model.advance_round()

    def predict_probabilities(self, X, edge_ids=None):
        return self.model.predict_probability_batch(X)


def weights_to_csv(weights: DesignWeights, path: str) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["arm", "weight"])
        for i, wi in enumerate(weights.w):
            writer.writerow([i, repr(float(wi))])
