"""Shared ridge-regression state for linear bandit policies.

Maintains V = lambda*I + sum(x x^T) over all observed plays together with
its inverse (rank-1 Sherman-Morrison updates, periodically refreshed by a
direct solve to bound floating-point drift), the reward-weighted feature sum
b, and the ridge estimate theta_hat = V^-1 b.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError, DataError

# Full inverse recomputation cadence; bounds drift without measurable cost
# at the dimensions this package targets (d up to a few hundred).
REFRESH_INTERVAL = 512


class LinearModel:
    """Incremental ridge state shared by uncertainty-aware policies.

    One simulation episode owns one instance exclusively; there is no
    internal locking.
    """

    def __init__(self, dim: int, lam: float = 1.0):
        if dim < 1:
            raise ConfigError(f"model dimension must be >= 1, got {dim}")
        if not lam > 0:
            raise ConfigError(f"ridge regularizer must be > 0, got {lam}")
        self.dim = int(dim)
        self.lam = float(lam)
        self.V = self.lam * np.eye(self.dim)
        self.Vinv = (1.0 / self.lam) * np.eye(self.dim)
        self.b = np.zeros(self.dim)
        self.theta_hat = np.zeros(self.dim)
        self.round = 0
        self.updates_since_refresh = 0
        self.play_counts: dict[int, int] = {}

    def observe(self, x: np.ndarray, r: float, arm_id: int) -> None:
        """Record one play: V += x x^T, b += r*x, refit theta_hat.

        The inverse is updated by the rank-1 identity
        Vinv -= (Vinv x)(Vinv x)^T / (1 + x^T Vinv x)
        and recomputed from scratch every REFRESH_INTERVAL updates.
        """
        x = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(x)):
            raise DataError("non-finite entries in observed feature vector")
        self.V += np.outer(x, x)
        z = self.Vinv @ x
        self.Vinv -= np.outer(z, z) / (1.0 + float(x @ z))
        self.b += float(r) * x
        self.play_counts[arm_id] = self.play_counts.get(arm_id, 0) + 1
        self.updates_since_refresh += 1
        if self.updates_since_refresh >= REFRESH_INTERVAL:
            self.refresh()
        else:
            self.theta_hat = self.Vinv @ self.b

    def refresh(self) -> None:
        """Recompute Vinv and theta_hat by direct solves against V."""
        eye = np.eye(self.dim)
        self.Vinv = np.linalg.solve(self.V, eye)
        # Symmetrize: solve() does not guarantee exact symmetry.
        self.Vinv = 0.5 * (self.Vinv + self.Vinv.T)
        self.theta_hat = np.linalg.solve(self.V, self.b)
        self.updates_since_refresh = 0

    def advance_round(self) -> None:
        """Mark one simulation round (one batch of plays) as complete."""
        self.round += 1

    def uncertainty(self, x: np.ndarray) -> float:
        """sqrt(x^T Vinv x): the confidence width along direction x."""
        x = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(x)):
            raise DataError("non-finite entries in feature vector")
        q = float(x @ self.Vinv @ x)
        return float(np.sqrt(max(q, 0.0)))

    def uncertainty_batch(self, X: np.ndarray) -> np.ndarray:
        """Vectorized uncertainty for a stack of feature rows."""
        q = np.einsum("ij,jk,ik->i", X, self.Vinv, X)
        return np.sqrt(np.maximum(q, 0.0))

    def predict_probability(self, x: np.ndarray) -> float:
        """Clamped linear estimate clip(x . theta_hat, 0, 1)."""
        return float(np.clip(float(np.asarray(x, dtype=float) @ self.theta_hat), 0.0, 1.0))

    def predict_probability_batch(self, X: np.ndarray) -> np.ndarray:
        return np.clip(X @ self.theta_hat, 0.0, 1.0)
