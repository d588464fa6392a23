"""Edge-selection strategies.

InfluenceCB alternates between uncertainty-guided exploration (when the
maximum pool uncertainty exceeds C_t / t^beta) and a regret-oriented inner
policy, with C_t either fixed or driven by AdaptiveC from batch statistics.
The remaining classes are the comparison baselines: combinatorial LinUCB,
linear Thompson sampling, online logistic regression, and static scorers.
"""

from __future__ import annotations

import logging

import numpy as np

from .errors import ConfigError, DataError
from .linmodel import LinearModel

logger = logging.getLogger(__name__)


def _topk_ids(edge_ids: np.ndarray, scores: np.ndarray, k: int) -> np.ndarray:
    """k edge ids of largest score; exact ties go to the smaller edge id."""
    order = np.lexsort((edge_ids, -scores))
    return edge_ids[order[:k]]


def _sigmoid(z):
    # Clipped to keep exp() in range; the tails saturate anyway.
    return 1.0 / (1.0 + np.exp(-np.clip(z, -60.0, 60.0)))


class BasePolicy:
    """Select/update contract shared by every strategy.

    select returns exactly k distinct edge ids drawn from the pool; update
    is called once per round with the ids it returned and their binary
    rewards.
    """

    name = "base"
    last_phase = "static"
    last_u: float | None = None
    last_au: float | None = None
    last_C: float | None = None

    def __init__(self, k: int):
        self.k = int(k)
        self._pool_X: dict[int, np.ndarray] = {}

    @property
    def hyperparameters(self) -> dict:
        return {}

    @property
    def theta_hat(self):
        return None

    def _remember_pool(self, pool) -> None:
        self._pool_X = {int(e): x for e, x in zip(pool.edge_ids, pool.X)}

    def select(self, pool) -> np.ndarray:
        raise NotImplementedError

    def update(self, selected, rewards) -> None:
        pass

    def predict_probabilities(self, X, edge_ids=None):
        return None


class AdaptiveC:
    """Maps recent batch statistics through a z-score and sigmoid into a
    threshold constant C_t in [c_min, c_max].

    objective "regret" consumes the activation rate and only ever raises
    C_t (monotone exploitation bias); objective "rmse" consumes the average
    pool uncertainty and moves C_t freely.
    """

    def __init__(
        self,
        objective: str,
        c_min: float = 1.0,
        c_max: float = 9.0,
        gamma: float = 1.0,
        warmup: int = 10,
        epsilon: float = 1e-8,
    ):
        if objective not in ("regret", "rmse"):
            raise ConfigError(f"objective must be 'regret' or 'rmse', got {objective!r}")
        if not c_min < c_max:
            raise ConfigError(f"need c_min < c_max, got {c_min} >= {c_max}")
        self.objective = objective
        self.c_min = float(c_min)
        self.c_max = float(c_max)
        self.gamma = float(gamma)
        self.warmup = int(warmup)
        self.epsilon = float(epsilon)
        self.hist: list[float] = []
        self.c_prev = self.c_min

    def update(self, activation_rate: float, average_uncertainty: float) -> float:
        m_t = float(activation_rate if self.objective == "regret" else average_uncertainty)
        self.hist.append(m_t)
        baseline = float(np.mean(self.hist)) if len(self.hist) > self.warmup else m_t
        z = (baseline - m_t) / (float(np.std(self.hist)) + self.epsilon)
        if self.objective == "regret":
            z = max(0.0, z)
        c_new = self.c_min + (self.c_max - self.c_min) / (1.0 + np.exp(-self.gamma * z))
        if self.objective == "regret":
            c_t = max(self.c_prev, c_new)
            self.c_prev = c_t
        else:
            c_t = c_new
        return float(c_t)


def comb_lin_ucb_select(model: LinearModel, pool, k: int, alpha: float) -> np.ndarray:
    """Top-k by the optimistic index x.theta_hat + alpha*sqrt(x V^-1 x)."""
    scores = pool.X @ model.theta_hat + alpha * model.uncertainty_batch(pool.X)
    return _topk_ids(pool.edge_ids, scores, k)


def lin_ts_select(model: LinearModel, pool, k: int, sigma_scale: float, rng: np.random.Generator) -> np.ndarray:
    """Top-k under a Gaussian parameter draw N(theta_hat, sigma^2 V^-1)."""
    if sigma_scale == 0.0:
        theta = model.theta_hat
    else:
        cov = 0.5 * (model.Vinv + model.Vinv.T)
        try:
            L = np.linalg.cholesky(cov)
            theta = model.theta_hat + sigma_scale * (L @ rng.standard_normal(model.dim))
        except np.linalg.LinAlgError:
            logger.warning("posterior covariance factorization failed; falling back to UCB selection")
            return comb_lin_ucb_select(model, pool, k, alpha=2.0)
    return _topk_ids(pool.edge_ids, pool.X @ theta, k)


class InfluenceCB(BasePolicy):
    """Threshold-switched explore/exploit bandit over a shared ridge model.

    Each round the maximum pool uncertainty u_t is compared against
    C_t / t^beta: above the threshold the k most uncertain edges are
    played, otherwise selection is delegated to the inner policy. Both
    phases update the same model.
    """

    name = "influence_cb"

    def __init__(
        self,
        d: int,
        k: int,
        beta: float,
        c: float | None = None,
        objective: str | None = None,
        alpha: float = 2.0,
        lam: float = 1.0,
        inner: str = "lin_ucb",
        sigma_scale: float = 1.0,
        policy_seed: int = 0,
        adaptive_kwargs: dict | None = None,
    ):
        super().__init__(k)
        if not 0.0 <= beta <= 1.0:
            raise ConfigError(f"beta must be in [0, 1], got {beta}")
        if (c is None) == (objective is None):
            raise ConfigError("exactly one of a fixed C or an objective must be given")
        if c is not None and c <= 0:
            raise ConfigError(f"C must be > 0, got {c}")
        if inner not in ("lin_ucb", "lin_ts"):
            raise ConfigError(f"unknown inner policy {inner!r}")
        self.beta = float(beta)
        self.c = None if c is None else float(c)
        self.adaptive = None if objective is None else AdaptiveC(objective, **(adaptive_kwargs or {}))
        self.alpha = float(alpha)
        self.inner = inner
        self.sigma_scale = float(sigma_scale)
        self.model = LinearModel(d, lam)
        self.rng = np.random.default_rng(policy_seed)
        self.exploration_counts: dict[int, int] = {}
        self._last_activation_rate = 0.0

    @property
    def hyperparameters(self) -> dict:
        hp = {"beta": self.beta, "alpha": self.alpha, "inner": self.inner}
        if self.c is not None:
            hp["C"] = self.c
        else:
            hp["objective"] = self.adaptive.objective
        return hp

    @property
    def theta_hat(self) -> np.ndarray:
        return self.model.theta_hat

    def select(self, pool) -> np.ndarray:
        self._remember_pool(pool)
        t = max(1, self.model.round + 1)
        U = self.model.uncertainty_batch(pool.X)
        u_t = float(U.max())
        au_t = float(U.mean())
        if self.c is not None:
            c_t = self.c
        else:
            c_t = self.adaptive.update(self._last_activation_rate, au_t)
        self.last_u, self.last_au, self.last_C = u_t, au_t, c_t
        if u_t > c_t / t ** self.beta:
            self.last_phase = "explore"
            chosen = _topk_ids(pool.edge_ids, U, self.k)
            argmax_arm = int(_topk_ids(pool.edge_ids, U, 1)[0])
            self.exploration_counts[argmax_arm] = self.exploration_counts.get(argmax_arm, 0) + 1
        else:
            self.last_phase = "exploit"
            if self.inner == "lin_ucb":
                chosen = comb_lin_ucb_select(self.model, pool, self.k, self.alpha)
            else:
                chosen = lin_ts_select(self.model, pool, self.k, self.sigma_scale, self.rng)
        return chosen

    def update(self, selected, rewards) -> None:
        for e, r in zip(selected, rewards):
            self.model.observe(self._pool_X[int(e)], float(r), int(e))
        self.model.advance_round()
        self._last_activation_rate = float(np.mean(np.asarray(rewards) == 1))

    def predict_probabilities(self, X, edge_ids=None):
        return self.model.predict_probability_batch(X)


class CombLinUCB(BasePolicy):
    """Standalone combinatorial LinUCB over one shared ridge model."""

    name = "lin_ucb"

    def __init__(self, d: int, k: int, alpha: float = 2.0, lam: float = 1.0):
        super().__init__(k)
        self.alpha = float(alpha)
        self.model = LinearModel(d, lam)

    @property
    def hyperparameters(self) -> dict:
        return {"alpha": self.alpha}

    @property
    def theta_hat(self) -> np.ndarray:
        return self.model.theta_hat

    def select(self, pool) -> np.ndarray:
        self._remember_pool(pool)
        return comb_lin_ucb_select(self.model, pool, self.k, self.alpha)

    def update(self, selected, rewards) -> None:
        for e, r in zip(selected, rewards):
            self.model.observe(self._pool_X[int(e)], float(r), int(e))
        self.model.advance_round()

    def predict_probabilities(self, X, edge_ids=None):
        return self.model.predict_probability_batch(X)


class LinTS(BasePolicy):
    """Linear Thompson sampling with covariance sigma^2 V^-1."""

    name = "lin_ts"

    def __init__(self, d: int, k: int, sigma_scale: float = 1.0, lam: float = 1.0, policy_seed: int = 0):
        super().__init__(k)
        self.sigma_scale = float(sigma_scale)
        self.model = LinearModel(d, lam)
        self.rng = np.random.default_rng(policy_seed)

    @property
    def hyperparameters(self) -> dict:
        return {"sigma": self.sigma_scale}

    @property
    def theta_hat(self) -> np.ndarray:
        return self.model.theta_hat

    def select(self, pool) -> np.ndarray:
        self._remember_pool(pool)
        return lin_ts_select(self.model, pool, self.k, self.sigma_scale, self.rng)

    def update(self, selected, rewards) -> None:
        for e, r in zip(selected, rewards):
            self.model.observe(self._pool_X[int(e)], float(r), int(e))
        self.model.advance_round()

    def predict_probabilities(self, X, edge_ids=None):
        return self.model.predict_probability_batch(X)


class SGDLogisticPolicy(BasePolicy):
    """Online logistic regression; purely exploitative or purely exploratory.

    exploit: top-k by sigmoid(v . x). explore: uniform k-subset of the pool,
    ignoring the fitted weights entirely. Either way, one cross-entropy
    gradient step per observed (x, r).
    """

    def __init__(self, d: int, k: int, mode: str, lr: float = 0.1, policy_seed: int = 0):
        super().__init__(k)
        if mode not in ("explore", "exploit"):
            raise ConfigError(f"mode must be 'explore' or 'exploit', got {mode!r}")
        if lr <= 0:
            raise ConfigError(f"learning rate must be > 0, got {lr}")
        self.mode = mode
        self.lr = float(lr)
        self.v = np.zeros(d)
        self.rng = np.random.default_rng(policy_seed)
        self.name = f"sgd_{mode}"

    @property
    def hyperparameters(self) -> dict:
        return {"lr": self.lr}

    def select(self, pool) -> np.ndarray:
        self._remember_pool(pool)
        if self.mode == "explore":
            return np.sort(self.rng.choice(pool.edge_ids, size=self.k, replace=False))
        scores = _sigmoid(pool.X @ self.v)
        return _topk_ids(pool.edge_ids, scores, self.k)

    def update(self, selected, rewards) -> None:
        for e, r in zip(selected, rewards):
            x = self._pool_X[int(e)]
            p = _sigmoid(float(self.v @ x))
            self.v += self.lr * (float(r) - p) * x

    def predict_probabilities(self, X, edge_ids=None):
        return _sigmoid(X @ self.v)


class UniformRandomPolicy(BasePolicy):
    """Uniform k-subset every round, with a ridge model fitted on the side
    so estimation error stays comparable to the model-based policies."""

    name = "uniform"

    def __init__(self, d: int, k: int, lam: float = 1.0, policy_seed: int = 0):
        super().__init__(k)
        self.model = LinearModel(d, lam)
        self.rng = np.random.default_rng(policy_seed)

    @property
    def theta_hat(self) -> np.ndarray:
        return self.model.theta_hat

    def select(self, pool) -> np.ndarray:
        self._remember_pool(pool)
        return np.sort(self.rng.choice(pool.edge_ids, size=self.k, replace=False))

    def update(self, selected, rewards) -> None:
        for e, r in zip(selected, rewards):
            self.model.observe(self._pool_X[int(e)], float(r), int(e))
        self.model.advance_round()

    def predict_probabilities(self, X, edge_ids=None):
        return self.model.predict_probability_batch(X)


class StaticScorePolicy(BasePolicy):
    """Fixed per-edge scores assigned at construction; update is a no-op."""

    def __init__(self, k: int, name: str, scores: dict[int, float], hyperparameters: dict | None = None):
        super().__init__(k)
        self.name = name
        self.scores = scores
        self._hp = hyperparameters or {}

    @property
    def hyperparameters(self) -> dict:
        return dict(self._hp)

    def select(self, pool) -> np.ndarray:
        s = np.array([self.scores[int(e)] for e in pool.edge_ids])
        return _topk_ids(pool.edge_ids, s, self.k)

    def predict_probabilities(self, X, edge_ids=None):
        if edge_ids is None:
            raise DataError("static scorers predict by edge id")
        return np.clip(np.array([self.scores[int(e)] for e in edge_ids]), 0.0, 1.0)


def random_score_policy(contexts, k: int, seed: int) -> StaticScorePolicy:
    rng = np.random.default_rng(seed)
    scores = {c.edge_id: float(rng.random()) for c in contexts}
    return StaticScorePolicy(k, "random", scores)


def similarity_policy(contexts, node_features: dict[int, np.ndarray], k: int) -> StaticScorePolicy:
    """Score = negated Euclidean distance between endpoint features, so the
    most similar endpoints rank first."""
    scores = {
        c.edge_id: -float(np.linalg.norm(node_features[c.source] - node_features[c.target]))
        for c in contexts
    }
    return StaticScorePolicy(k, "similarity", scores)


def ridge_link_prediction_policy(
    contexts,
    graph,
    node_features: dict[int, np.ndarray],
    k: int,
    seed: int,
    lam: float = 1.0,
    include_common_neighbors: bool = True,
) -> StaticScorePolicy:
    """Closed-form ridge regression separating existing edges (label 1) from
    an equal number of sampled non-edges (label 0); edges are then ranked by
    the fitted linear score."""
    n = graph.number_of_nodes()
    node_ids = sorted(graph.nodes)
    existing = {(u, v) for u, v in graph.edges()}
    n_pos = len(existing)
    available = n * (n - 1) - n_pos
    if available == 0:
        raise ConfigError("graph is complete; no non-edges available for link prediction")
    rng = np.random.default_rng(seed)
    neigh = {u: set(graph.successors(u)) for u in graph.nodes}

    def featurize(u: int, v: int) -> np.ndarray:
        parts = [node_features[u], node_features[v]]
        if include_common_neighbors:
            cn = len(neigh[u] & neigh[v])
            parts.append(np.array([cn / (n - 2) if n > 2 else 0.0]))
        parts.append(np.array([1.0]))
        return np.concatenate(parts)

    n_neg = min(n_pos, available)
    if n_neg > available // 2:
        # Dense graph: enumerate the non-edges instead of rejection sampling.
        all_neg = [
            (u, v) for u in node_ids for v in node_ids
            if u != v and (u, v) not in existing
        ]
        picks = rng.choice(len(all_neg), size=n_neg, replace=False)
        negatives = [all_neg[i] for i in picks]
    else:
        negatives = []
        seen = set()
        while len(negatives) < n_neg:
            u = int(rng.choice(node_ids))
            v = int(rng.choice(node_ids))
            if u == v or (u, v) in existing or (u, v) in seen:
                continue
            seen.add((u, v))
            negatives.append((u, v))

    X_pos = np.stack([c.x for c in contexts])
    X_neg = np.stack([featurize(u, v) for u, v in negatives])
    Phi = np.vstack([X_pos, X_neg])
    y = np.concatenate([np.ones(len(X_pos)), np.zeros(len(X_neg))])
    theta = np.linalg.solve(Phi.T @ Phi + lam * np.eye(Phi.shape[1]), Phi.T @ y)
    scores = {c.edge_id: float(c.x @ theta) for c in contexts}
    policy = StaticScorePolicy(k, "ridge_linkpred", scores, {"lambda": lam})
    policy.theta_lp = theta
    policy._fit_design = (Phi, y)
    return policy
