"""Round loop: action pools, Bernoulli rewards, per-round oracle values.

An Environment owns the hidden probabilities and two independent RNG
streams (pool construction, reward draws) so that different policies can
face identical pools when their seeds are paired.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .envgen import EdgeContext, GroundTruth
from .errors import ConfigError, InvariantError, ProtocolError


@dataclass
class ActionPool:
    round: int
    edge_ids: np.ndarray    # (P,) int64
    X: np.ndarray           # (P, d)
    mode_tag: str           # "network" | "neighbor" | "fixed"

    def entries(self):
        return list(zip(self.edge_ids.tolist(), self.X))

    def __len__(self) -> int:
        return len(self.edge_ids)


@dataclass
class RoundOutcome:
    round: int
    pool_size: int
    selected: np.ndarray
    rewards: np.ndarray
    phase: str                      # "explore" | "exploit" | "static"
    oracle_value: float
    selected_value: float
    u_t: float | None = None
    au_t: float | None = None
    C_t: float | None = None

    @property
    def regret(self) -> float:
        return self.oracle_value - self.selected_value


@dataclass
class Snapshot:
    """Model state captured at a round, for post-hoc error evaluation."""

    round: int
    theta: np.ndarray | None = None
    eval_probs: np.ndarray | None = None   # predictions over eval edges, for
                                           # policies without a linear estimate


@dataclass
class RunLog:
    policy_name: str
    hyperparameters: dict
    k: int
    T: int
    outcomes: list[RoundOutcome] = field(default_factory=list)
    snapshots: list[Snapshot] = field(default_factory=list)

    @property
    def final_theta(self) -> np.ndarray | None:
        for snap in reversed(self.snapshots):
            return snap.theta
        return None

    def explore_rounds(self) -> int:
        return sum(1 for o in self.outcomes if o.phase == "explore")


def split_holdout(contexts: list[EdgeContext], m_holdout: int = 500, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Uniform partition of edge ids into (training, held-out) sets."""
    M = len(contexts)
    if m_holdout >= M:
        raise ConfigError(f"holdout size {m_holdout} must be < number of edges {M}")
    ids = np.array([c.edge_id for c in contexts], dtype=np.int64)
    rng = np.random.default_rng(seed)
    if m_holdout == 0:
        return np.sort(ids), np.array([], dtype=np.int64)
    held = rng.choice(ids, size=m_holdout, replace=False)
    held_set = set(held.tolist())
    train = np.array([i for i in ids if i not in held_set], dtype=np.int64)
    return np.sort(train), np.sort(held)


class Environment:
    """Hidden-probability bandit environment over directed edge contexts."""

    def __init__(
        self,
        contexts: list[EdgeContext],
        holdout_ids: np.ndarray,
        k: int,
        pool_mode: str = "fixed",
        pool_size: int | None = None,
        pool_seed: int = 0,
        reward_seed: int = 1,
        ground_truth: GroundTruth | None = None,
    ):
        if any(c.p_true is None for c in contexts):
            raise ConfigError("all contexts must have p_true assigned")
        self.contexts = contexts
        self.k = int(k)
        self.pool_mode = pool_mode
        self.pool_size = pool_size
        self.ground_truth = ground_truth
        self.pool_rng = np.random.default_rng(pool_seed)
        self.reward_rng = np.random.default_rng(reward_seed)

        max_id = max(c.edge_id for c in contexts)
        self.d = len(contexts[0].x)
        self.X_all = np.zeros((max_id + 1, self.d))
        self.p_all = np.zeros(max_id + 1)
        for c in contexts:
            self.X_all[c.edge_id] = c.x
            self.p_all[c.edge_id] = c.p_true

        self.holdout_ids = np.sort(np.asarray(holdout_ids, dtype=np.int64))
        holdout_set = set(self.holdout_ids.tolist())
        self.train_ids = np.array(
            sorted(c.edge_id for c in contexts if c.edge_id not in holdout_set), dtype=np.int64
        )
        self._holdout_mask = np.zeros(max_id + 1, dtype=bool)
        self._holdout_mask[self.holdout_ids] = True

        if pool_mode == "network":
            if pool_size is None:
                raise ConfigError("network pool mode requires a pool size")
            if pool_size > len(self.train_ids):
                raise ConfigError(
                    f"pool size {pool_size} exceeds training edge count {len(self.train_ids)}"
                )
            if k > pool_size:
                raise ConfigError(f"k={k} exceeds pool size {pool_size}")
        elif pool_mode == "neighbor":
            by_source: dict[int, list[int]] = {}
            for c in contexts:
                if c.edge_id not in holdout_set:
                    by_source.setdefault(c.source, []).append(c.edge_id)
            self._neighbor_pools = {
                u: np.array(sorted(ids), dtype=np.int64)
                for u, ids in by_source.items()
                if len(ids) >= k
            }
            if not self._neighbor_pools:
                raise ConfigError(f"no node has at least k={k} training out-edges")
            self._neighbor_nodes = np.array(sorted(self._neighbor_pools), dtype=np.int64)
        elif pool_mode == "fixed":
            if k > len(self.train_ids):
                raise ConfigError(f"k={k} exceeds training edge count {len(self.train_ids)}")
        else:
            raise ConfigError(f"unknown pool mode: {pool_mode!r}")

        # Error evaluation set: the holdout when one exists, else every edge.
        self.eval_ids = self.holdout_ids if len(self.holdout_ids) else np.array(
            sorted(c.edge_id for c in contexts), dtype=np.int64
        )
        self._current_pool: ActionPool | None = None

    # -- pools ---------------------------------------------------------

    def next_pool(self, t: int) -> ActionPool:
        if self.pool_mode == "network":
            ids = np.sort(self.pool_rng.choice(self.train_ids, size=self.pool_size, replace=False))
        elif self.pool_mode == "neighbor":
            node = int(self.pool_rng.choice(self._neighbor_nodes))
            ids = self._neighbor_pools[node]
        else:
            ids = self.train_ids
        if self._holdout_mask[ids].any():
            raise InvariantError("held-out edge appeared in an action pool")
        pool = ActionPool(round=t, edge_ids=ids, X=self.X_all[ids], mode_tag=self.pool_mode)
        self._current_pool = pool
        return pool

    # -- rewards and regret ---------------------------------------------

    def sample_rewards(self, selected: np.ndarray) -> np.ndarray:
        if self._current_pool is None:
            raise ProtocolError("sample_rewards called before next_pool")
        pool_set = set(self._current_pool.edge_ids.tolist())
        for e in selected:
            if int(e) not in pool_set:
                raise ProtocolError(f"selected edge {int(e)} is not in the current pool")
        p = self.p_all[np.asarray(selected, dtype=np.int64)]
        return (self.reward_rng.random(len(p)) < p).astype(np.int64)

    def oracle_topk(self, pool: ActionPool) -> tuple[np.ndarray, float]:
        """True top-k edges of the pool (ties toward smaller edge id) and the
        sum of their probabilities."""
        p = self.p_all[pool.edge_ids]
        order = np.lexsort((pool.edge_ids, -p))
        ids = np.sort(pool.edge_ids[order[: self.k]])
        return ids, self.value_of(ids)

    def value_of(self, edge_ids: np.ndarray) -> float:
        """Sum of true probabilities, accumulated in ascending edge-id order
        so that equal selections always produce bit-equal values."""
        total = 0.0
        for e in np.sort(np.asarray(edge_ids, dtype=np.int64)):
            total += float(self.p_all[e])
        return total


def run_episode(env: Environment, policy, T: int, snapshot_every: int | None = None, on_round=None) -> RunLog:
    """Drive a policy for T rounds, recording outcomes and model snapshots.

    snapshot_every defaults to ceil(T/50); the final round is always
    snapshotted. on_round, when given, is called as on_round(env, policy,
    outcome) after each recorded round.
    """
    if snapshot_every is None:
        snapshot_every = max(1, -(-T // 50))
    log = RunLog(
        policy_name=policy.name,
        hyperparameters=dict(policy.hyperparameters),
        k=env.k,
        T=T,
    )
    eval_X = env.X_all[env.eval_ids]
    for t in range(1, T + 1):
        pool = env.next_pool(t)
        if len(pool) < env.k:
            raise ProtocolError(f"pool of size {len(pool)} smaller than k={env.k} at round {t}")
        selected = np.asarray(policy.select(pool), dtype=np.int64)
        if len(selected) != env.k or len(set(selected.tolist())) != env.k:
            raise ProtocolError(
                f"policy {policy.name} returned {len(selected)} selections "
                f"({len(set(selected.tolist()))} distinct); expected k={env.k}"
            )
        rewards = env.sample_rewards(selected)
        policy.update(selected, rewards)
        _, oracle_value = env.oracle_topk(pool)
        selected_value = env.value_of(selected)
        regret = oracle_value - selected_value
        if regret < 0.0:
            if regret < -1e-9:
                raise InvariantError(f"negative per-round regret {regret} at round {t}")
            # Float summation of tied subsets can land an ulp below zero.
            selected_value = oracle_value
        outcome = RoundOutcome(
            round=t,
            pool_size=len(pool),
            selected=selected,
            rewards=rewards,
            phase=getattr(policy, "last_phase", "static"),
            oracle_value=oracle_value,
            selected_value=selected_value,
            u_t=getattr(policy, "last_u", None),
            au_t=getattr(policy, "last_au", None),
            C_t=getattr(policy, "last_C", None),
        )
        log.outcomes.append(outcome)
        if t % snapshot_every == 0 or t == T:
            theta = getattr(policy, "theta_hat", None)
            if theta is not None:
                log.snapshots.append(Snapshot(round=t, theta=np.array(theta, copy=True)))
            else:
                probs = policy.predict_probabilities(eval_X, edge_ids=env.eval_ids)
                log.snapshots.append(Snapshot(round=t, eval_probs=probs))
        if on_round is not None:
            on_round(env, policy, outcome)
    return log


# ---------------------------------------------------------------------------
# Fixed-action instances for bench tests

def random_unit_arms(M: int, d: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    arms = rng.normal(size=(M, d))
    return arms / np.linalg.norm(arms, axis=1, keepdims=True)


def linear_probabilities(X: np.ndarray, seed: int, lo: float = 0.01, hi: float = 0.99) -> np.ndarray:
    """Min-max scaled random linear scores, one probability per arm row."""
    rng = np.random.default_rng(seed)
    w = rng.uniform(-1.0, 1.0, size=X.shape[1])
    s = X @ w
    smin, smax = float(s.min()), float(s.max())
    if smax == smin:
        raise ConfigError("degenerate arm scores; use a different seed")
    return lo + (hi - lo) * (s - smin) / (smax - smin)


def fixed_action_environment(
    arms: np.ndarray, p_true: np.ndarray, k: int, reward_seed: int = 0,
) -> Environment:
    """Wrap a raw arm matrix into a fixed-pool Environment (no holdout;
    errors are evaluated over the full arm set)."""
    contexts = [
        EdgeContext(edge_id=i, source=i, target=i, x=np.asarray(arms[i], dtype=float), p_true=float(p_true[i]))
        for i in range(len(arms))
    ]
    return Environment(
        contexts,
        holdout_ids=np.array([], dtype=np.int64),
        k=k,
        pool_mode="fixed",
        reward_seed=reward_seed,
    )
