"""Acceptance suite: one test per exit criterion, one printed line each.

Heavy simulation checks run at fixed seeds so every run is reproducible.
Criterion 1 is implemented exactly as stated and is expected to fail at
this synthetic scale; see the repository notes for the analysis. All other
criteria must pass.
"""

import os
import subprocess
import sys
import time

import numpy as np
import pytest

from influencebandit.config import RunConfig, parse_config_text
from influencebandit.design import StaticDesignPolicy, round_allocation, solve_gk_design
from influencebandit.linmodel import LinearModel
from influencebandit.metrics import cumulative_regret, rmse_holdout
from influencebandit.oracles import (
    OmniscientPolicy,
    brute_topk,
    build_hard_instance,
    fit_rate,
    grid_design_oracle,
)
from influencebandit.policies import AdaptiveC, InfluenceCB, UniformRandomPolicy
from influencebandit.runner import run_many, write_outputs
from influencebandit.simcore import (
    fixed_action_environment,
    linear_probabilities,
    random_unit_arms,
    run_episode,
)


def report(criterion: str, passed: bool, detail: str = ""):
    status = "PASS" if passed else "FAIL"
    print(f"ACCEPTANCE {status} {criterion}: {detail}")


# ---------------------------------------------------------------------------
# Criterion 2-4 share one batch of fixed-action runs.

C2 = {"M": 64, "d": 8, "k": 4, "T": 4000, "C": 3.0, "seeds": 10,
      "arm_seed": 1001, "p_seed": 1002}


@pytest.fixture(scope="module")
def rate_runs():
    """InfluenceCB on a fixed 64-arm set, betas 0.25 and 0.5, 10 reward
    seeds each, with per-round width*sqrt(plays) checks.

    The inner policy is configured greedy (alpha=0) with a small ridge
    floor so the uncertainty threshold rule alone controls exploration;
    with a confidence-bonus inner policy the exploration count is
    identically zero at beta=0.25 and the measured decay reflects the
    inner policy rather than the threshold mechanism.
    """
    arms = random_unit_arms(C2["M"], C2["d"], seed=C2["arm_seed"])
    p = linear_probabilities(arms, seed=C2["p_seed"])
    out = {}
    for beta in (0.25, 0.5):
        runs = []
        for seed in range(C2["seeds"]):
            env = fixed_action_environment(arms, p, k=C2["k"], reward_seed=seed)
            policy = InfluenceCB(
                d=C2["d"], k=C2["k"], beta=beta, c=C2["C"], alpha=0.0, lam=0.1,
            )
            width_violations = [0]

            def check(env, policy, outcome):
                U = policy.model.uncertainty_batch(env.X_all)
                for arm in range(C2["M"]):
                    n = policy.model.play_counts.get(arm, 0)
                    if n >= 1 and U[arm] * np.sqrt(n) > 1.0 + 1e-9:
                        width_violations[0] += 1

            log = run_episode(env, policy, C2["T"], on_round=check)
            runs.append({
                "u": np.array([o.u_t for o in log.outcomes]),
                "explore": np.cumsum([1.0 if o.phase == "explore" else 0.0 for o in log.outcomes]),
                "counts": dict(policy.exploration_counts),
                "width_violations": width_violations[0],
            })
        out[beta] = runs
    return out


def test_c02_rate_achievability(rate_runs):
    """Seed-averaged max-uncertainty decays at least like t^-beta (within
    0.15) and cumulative exploration rounds grow no faster than t^(2 beta)
    (within 0.15), fitted over the last half of the horizon."""
    t = np.arange(1, C2["T"] + 1, dtype=float)
    ok = True
    details = []
    for beta, runs in rate_runs.items():
        u_mean = np.mean([r["u"] for r in runs], axis=0)
        e_mean = np.mean([r["explore"] for r in runs], axis=0)
        u_slope = fit_rate(t, u_mean, window=0.5)
        e_slope = fit_rate(t, e_mean, window=0.5)
        details.append(
            f"beta={beta}: u_slope={u_slope:.3f} (<= {-beta + 0.15:.2f}), "
            f"explore_slope={e_slope:.3f} (<= {2 * beta + 0.15:.2f})"
        )
        ok = ok and u_slope <= -beta + 0.15 and e_slope <= 2 * beta + 0.15
    report("criterion 2 (uncertainty and exploration growth rates)", ok, "; ".join(details))
    assert ok, details


def test_c03_exploration_count_bound(rate_runs):
    """Per-arm exploration count never exceeds 2 T^(2 beta) / C^2 + 1."""
    violations = 0
    for beta, runs in rate_runs.items():
        bound = 2.0 * C2["T"] ** (2 * beta) / C2["C"] ** 2 + 1.0
        for r in runs:
            violations += sum(1 for v in r["counts"].values() if v > bound)
    report("criterion 3 (per-arm exploration count bound)", violations == 0,
           f"{violations} violations")
    assert violations == 0


def test_c04_width_play_count_bound(rate_runs):
    """width(X) * sqrt(plays(X)) stays below 1 + 1e-9 at every round."""
    violations = sum(r["width_violations"] for runs in rate_runs.values() for r in runs)
    report("criterion 4 (width vs play count bound)", violations == 0,
           f"{violations} violations")
    assert violations == 0


def test_c05_design_allocation_beats_uniform():
    """Static design schedule reaches lower final estimation error than
    uniform random selection in at least 16 of 20 paired seeds."""
    M, d, k, T = 16, 6, 3, 1000
    arms = random_unit_arms(M, d, seed=77)
    p = linear_probabilities(arms, seed=78)
    sol = solve_gk_design(arms, k=k)
    wins = 0
    for seed in range(20):
        env_d = fixed_action_environment(arms, p, k=k, reward_seed=seed)
        design_policy = StaticDesignPolicy(round_allocation(sol, k=k, T=T), env_d.train_ids, d=d)
        run_episode(env_d, design_policy, T)
        env_u = fixed_action_environment(arms, p, k=k, reward_seed=seed)
        uniform = UniformRandomPolicy(d=d, k=k, policy_seed=seed + 1000)
        run_episode(env_u, uniform, T)
        err_d = rmse_holdout(design_policy.theta_hat, env_d.X_all, env_d.p_all)
        err_u = rmse_holdout(uniform.theta_hat, env_u.X_all, env_u.p_all)
        wins += err_d < err_u
    report("criterion 5 (design allocation vs uniform)", wins >= 16, f"{wins}/20 seeds")
    assert wins >= 16


DESIGN_FIXTURES = [
    (np.eye(2), 1),
    (np.eye(3), 1),
    (np.eye(4), 2),
    (np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]]), 2),
    (np.array([[1.0, 0.0], [0.0, 1.0], [0.7071, 0.7071]]), 2),
    (np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 1.0]]), 1),
    (random_unit_arms(4, 2, seed=123), 2),
]


def test_c06_design_solver_vs_grid_oracle():
    """Solver minimax leverage within 2% of the grid reference on every
    small fixture; exactly d (within 1%) on basis arms with feasible cap."""
    ok = True
    details = []
    for arms, k in DESIGN_FIXTURES:
        sol = solve_gk_design(np.asarray(arms, dtype=float), k=k)
        _, f_grid = grid_design_oracle(np.asarray(arms, dtype=float), k=k, step=0.005)
        details.append(f"M={len(arms)},k={k}: f={sol.f_value:.4f} grid={f_grid:.4f}")
        ok = ok and sol.f_value <= f_grid * 1.02
    for d in (2, 3, 4):
        sol = solve_gk_design(np.eye(d), k=1)
        ok = ok and abs(sol.f_value - d) / d <= 0.01
    report("criterion 6 (design solver vs grid oracle)", ok, "; ".join(details))
    assert ok


def test_c07_inverse_maintenance():
    """10^4 rank-1 updates track the directly inverted matrix to 1e-8 and
    the ridge solve residual stays below 1e-8."""
    rng = np.random.default_rng(99)
    model = LinearModel(8, 1.0)
    V = np.eye(8)
    for i in range(10_000):
        x = rng.uniform(-1, 1, 8)
        x *= min(1.0, 2.0 / np.linalg.norm(x))
        r = int(rng.random() < 0.5)
        model.observe(x, r, arm_id=i % 32)
        V += np.outer(x, x)
    inv_err = float(np.max(np.abs(model.Vinv - np.linalg.inv(V))))
    resid = float(np.max(np.abs(model.V @ model.theta_hat - model.b)))
    ok = inv_err < 1e-8 and resid < 1e-8
    report("criterion 7 (rank-1 inverse maintenance)", ok,
           f"inverse err {inv_err:.2e}, ridge residual {resid:.2e}")
    assert ok


def test_c08_regret_accounting_exact():
    """Per-round regret equals the exhaustive subset oracle exactly on 100
    random pools; the omniscient policy accrues exactly zero regret."""
    rng = np.random.default_rng(123)
    for trial in range(100):
        M = int(rng.integers(8, 16))
        k = int(rng.integers(1, 4))
        p = rng.random(M) * 0.98 + 0.01
        arms = random_unit_arms(M, 3, seed=trial)
        env = fixed_action_environment(arms, p, k=k, reward_seed=trial)
        policy = UniformRandomPolicy(d=3, k=k, policy_seed=trial)
        log = run_episode(env, policy, 1)
        outcome = log.outcomes[0]
        oracle_ids = brute_topk(p.tolist(), k)
        oracle_value = 0.0
        for i in sorted(oracle_ids):
            oracle_value += float(env.p_all[i])
        selected_value = 0.0
        for i in sorted(outcome.selected.tolist()):
            selected_value += float(env.p_all[i])
        assert outcome.oracle_value == oracle_value
        assert outcome.selected_value == selected_value
        assert outcome.regret == oracle_value - selected_value
    arms = random_unit_arms(20, 4, seed=7)
    p = linear_probabilities(arms, seed=8)
    env = fixed_action_environment(arms, p, k=3, reward_seed=11)
    omni = OmniscientPolicy(k=3, p_true_by_edge={i: float(p[i]) for i in range(20)})
    log = run_episode(env, omni, 200)
    total = cumulative_regret(log.outcomes)[-1]
    report("criterion 8 (exact regret accounting)", total == 0.0,
           f"omniscient cumulative regret {total}")
    assert total == 0.0


def test_c09_threshold_controller_contract():
    """Controller output stays in [c_min, c_max]; warmup rounds return the
    exact midpoint; the regret objective is monotone non-decreasing over
    10^4 random input streams."""
    ctl = AdaptiveC("regret", c_min=1.0, c_max=9.0, warmup=10)
    for _ in range(10):
        assert ctl.update(0.3, 0.7) == 5.0
    ctl = AdaptiveC("rmse", c_min=1.0, c_max=9.0, warmup=10)
    for _ in range(10):
        assert ctl.update(0.3, 0.7) == 5.0
    rng = np.random.default_rng(55)
    for _ in range(10_000):
        ctl = AdaptiveC("regret", warmup=int(rng.integers(0, 4)))
        prev = -np.inf
        for _ in range(8):
            c = ctl.update(float(rng.random()), float(rng.random()))
            assert 1.0 <= c <= 9.0
            assert c >= prev
            prev = c
    report("criterion 9 (threshold controller contract)", True,
           "bounds, warmup midpoint, monotonicity over 10^4 streams")


def test_c10_hard_instance_fixture():
    """The two-block fixture has expected rewards exactly 0.75 / 0.25 and a
    policy restricted to the low block pays regret exactly k * 0.5 per round."""
    inst = build_hard_instance(M=10, k=2, d=4)
    rewards = inst.arms @ inst.theta_star
    assert np.all(rewards[:2] == 0.75) and np.all(rewards[2:] == 0.25)
    env = fixed_action_environment(inst.arms, rewards, k=2, reward_seed=3)

    class ForcedLowPolicy:
        name = "forced_low"
        hyperparameters = {}
        theta_hat = None

        def select(self, pool):
            return np.array([2, 3], dtype=np.int64)

        def update(self, selected, rewards):
            pass

        def predict_probabilities(self, X, edge_ids=None):
            return None

    log = run_episode(env, ForcedLowPolicy(), 50)
    ok = all(o.oracle_value - o.selected_value == 2 * 0.5 for o in log.outcomes)
    report("criterion 10 (hard instance fixture)", ok, "per-round regret exactly 1.0")
    assert ok


CLI_CONFIG = """
env.kind = erdos_renyi
env.n = 40
env.param = 0.4
env.d_node = 4
env.holdout = 100
env.pool_mode = network
env.pool_size = 50
policy.name = influence_cb
policy.beta = 0.25
policy.C = 1.0
run.T = 40
run.k = 3
run.replications = 2
run.base_seed = 11
"""


def test_c11_cli_determinism(tmp_path):
    """The CLI produces byte-identical runs.csv and series.csv when invoked
    twice with the same config and base seed."""
    cfg = tmp_path / "cfg.txt"
    cfg.write_text(CLI_CONFIG)
    outs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        proc = subprocess.run(
            [sys.executable, "-m", "influencebandit", "run",
             "--config", str(cfg), "--out", str(out)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
        outs.append(out)
    same = all(
        (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
        for name in ("runs.csv", "series.csv")
    )
    report("criterion 11 (byte-identical reruns)", same, "runs.csv and series.csv")
    assert same


def test_c01_trade_off_direction():
    """Raising the threshold constant from 1 to 9 must cut mean regret below
    0.8x and raise mean holdout error above 1.3x on the synthetic linear
    network environment (10 paired replications).

    The 0.8 regret factor is not reachable at this synthetic scale (the
    direction reproduces, the magnitude does not); the assertion is kept
    as stated and this test is expected to fail. See the README section
    on known limitations.
    """
    start = time.monotonic()
    mapping = parse_config_text("""
env.kind = barabasi_albert
env.n = 500
env.param = 10
env.d_node = 8
env.holdout = 500
env.pool_mode = network
env.pool_size = 500
policy.name = influence_cb
policy.beta = 0.25
run.T = 2000
run.k = 5
run.replications = 10
run.base_seed = 1
""")
    results = {}
    for c in (1.0, 9.0):
        cfg = dict(mapping)
        cfg["policy.C"] = str(c)
        rc = RunConfig.from_mapping(cfg)
        grouped = run_many([rc], parallel=1)
        reps = grouped[rc.config_hash()]
        results[c] = (
            float(np.mean([r.final_regret for r in reps])),
            float(np.mean([r.final_rmse for r in reps])),
        )
    elapsed = time.monotonic() - start
    regret_ratio = results[9.0][0] / results[1.0][0]
    rmse_ratio = results[9.0][1] / results[1.0][1]
    ok = regret_ratio < 0.8 and rmse_ratio > 1.3 and elapsed < 180
    report(
        "criterion 1 (trade-off direction and magnitude)", ok,
        f"regret ratio {regret_ratio:.3f} (need < 0.8), "
        f"rmse ratio {rmse_ratio:.3f} (need > 1.3), {elapsed:.0f}s",
    )
    assert regret_ratio < 0.8, (
        f"regret ratio {regret_ratio:.3f} >= 0.8: the explicit exploration phase adds "
        f"too little regret at d=18 for the stated factor; see README known limitations"
    )
    assert rmse_ratio > 1.3
    assert elapsed < 180
