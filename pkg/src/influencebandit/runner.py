"""Sweep orchestration: build environments, run replications, write CSVs.

Output files per invocation directory:
  runs.csv    one row per (config, replication) with final metrics
  series.csv  per-round trace (regret, phase, threshold diagnostics, error
              snapshots at the logging cadence)
  pareto.csv  per-config aggregate with the dominated flag (sweep only)
  timing.csv  wall-clock sidecar; kept out of runs.csv so results are
              byte-reproducible
"""

from __future__ import annotations

import csv
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import envgen, metrics, policies
from .config import RunConfig
from .errors import ConfigError
from .seeding import seed_schedule
from .simcore import Environment, run_episode, split_holdout

RUNS_HEADER = [
    "config_hash", "policy", "beta", "C_or_objective", "k", "T", "rep", "seed",
    "final_regret", "final_rmse", "explore_rounds",
]
SERIES_HEADER = ["config_hash", "rep", "t", "cum_regret", "rmse", "phase", "u_t", "C_t"]
PARETO_HEADER = [
    "config_hash", "policy", "beta", "C_or_objective", "k", "T",
    "mean_regret", "std_regret", "mean_rmse", "std_rmse", "replications", "dominated",
]


@dataclass
class ReplicationResult:
    config_hash: str
    rep: int
    final_regret: float
    final_rmse: float
    explore_rounds: int
    series_rows: list
    wall_ms: int


def build_environment(rc: RunConfig, rep: int = 0) -> Environment:
    """Construct the environment for a config. Generation seeds depend only
    on the base seed (shared across replications); pool and reward streams
    are per-replication."""
    if rc.env_kind == "external":
        if not rc.edge_list or not rc.node_features:
            raise ConfigError("env.edge_list and env.node_features are required for env.kind=external")
        graph, nodes = envgen.load_external(rc.edge_list, rc.node_features)
    else:
        graph = envgen.generate_graph(
            rc.env_kind,
            rc.env_n,
            rc.env_param if rc.env_kind == "erdos_renyi" else int(rc.env_param),
            seed=seed_schedule(rc.base_seed, 0, "env.graph"),
        )
        nodes = envgen.generate_node_features(
            graph.number_of_nodes(), rc.d_node, seed=seed_schedule(rc.base_seed, 0, "env.features")
        )
    contexts = envgen.build_edge_contexts(graph, nodes, include_common_neighbors=rc.structural)
    gt_seed = seed_schedule(rc.base_seed, 0, "env.ground_truth")
    if rc.ground_truth == "linear":
        contexts, gt = envgen.assign_linear_ground_truth(contexts, seed=gt_seed)
    else:
        contexts, gt = envgen.assign_mlp_ground_truth(contexts, seed=gt_seed, tau=rc.tau)
    _, holdout = split_holdout(contexts, rc.holdout, seed=seed_schedule(rc.base_seed, 0, "env.holdout"))
    env = Environment(
        contexts,
        holdout_ids=holdout,
        k=rc.k,
        pool_mode=rc.pool_mode,
        pool_size=rc.pool_size if rc.pool_mode == "network" else None,
        pool_seed=seed_schedule(rc.base_seed, rep, "pool"),
        reward_seed=seed_schedule(rc.base_seed, rep, "reward"),
        ground_truth=gt,
    )
    env.graph = graph
    env.nodes = nodes
    return env


def make_policy(rc: RunConfig, env: Environment, rep: int):
    d = env.d
    k = rc.k
    pseed = seed_schedule(rc.base_seed, rep, "policy")
    name = rc.policy_name
    if name == "influence_cb":
        return policies.InfluenceCB(
            d, k, beta=rc.beta, c=rc.C, objective=rc.objective, alpha=rc.alpha,
            lam=rc.lam, policy_seed=pseed, adaptive_kwargs=dict(rc.adaptive) if rc.objective else None,
        )
    if name == "lin_ucb":
        return policies.CombLinUCB(d, k, alpha=rc.alpha, lam=rc.lam)
    if name == "lin_ts":
        return policies.LinTS(d, k, sigma_scale=rc.sigma, lam=rc.lam, policy_seed=pseed)
    if name == "sgd_explore":
        return policies.SGDLogisticPolicy(d, k, mode="explore", lr=rc.lr, policy_seed=pseed)
    if name == "sgd_exploit":
        return policies.SGDLogisticPolicy(d, k, mode="exploit", lr=rc.lr, policy_seed=pseed)
    if name == "uniform":
        return policies.UniformRandomPolicy(d, k, lam=rc.lam, policy_seed=pseed)
    if name == "random":
        return policies.random_score_policy(env.contexts, k, seed=pseed)
    if name == "similarity":
        feats = {rec.node_id: rec.features for rec in env.nodes}
        return policies.similarity_policy(env.contexts, feats, k)
    if name == "ridge_linkpred":
        feats = {rec.node_id: rec.features for rec in env.nodes}
        return policies.ridge_link_prediction_policy(
            env.contexts, env.graph, feats, k, seed=pseed, lam=rc.lam,
            include_common_neighbors=rc.structural,
        )
    raise ConfigError(f"unknown policy {name!r}")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        value = float(value)  # unwrap numpy scalars so repr stays plain
        if value != value:  # NaN
            return ""
        return repr(value)
    return str(value)


def run_replication(rc: RunConfig, rep: int) -> ReplicationResult:
    start = time.monotonic()
    env = build_environment(rc, rep)
    policy = make_policy(rc, env, rep)
    log = run_episode(env, policy, rc.T)
    eval_X = env.X_all[env.eval_ids]
    eval_p = env.p_all[env.eval_ids]
    series = metrics.series_from_log(log, eval_X, eval_p)
    cfg_hash = rc.config_hash()
    rmse_at = {int(t): v for t, v in zip(series.rmse_rounds, series.rmse)}
    rows = []
    for i, outcome in enumerate(log.outcomes):
        rows.append([
            cfg_hash,
            rep,
            outcome.round,
            repr(float(series.cumulative_regret[i])),
            _fmt(rmse_at.get(outcome.round)),
            outcome.phase,
            _fmt(outcome.u_t),
            _fmt(outcome.C_t),
        ])
    wall_ms = int((time.monotonic() - start) * 1000)
    return ReplicationResult(
        config_hash=cfg_hash,
        rep=rep,
        final_regret=series.final_regret,
        final_rmse=series.final_rmse,
        explore_rounds=log.explore_rounds(),
        series_rows=rows,
        wall_ms=wall_ms,
    )


def _worker(args) -> ReplicationResult:
    rc, rep = args
    return run_replication(rc, rep)


def run_many(configs: list[RunConfig], parallel: int = 1) -> dict[str, list[ReplicationResult]]:
    """All replications of all configs, gathered in submission order
    regardless of completion order."""
    jobs = [(rc, rep) for rc in configs for rep in range(rc.replications)]
    if parallel > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            results = list(pool.map(_worker, jobs))
    else:
        results = [_worker(job) for job in jobs]
    grouped: dict[str, list[ReplicationResult]] = {}
    for (rc, _), res in zip(jobs, results):
        grouped.setdefault(rc.config_hash(), []).append(res)
    return grouped


def write_outputs(out_dir: str, configs: list[RunConfig], grouped: dict[str, list[ReplicationResult]], pareto: bool) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "runs.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RUNS_HEADER)
        for rc in configs:
            for res in grouped[rc.config_hash()]:
                writer.writerow([
                    res.config_hash,
                    rc.policy_name,
                    repr(rc.beta) if rc.policy_name == "influence_cb" else "",
                    rc.c_or_objective(),
                    rc.k,
                    rc.T,
                    res.rep,
                    rc.base_seed,
                    repr(res.final_regret),
                    _fmt(res.final_rmse),
                    res.explore_rounds,
                ])
    with open(os.path.join(out_dir, "series.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SERIES_HEADER)
        for rc in configs:
            for res in grouped[rc.config_hash()]:
                writer.writerows(res.series_rows)
    with open(os.path.join(out_dir, "timing.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["config_hash", "rep", "wall_ms"])
        for rc in configs:
            for res in grouped[rc.config_hash()]:
                writer.writerow([res.config_hash, res.rep, res.wall_ms])
    if pareto:
        triples = []
        by_hash = {rc.config_hash(): rc for rc in configs}
        for cfg_hash, results in grouped.items():
            rc = by_hash[cfg_hash]
            label = {
                "config_hash": cfg_hash,
                "policy": rc.policy_name,
                "beta": repr(rc.beta) if rc.policy_name == "influence_cb" else "",
                "C_or_objective": rc.c_or_objective(),
                "k": rc.k,
                "T": rc.T,
            }
            for res in results:
                triples.append((label, res.final_regret, res.final_rmse))
        rows = metrics.pareto_summary(triples, key_fields=("config_hash",))
        with open(os.path.join(out_dir, "pareto.csv"), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(PARETO_HEADER)
            for row in sorted(rows, key=lambda r: r.config["config_hash"]):
                writer.writerow([
                    row.config["config_hash"],
                    row.config["policy"],
                    row.config["beta"],
                    row.config["C_or_objective"],
                    row.config["k"],
                    row.config["T"],
                    repr(row.mean_regret),
                    repr(row.std_regret),
                    repr(row.mean_rmse),
                    repr(row.std_rmse),
                    row.replications,
                    int(row.dominated),
                ])


def generate_environment_files(rc: RunConfig, out_dir: str) -> None:
    """Materialize a generated environment: edge list, node features, and a
    key=value manifest describing it."""
    os.makedirs(out_dir, exist_ok=True)
    env = build_environment(rc, rep=0)
    envgen.write_edge_list(env.graph, os.path.join(out_dir, "edges.csv"))
    envgen.write_node_features(env.nodes, os.path.join(out_dir, "features.csv"))
    envgen.write_manifest(
        os.path.join(out_dir, "manifest.txt"),
        {
            "seed": rc.base_seed,
            "kind": rc.env_kind,
            "n": env.graph.number_of_nodes(),
            "edges": env.graph.number_of_edges(),
            "param": rc.env_param,
            "d_node": rc.d_node,
            "structural": str(rc.structural).lower(),
            "d": env.d,
            "c": repr(envgen.max_context_norm(env.contexts)),
            "p_floor": envgen.P_FLOOR,
            "ground_truth": rc.ground_truth,
            "tau": rc.tau,
            "holdout": rc.holdout,
        },
    )
