"""Synthetic attributed networks with hidden edge-level influence probabilities.

Builds directed edge contexts (endpoint feature concatenation, optional
common-neighbor feature, trailing bias-1 coordinate) and assigns ground-truth
probabilities from either an exactly realizable linear generator or a random
two-hidden-layer network, plus CSV ingestion for external graphs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .errors import ConfigError, DataError

P_FLOOR = 0.01
MLP_HIDDEN = (128, 64)


@dataclass
class NodeRecord:
    node_id: int
    features: np.ndarray


@dataclass
class EdgeContext:
    """One directed edge with its feature vector and hidden probability."""

    edge_id: int
    source: int
    target: int
    x: np.ndarray
    p_true: float | None = None


@dataclass
class GroundTruth:
    kind: str                                # "linear" | "mlp"
    theta_star: np.ndarray | None = None     # present iff kind == "linear"
    mlp_weights: dict = field(default_factory=dict)
    tau: float = 4.0

    def evaluate(self, x: np.ndarray) -> float:
        if self.kind == "linear":
            return float(np.clip(float(x @ self.theta_star), P_FLOOR, 1.0 - P_FLOOR))
        return float(_mlp_forward(self.mlp_weights, self.tau, np.asarray(x, dtype=float)[None, :])[0])


def generate_graph(kind: str, n: int, param, seed: int) -> nx.DiGraph:
    """Random graph with both edge directions materialized.

    kind "erdos_renyi": param is the edge probability in [0, 1].
    kind "barabasi_albert": param is the attachment count m >= 1; the
    standard growth schedule yields exactly m*(n-m) undirected edges.
    """
    if n < 2:
        raise ConfigError(f"need at least 2 nodes, got n={n}")
    if kind == "erdos_renyi":
        p = float(param)
        if not 0.0 <= p <= 1.0:
            raise ConfigError(f"edge probability must be in [0, 1], got {p}")
        g = nx.gnp_random_graph(n, p, seed=int(seed))
    elif kind == "barabasi_albert":
        m = int(param)
        if m < 1:
            raise ConfigError(f"attachment count must be >= 1, got {m}")
        if m >= n:
            raise ConfigError(f"attachment count m={m} must be < n={n}")
        g = nx.barabasi_albert_graph(n, m, seed=int(seed))
    else:
        raise ConfigError(f"unknown graph kind: {kind!r}")
    if g.number_of_edges() == 0:
        raise ConfigError(f"graph generator produced an empty edge set (kind={kind}, n={n}, param={param})")
    return g.to_directed()


def generate_node_features(n: int, d_node: int, seed: int) -> list[NodeRecord]:
    """i.i.d. uniform [-1, 1] entries, each vector scaled to unit norm."""
    if n < 1 or d_node < 1:
        raise ConfigError(f"need n >= 1 and d_node >= 1, got n={n}, d_node={d_node}")
    rng = np.random.default_rng(seed)
    feats = rng.uniform(-1.0, 1.0, size=(n, d_node))
    norms = np.linalg.norm(feats, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise DataError("degenerate zero-norm feature vector; use a different seed")
    feats /= norms
    return [NodeRecord(node_id=i, features=feats[i]) for i in range(n)]


def build_edge_contexts(
    graph: nx.DiGraph,
    nodes: list[NodeRecord],
    include_common_neighbors: bool = True,
) -> list[EdgeContext]:
    """Feature vector per directed edge: concat(source feats, target feats,
    [common-neighbor count / (n-2)], [1.0]); edge ids are dense in
    (source, target) lexicographic order."""
    by_id = {rec.node_id: rec.features for rec in nodes}
    n = graph.number_of_nodes()
    neigh = {u: set(graph.successors(u)) for u in graph.nodes}
    contexts = []
    for edge_id, (u, v) in enumerate(sorted(graph.edges())):
        if u not in by_id:
            raise DataError(f"no feature record for node {u}")
        if v not in by_id:
            raise DataError(f"no feature record for node {v}")
        parts = [by_id[u], by_id[v]]
        if include_common_neighbors:
            cn = len(neigh[u] & neigh[v])
            parts.append(np.array([cn / (n - 2) if n > 2 else 0.0]))
        parts.append(np.array([1.0]))
        contexts.append(EdgeContext(edge_id=edge_id, source=u, target=v, x=np.concatenate(parts)))
    return contexts


def _affine_minmax(s: np.ndarray, lo: float, hi: float) -> tuple[float, float]:
    """Coefficients (a, c) of the affine map taking [min s, max s] to [lo, hi]."""
    smin, smax = float(np.min(s)), float(np.max(s))
    if smax == smin:
        raise DataError("degenerate score range (all edge scores equal); use a different seed")
    a = (hi - lo) / (smax - smin)
    return a, lo - a * smin


def assign_linear_ground_truth(contexts: list[EdgeContext], seed: int) -> tuple[list[EdgeContext], GroundTruth]:
    """Draw a random direction over the non-bias coordinates, min-max scale
    its scores into [P_FLOOR, 1-P_FLOOR], and fold the affine map into a
    parameter vector via the bias coordinate so p_true = x . theta_star
    holds exactly for every edge."""
    if len(contexts) < 2:
        raise ConfigError("need at least 2 edges for the linear generator")
    X = np.stack([c.x for c in contexts])
    d = X.shape[1]
    rng = np.random.default_rng(seed)
    w = rng.uniform(-1.0, 1.0, size=d - 1)
    s = X[:, :-1] @ w
    a, c = _affine_minmax(s, P_FLOOR, 1.0 - P_FLOOR)
    theta = np.concatenate([a * w, [c]])
    p = np.clip(X @ theta, P_FLOOR, 1.0 - P_FLOOR)
    for ctx, pe in zip(contexts, p):
        ctx.p_true = float(pe)
    return contexts, GroundTruth(kind="linear", theta_star=theta)


def _mlp_forward(weights: dict, tau: float, X: np.ndarray) -> np.ndarray:
    h1 = np.tanh(X @ weights["W1"].T + weights["b1"])
    h2 = np.tanh(h1 @ weights["W2"].T + weights["b2"])
    z = h2 @ weights["W3"].T + weights["b3"]
    p = 1.0 / (1.0 + np.exp(-z[:, 0] / tau))
    return np.clip(p, P_FLOOR, 1.0 - P_FLOOR)


def assign_mlp_ground_truth(
    contexts: list[EdgeContext], seed: int, tau: float = 4.0,
) -> tuple[list[EdgeContext], GroundTruth]:
    """Random two-hidden-layer tanh network (widths d -> 128 -> 64 -> 1,
    all weights and biases uniform on [-1, 1]) squashed by a temperature
    sigmoid; probabilities clipped into [P_FLOOR, 1-P_FLOOR]."""
    if tau <= 0:
        raise ConfigError(f"temperature must be > 0, got {tau}")
    X = np.stack([c.x for c in contexts])
    d = X.shape[1]
    rng = np.random.default_rng(seed)
    h1, h2 = MLP_HIDDEN
    weights = {
        "W1": rng.uniform(-1.0, 1.0, size=(h1, d)),
        "b1": rng.uniform(-1.0, 1.0, size=h1),
        "W2": rng.uniform(-1.0, 1.0, size=(h2, h1)),
        "b2": rng.uniform(-1.0, 1.0, size=h2),
        "W3": rng.uniform(-1.0, 1.0, size=(1, h2)),
        "b3": rng.uniform(-1.0, 1.0, size=1),
    }
    p = _mlp_forward(weights, tau, X)
    for ctx, pe in zip(contexts, p):
        ctx.p_true = float(pe)
    return contexts, GroundTruth(kind="mlp", mlp_weights=weights, tau=tau)


def max_context_norm(contexts: list[EdgeContext]) -> float:
    return float(max(np.linalg.norm(c.x) for c in contexts))


# ---------------------------------------------------------------------------
# External ingestion and serialization

def load_external(edge_list_path: str, node_feature_path: str) -> tuple[nx.DiGraph, list[NodeRecord]]:
    """Read an undirected edge list and per-node features from CSV.

    Edge list header: source,target. Feature header: node_id,f0,...,f{d-1}.
    Edges are symmetrized into both directions.
    """
    nodes: list[NodeRecord] = []
    seen_ids: set[int] = set()
    d = None
    with open(node_feature_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 2 or header[0] != "node_id":
            raise DataError(f"{node_feature_path}: expected header node_id,f0,...")
        d = len(header) - 1
        if header[1:] != [f"f{i}" for i in range(d)]:
            raise DataError(f"{node_feature_path}: feature columns must be named f0..f{d - 1}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != d + 1:
                raise DataError(f"{node_feature_path}:{lineno}: expected {d + 1} columns, got {len(row)}")
            try:
                nid = int(row[0])
                feats = np.array([float(v) for v in row[1:]])
            except ValueError as exc:
                raise DataError(f"{node_feature_path}:{lineno}: {exc}") from exc
            if nid in seen_ids:
                raise DataError(f"{node_feature_path}:{lineno}: duplicate node_id {nid}")
            if not np.all(np.isfinite(feats)):
                raise DataError(f"{node_feature_path}:{lineno}: non-finite feature value")
            seen_ids.add(nid)
            nodes.append(NodeRecord(node_id=nid, features=feats))
    if not nodes:
        raise DataError(f"{node_feature_path}: no feature rows")

    g = nx.Graph()
    g.add_nodes_from(seen_ids)
    with open(edge_list_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["source", "target"]:
            raise DataError(f"{edge_list_path}: expected header source,target")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 2:
                raise DataError(f"{edge_list_path}:{lineno}: expected 2 columns, got {len(row)}")
            try:
                u, v = int(row[0]), int(row[1])
            except ValueError as exc:
                raise DataError(f"{edge_list_path}:{lineno}: {exc}") from exc
            if u == v:
                raise DataError(f"{edge_list_path}:{lineno}: self-loop on node {u}")
            for node in (u, v):
                if node not in seen_ids:
                    raise DataError(f"{edge_list_path}:{lineno}: unknown node {node}")
            g.add_edge(u, v)
    if g.number_of_edges() == 0:
        raise DataError(f"{edge_list_path}: empty edge set")
    return g.to_directed(), nodes


def write_edge_list(graph: nx.DiGraph, path: str) -> None:
    """Write the undirected skeleton (each pair once, smaller id first)."""
    pairs = sorted({(min(u, v), max(u, v)) for u, v in graph.edges()})
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["source", "target"])
        writer.writerows(pairs)


def write_node_features(nodes: list[NodeRecord], path: str) -> None:
    d = len(nodes[0].features)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node_id"] + [f"f{i}" for i in range(d)])
        for rec in sorted(nodes, key=lambda r: r.node_id):
            writer.writerow([rec.node_id] + [repr(float(v)) for v in rec.features])


def write_manifest(path: str, entries: dict) -> None:
    """Flat key=value manifest recording how an environment was generated."""
    with open(path, "w") as fh:
        for key in sorted(entries):
            fh.write(f"{key}={entries[key]}\n")
