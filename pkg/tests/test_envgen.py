"""Graph generation, context layout, and ground-truth assignment."""

import numpy as np
import pytest

from influencebandit import envgen
from influencebandit.errors import ConfigError, DataError


class TestGenerateGraph:
    def test_complete_er_graph(self):
        g = envgen.generate_graph("erdos_renyi", 3, 1.0, seed=1)
        assert g.number_of_edges() == 6

    def test_empty_er_graph_rejected(self):
        with pytest.raises(ConfigError):
            envgen.generate_graph("erdos_renyi", 100, 0.0, seed=1)

    def test_ba_edge_count_from_attachment_schedule(self):
        # m attachments per new node over n-m added nodes, both directions.
        g = envgen.generate_graph("barabasi_albert", 500, 10, seed=7)
        assert g.number_of_edges() == 2 * 10 * (500 - 10)

    def test_deterministic_given_seed(self):
        g1 = envgen.generate_graph("barabasi_albert", 60, 3, seed=5)
        g2 = envgen.generate_graph("barabasi_albert", 60, 3, seed=5)
        assert sorted(g1.edges()) == sorted(g2.edges())

    def test_both_directions_materialized(self):
        g = envgen.generate_graph("erdos_renyi", 10, 0.4, seed=2)
        for u, v in g.edges():
            assert g.has_edge(v, u)

    def test_bad_parameters(self):
        with pytest.raises(ConfigError):
            envgen.generate_graph("erdos_renyi", 1, 0.5, seed=0)
        with pytest.raises(ConfigError):
            envgen.generate_graph("barabasi_albert", 10, 0, seed=0)
        with pytest.raises(ConfigError):
            envgen.generate_graph("ring", 10, 1, seed=0)


class TestNodeFeatures:
    def test_unit_norm(self):
        nodes = envgen.generate_node_features(1, 4, seed=9)
        assert np.linalg.norm(nodes[0].features) == pytest.approx(1.0)

    def test_deterministic(self):
        a = envgen.generate_node_features(50, 8, seed=3)
        b = envgen.generate_node_features(50, 8, seed=3)
        for ra, rb in zip(a, b):
            np.testing.assert_array_equal(ra.features, rb.features)

    def test_entries_centered(self):
        nodes = envgen.generate_node_features(10_000, 16, seed=12)
        mean = np.mean([rec.features for rec in nodes])
        assert abs(mean) < 0.02


class TestEdgeContexts:
    def test_concatenation_layout(self):
        g = envgen.generate_graph("erdos_renyi", 2, 1.0, seed=0)
        nodes = [
            envgen.NodeRecord(0, np.array([0.1, 0.2])),
            envgen.NodeRecord(1, np.array([0.3, 0.4])),
        ]
        ctxs = envgen.build_edge_contexts(g, nodes, include_common_neighbors=False)
        first = ctxs[0]
        assert (first.source, first.target) == (0, 1)
        np.testing.assert_allclose(first.x, [0.1, 0.2, 0.3, 0.4, 1.0])

    def test_directed_pairs_are_distinct_permutations(self):
        g = envgen.generate_graph("erdos_renyi", 4, 1.0, seed=0)
        nodes = envgen.generate_node_features(4, 3, seed=1)
        ctxs = {(c.source, c.target): c for c in envgen.build_edge_contexts(g, nodes, False)}
        fwd, bwd = ctxs[(0, 1)], ctxs[(1, 0)]
        assert not np.array_equal(fwd.x, bwd.x)
        np.testing.assert_array_equal(fwd.x[:3], bwd.x[3:6])
        np.testing.assert_array_equal(fwd.x[3:6], bwd.x[:3])

    def test_triangle_common_neighbor_feature(self):
        g = envgen.generate_graph("erdos_renyi", 3, 1.0, seed=0)
        nodes = envgen.generate_node_features(3, 2, seed=1)
        ctxs = envgen.build_edge_contexts(g, nodes, include_common_neighbors=True)
        n = 3
        for c in ctxs:
            assert c.x[-2] == pytest.approx(1.0 / (n - 2))

    def test_edge_ids_dense_lexicographic(self):
        g = envgen.generate_graph("erdos_renyi", 5, 0.8, seed=4)
        nodes = envgen.generate_node_features(5, 2, seed=1)
        ctxs = envgen.build_edge_contexts(g, nodes)
        pairs = [(c.source, c.target) for c in ctxs]
        assert pairs == sorted(pairs)
        assert [c.edge_id for c in ctxs] == list(range(len(ctxs)))

    def test_missing_node_features_named(self):
        g = envgen.generate_graph("erdos_renyi", 3, 1.0, seed=0)
        nodes = envgen.generate_node_features(2, 2, seed=1)
        with pytest.raises(DataError, match="node 2"):
            envgen.build_edge_contexts(g, nodes)


class TestLinearGroundTruth:
    def _contexts(self, n=6, seed=0):
        g = envgen.generate_graph("erdos_renyi", n, 1.0, seed=seed)
        nodes = envgen.generate_node_features(n, 3, seed=seed + 1)
        return envgen.build_edge_contexts(g, nodes)

    def test_affine_map_endpoints(self):
        a, c = envgen._affine_minmax(np.array([-1.0, 1.0]), 0.01, 0.99)
        np.testing.assert_allclose(a * np.array([-1.0, 1.0]) + c, [0.01, 0.99])

    def test_affine_map_midpoint(self):
        a, c = envgen._affine_minmax(np.array([0.0, 1.0, 2.0]), 0.01, 0.99)
        np.testing.assert_allclose(a * np.array([0.0, 1.0, 2.0]) + c, [0.01, 0.50, 0.99])

    def test_probability_range_and_extremes(self):
        ctxs, _ = envgen.assign_linear_ground_truth(self._contexts(), seed=5)
        ps = np.array([c.p_true for c in ctxs])
        assert ps.min() == pytest.approx(0.01, abs=1e-12)
        assert ps.max() == pytest.approx(0.99, abs=1e-12)
        assert np.all((ps >= 0.01) & (ps <= 0.99))

    def test_exact_realizability(self):
        ctxs, gt = envgen.assign_linear_ground_truth(self._contexts(), seed=6)
        worst = max(abs(float(c.x @ gt.theta_star) - c.p_true) for c in ctxs)
        assert worst < 1e-12

    def test_degenerate_scores_rejected(self):
        g = envgen.generate_graph("erdos_renyi", 2, 1.0, seed=0)
        feats = np.array([0.6, 0.8])
        nodes = [envgen.NodeRecord(0, feats), envgen.NodeRecord(1, feats)]
        # Both directed edges share the same context, so every score ties.
        ctxs = envgen.build_edge_contexts(g, nodes, include_common_neighbors=False)
        with pytest.raises(DataError):
            envgen.assign_linear_ground_truth(ctxs, seed=1)


class TestMlpGroundTruth:
    def _contexts(self):
        g = envgen.generate_graph("erdos_renyi", 4, 1.0, seed=2)
        nodes = envgen.generate_node_features(4, 2, seed=3)
        return envgen.build_edge_contexts(g, nodes)

    def test_zero_weights_give_half(self):
        d = 5
        weights = {
            "W1": np.zeros((128, d)), "b1": np.zeros(128),
            "W2": np.zeros((64, 128)), "b2": np.zeros(64),
            "W3": np.zeros((1, 64)), "b3": np.zeros(1),
        }
        p = envgen._mlp_forward(weights, 4.0, np.ones((3, d)))
        np.testing.assert_allclose(p, 0.5)

    def test_large_temperature_flattens_to_half(self):
        ctxs, _ = envgen.assign_mlp_ground_truth(self._contexts(), seed=4, tau=1e9)
        for c in ctxs:
            assert c.p_true == pytest.approx(0.5, abs=1e-6)

    def test_matches_scalar_forward_pass(self):
        ctxs, gt = envgen.assign_mlp_ground_truth(self._contexts(), seed=8)
        w = gt.mlp_weights
        for c in ctxs[:3]:
            h1 = [np.tanh(sum(w["W1"][i][j] * c.x[j] for j in range(len(c.x))) + w["b1"][i]) for i in range(128)]
            h2 = [np.tanh(sum(w["W2"][i][j] * h1[j] for j in range(128)) + w["b2"][i]) for i in range(64)]
            z = sum(w["W3"][0][j] * h2[j] for j in range(64)) + w["b3"][0]
            expected = min(max(1.0 / (1.0 + np.exp(-z / gt.tau)), 0.01), 0.99)
            assert c.p_true == pytest.approx(expected, abs=1e-12)

    def test_probabilities_in_range(self):
        ctxs, _ = envgen.assign_mlp_ground_truth(self._contexts(), seed=9, tau=0.05)
        for c in ctxs:
            assert 0.01 <= c.p_true <= 0.99


class TestExternalIngestion:
    def test_round_trip(self, tmp_path):
        g = envgen.generate_graph("barabasi_albert", 30, 2, seed=6)
        nodes = envgen.generate_node_features(30, 4, seed=7)
        edge_path = tmp_path / "edges.csv"
        feat_path = tmp_path / "features.csv"
        envgen.write_edge_list(g, str(edge_path))
        envgen.write_node_features(nodes, str(feat_path))
        g2, nodes2 = envgen.load_external(str(edge_path), str(feat_path))
        assert sorted(g.edges()) == sorted(g2.edges())
        for a, b in zip(nodes, sorted(nodes2, key=lambda r: r.node_id)):
            np.testing.assert_array_equal(a.features, b.features)

    def test_smallest_instance_symmetrized(self, tmp_path):
        (tmp_path / "e.csv").write_text("source,target\n0,1\n")
        (tmp_path / "f.csv").write_text("node_id,f0\n0,0.5\n1,-0.5\n")
        g, nodes = envgen.load_external(str(tmp_path / "e.csv"), str(tmp_path / "f.csv"))
        ctxs = envgen.build_edge_contexts(g, nodes, include_common_neighbors=False)
        assert len(ctxs) == 2

    def test_dimension_mismatch_names_row(self, tmp_path):
        (tmp_path / "e.csv").write_text("source,target\n0,1\n")
        (tmp_path / "f.csv").write_text("node_id,f0,f1\n0,0.5,0.1\n1,-0.5\n")
        with pytest.raises(DataError, match="f.csv:3"):
            envgen.load_external(str(tmp_path / "e.csv"), str(tmp_path / "f.csv"))

    def test_unknown_node_names_line(self, tmp_path):
        (tmp_path / "e.csv").write_text("source,target\n0,1\n0,7\n")
        (tmp_path / "f.csv").write_text("node_id,f0\n0,0.5\n1,-0.5\n")
        with pytest.raises(DataError, match="e.csv:3"):
            envgen.load_external(str(tmp_path / "e.csv"), str(tmp_path / "f.csv"))

    def test_duplicate_node_rejected(self, tmp_path):
        (tmp_path / "e.csv").write_text("source,target\n0,1\n")
        (tmp_path / "f.csv").write_text("node_id,f0\n0,0.5\n0,-0.5\n1,0.2\n")
        with pytest.raises(DataError, match="duplicate"):
            envgen.load_external(str(tmp_path / "e.csv"), str(tmp_path / "f.csv"))

    def test_bad_header_rejected(self, tmp_path):
        (tmp_path / "e.csv").write_text("src,dst\n0,1\n")
        (tmp_path / "f.csv").write_text("node_id,f0\n0,0.5\n1,0.2\n")
        with pytest.raises(DataError, match="source,target"):
            envgen.load_external(str(tmp_path / "e.csv"), str(tmp_path / "f.csv"))
