import numpy as np
import pytest

from akegnn.errors import (
    OutOfRangeIndex,
    OverlappingSplits,
    SelfLoopEdge,
    ShapeMismatch,
)
from akegnn.graph import build_graph, normalize_adjacency, spmm


def tiny_graph(n=3, edges=((0, 1), (1, 2)), d=2, num_classes=2,
               splits=((0,), (1,), (2,))):
    rng = np.random.default_rng(0)
    feats = rng.standard_normal((n, d))
    labels = rng.integers(0, num_classes, size=n)
    return build_graph(n, edges, feats, labels, splits)


class TestBuildGraph:
    def test_symmetric_pair_dedups_to_one_edge(self):
        g = tiny_graph(3, edges=[(0, 1), (1, 0)])
        assert g.num_edges == 1
        assert g.edges.tolist() == [[0, 1]]

    def test_edges_stored_with_small_endpoint_first(self):
        g = tiny_graph(4, edges=[(3, 1), (2, 0)], splits=((0,), (1,), (2,)))
        assert (g.edges[:, 0] < g.edges[:, 1]).all()

    def test_overlapping_splits_rejected(self):
        with pytest.raises(OverlappingSplits):
            tiny_graph(splits=((0,), (0,), (2,)))

    def test_self_loop_rejected(self):
        with pytest.raises(SelfLoopEdge):
            tiny_graph(edges=[(1, 1)])

    def test_out_of_range_edge_rejected(self):
        with pytest.raises(OutOfRangeIndex):
            tiny_graph(edges=[(0, 5)])

    def test_out_of_range_split_rejected(self):
        with pytest.raises(OutOfRangeIndex):
            tiny_graph(splits=((0,), (1,), (7,)))

    def test_feature_shape_mismatch_rejected(self):
        with pytest.raises(ShapeMismatch):
            build_graph(3, [], np.zeros((2, 4)), [0, 0, 0], ((0,), (1,), (2,)))

    def test_graph_arrays_are_immutable(self):
        g = tiny_graph()
        with pytest.raises(ValueError):
            g.features[0, 0] = 9.0
        with pytest.raises(ValueError):
            g.edges[0, 0] = 2


class TestNormalizeAdjacency:
    def test_single_node_is_identity(self):
        g = build_graph(1, [], np.zeros((1, 1)), [0], ((0,), (), ()))
        adj = normalize_adjacency(g)
        assert adj.to_dense().tolist() == [[1.0]]

    def test_triangle_every_entry_one_third(self):
        # each node has degree 2, so deg+1 = 3 and every entry is 1/3
        g = tiny_graph(3, edges=[(0, 1), (1, 2), (0, 2)])
        dense = normalize_adjacency(g).to_dense()
        assert np.allclose(dense, np.full((3, 3), 1.0 / 3.0))
        assert np.allclose(dense.sum(axis=1), 1.0, atol=1e-12)

    def test_path_of_two_nodes(self):
        g = build_graph(2, [(0, 1)], np.zeros((2, 1)), [0, 1], ((0,), (1,), ()))
        dense = normalize_adjacency(g).to_dense()
        assert np.allclose(dense, np.full((2, 2), 0.5))

    def test_isolated_node_keeps_diagonal_one(self):
        g = tiny_graph(3, edges=[(0, 1)])
        dense = normalize_adjacency(g).to_dense()
        assert dense[2, 2] == 1.0
        assert dense[2, :2].sum() == 0.0

    def test_bitwise_symmetry_on_random_graphs(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            n = int(rng.integers(2, 30))
            m = int(rng.integers(0, n * 2))
            pairs = set()
            while len(pairs) < m:
                u, v = rng.integers(0, n, size=2)
                if u != v:
                    pairs.add((min(u, v), max(u, v)))
            g = build_graph(n, sorted(pairs), rng.standard_normal((n, 2)),
                            rng.integers(0, 2, n), ((0,), (), ()))
            dense = normalize_adjacency(g).to_dense()
            assert (dense == dense.T).all()

    def test_k_regular_rows_sum_to_one(self):
        # ring of 6 nodes is 2-regular
        edges = [(i, (i + 1) % 6) for i in range(6)]
        g = build_graph(6, edges, np.zeros((6, 1)), [0] * 6, ((0,), (), ()))
        dense = normalize_adjacency(g).to_dense()
        assert np.allclose(dense.sum(axis=1), 1.0, atol=1e-12)


class TestSpmm:
    def test_single_node_identity(self):
        g = build_graph(1, [], np.zeros((1, 1)), [0], ((0,), (), ()))
        out = spmm(normalize_adjacency(g), np.array([[2.5]]))
        assert out.tolist() == [[2.5]]

    def test_triangle_times_ones_is_ones(self):
        g = tiny_graph(3, edges=[(0, 1), (1, 2), (0, 2)])
        out = spmm(normalize_adjacency(g), np.ones((3, 1)))
        assert np.allclose(out, 1.0, atol=1e-12)

    def test_zero_matrix_stays_zero(self):
        g = tiny_graph()
        out = spmm(normalize_adjacency(g), np.zeros((3, 4)))
        assert not out.any()

    def test_shape_mismatch(self):
        g = tiny_graph()
        with pytest.raises(ShapeMismatch):
            spmm(normalize_adjacency(g), np.zeros((5, 2)))

    def test_matches_dense_product_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            n = int(rng.integers(1, 33))
            pairs = {(min(u, v), max(u, v))
                     for u, v in rng.integers(0, n, size=(n, 2)) if u != v}
            g = build_graph(n, sorted(pairs), rng.standard_normal((n, 3)),
                            rng.integers(0, 2, n), ((0,), (), ()))
            adj = normalize_adjacency(g)
            h = rng.standard_normal((n, 4))
            assert np.allclose(spmm(adj, h), adj.to_dense() @ h, atol=1e-12)
