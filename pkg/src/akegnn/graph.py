"""Graph container, validation, and symmetric adjacency normalization.

A ``Graph`` is an immutable transductive node-classification instance:
dense node features, an undirected deduplicated edge set (stored once with
u < v), integer class labels, and disjoint train/val/test masks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import (
    OutOfRangeIndex,
    OverlappingSplits,
    SelfLoopEdge,
    ShapeMismatch,
)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Graph:
    num_nodes: int
    num_features: int
    num_classes: int
    features: np.ndarray  # (n, d) float64
    edges: np.ndarray     # (m, 2) int64, u < v, lexicographically sorted
    labels: np.ndarray    # (n,) int64
    train_mask: np.ndarray
    val_mask: np.ndarray
    test_mask: np.ndarray
    _adj_cache: list = field(default_factory=list, repr=False, compare=False)
    _feat_cache: list = field(default_factory=list, repr=False, compare=False)

    @property
    def num_edges(self) -> int:
        return self.edges.shape[0]

    def adjacency(self) -> "NormalizedAdjacency":
        """Lazily computed, cached renormalized adjacency of this graph."""
        if not self._adj_cache:
            self._adj_cache.append(normalize_adjacency(self))
        return self._adj_cache[0]

    def with_train_indices(self, train_idx) -> "Graph":
        """Same graph with a replacement train mask (val/test untouched)."""
        train_idx = np.asarray(train_idx, dtype=np.int64)
        if train_idx.size and (train_idx.min() < 0 or train_idx.max() >= self.num_nodes):
            raise OutOfRangeIndex("train index outside [0, n)")
        mask = np.zeros(self.num_nodes, dtype=bool)
        mask[train_idx] = True
        if np.any(mask & (self.val_mask | self.test_mask)):
            raise OverlappingSplits("new train mask intersects val/test")
        return Graph(
            self.num_nodes, self.num_features, self.num_classes,
            self.features, self.edges, self.labels,
            _frozen(mask), self.val_mask, self.test_mask,
            self._adj_cache,  # same edges and features, share both caches
            self._feat_cache,
        )


@dataclass(frozen=True)
class NormalizedAdjacency:
    """Symmetric (A + I) renormalization in compressed sparse row layout."""

    num_nodes: int
    row_offsets: np.ndarray  # (n+1,) int64
    col_indices: np.ndarray  # (nnz,) int64
    values: np.ndarray       # (nnz,) float64, all > 0
    _scipy_cache: list = field(default_factory=list, repr=False, compare=False)

    def to_scipy(self) -> sp.csr_array:
        if not self._scipy_cache:
            self._scipy_cache.append(sp.csr_array(
                (self.values, self.col_indices, self.row_offsets),
                shape=(self.num_nodes, self.num_nodes)))
        return self._scipy_cache[0]

    def to_dense(self) -> np.ndarray:
        return self.to_scipy().toarray()


def _canonical_edges(edges, n: int) -> np.ndarray:
    """Validate, deduplicate, and sort an undirected edge list."""
    e = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                   dtype=np.int64).reshape(-1, 2)
    if e.size:
        if e.min() < 0 or e.max() >= n:
            raise OutOfRangeIndex(f"edge endpoint outside [0, {n})")
        if np.any(e[:, 0] == e[:, 1]):
            bad = e[e[:, 0] == e[:, 1]][0, 0]
            raise SelfLoopEdge(f"self-loop at node {int(bad)}")
        lo = np.minimum(e[:, 0], e[:, 1])
        hi = np.maximum(e[:, 0], e[:, 1])
        e = np.unique(np.stack([lo, hi], axis=1), axis=0)
    return e.reshape(-1, 2)


def build_graph(num_nodes, edges, features, labels, splits) -> Graph:
    """Assemble and validate a Graph from raw parts.

    ``splits`` is a (train, val, test) triple of node-index lists; the three
    lists must be pairwise disjoint and within ``[0, num_nodes)``.
    """
    n = int(num_nodes)
    features = np.ascontiguousarray(np.asarray(features, dtype=np.float64))
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if features.ndim != 2 or features.shape[0] != n:
        raise ShapeMismatch(
            f"features shape {features.shape} incompatible with {n} nodes")
    if labels.shape[0] != n:
        raise ShapeMismatch(f"{labels.shape[0]} labels for {n} nodes")

    edges_arr = _canonical_edges(edges, n)

    train_idx, val_idx, test_idx = (np.asarray(s, dtype=np.int64).reshape(-1)
                                    for s in splits)
    masks = []
    for name, idx in (("train", train_idx), ("val", val_idx), ("test", test_idx)):
        if idx.size and (idx.min() < 0 or idx.max() >= n):
            raise OutOfRangeIndex(f"{name} split index outside [0, {n})")
        m = np.zeros(n, dtype=bool)
        m[idx] = True
        masks.append(m)
    if np.any(masks[0] & masks[1]) or np.any(masks[0] & masks[2]) \
            or np.any(masks[1] & masks[2]):
        raise OverlappingSplits("train/val/test splits intersect")

    num_classes = int(labels.max()) + 1 if n else 0
    covered = masks[0] | masks[1] | masks[2]
    if np.any(labels[covered] < 0):
        raise OutOfRangeIndex("negative label on a split node")

    return Graph(
        n, features.shape[1], num_classes,
        _frozen(features), _frozen(edges_arr), _frozen(labels),
        _frozen(masks[0]), _frozen(masks[1]), _frozen(masks[2]),
    )


def normalize_adjacency(g) -> NormalizedAdjacency:
    """Build D^{-1/2} (A + I) D^{-1/2} for a Graph or GraphView.

    Every node keeps a self-loop entry, so isolated nodes get diagonal 1.
    Values for (u, v) and (v, u) are the same float, making the output
    bitwise symmetric.
    """
    n = int(g.num_nodes)
    edges = np.asarray(g.edges, dtype=np.int64).reshape(-1, 2)

    deg = np.zeros(n, dtype=np.int64)
    if edges.size:
        np.add.at(deg, edges[:, 0], 1)
        np.add.at(deg, edges[:, 1], 1)
    inv_sqrt = 1.0 / np.sqrt(deg + 1.0)

    diag_nodes = np.arange(n, dtype=np.int64)
    rows = np.concatenate([edges[:, 0], edges[:, 1], diag_nodes])
    cols = np.concatenate([edges[:, 1], edges[:, 0], diag_nodes])
    if edges.size:
        edge_vals = inv_sqrt[edges[:, 0]] * inv_sqrt[edges[:, 1]]
    else:
        edge_vals = np.empty(0, dtype=np.float64)
    vals = np.concatenate([edge_vals, edge_vals, inv_sqrt * inv_sqrt])

    # canonical ordering: sort by (row, col) so equal graphs serialize equally
    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    row_offsets = np.zeros(n + 1, dtype=np.int64)
    np.add.at(row_offsets, rows + 1, 1)
    row_offsets = np.cumsum(row_offsets)

    return NormalizedAdjacency(
        n, _frozen(row_offsets), _frozen(cols), _frozen(vals))


def spmm(adj: NormalizedAdjacency, h: np.ndarray) -> np.ndarray:
    """Sparse-dense product ``adj @ h``."""
    h = np.asarray(h, dtype=np.float64)
    if h.ndim != 2 or h.shape[0] != adj.num_nodes:
        raise ShapeMismatch(
            f"dense operand shape {h.shape}, adjacency is {adj.num_nodes}x{adj.num_nodes}")
    return adj.to_scipy() @ h
