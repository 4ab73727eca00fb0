"""Stochastic graph-view generation.

Four augmentations produce views of a base graph: masking feature columns,
corrupting entries with Gaussian noise, dropping edges, and inducing a
random node subset. A view keeps the base graph's node count, labels, and
masks; only features and edges change.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import TooFewViews
from .graph import Graph, NormalizedAdjacency, normalize_adjacency, _frozen

AUGMENT_ORDER = ("mask", "corrupt", "drop_edges", "subgraph")


@dataclass(frozen=True)
class AugmentSpec:
    p_mask: float = 0.1
    p_corrupt: float = 0.0
    p_drop_edge: float = 0.1
    p_subgraph: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for name in ("p_mask", "p_corrupt", "p_drop_edge", "p_subgraph"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name}={p} outside [0, 1]")

    def probability_for(self, kind: str) -> float:
        return {
            "mask": self.p_mask,
            "corrupt": self.p_corrupt,
            "drop_edges": self.p_drop_edge,
            "subgraph": self.p_subgraph,
        }[kind]


@dataclass(frozen=True)
class GraphView:
    base: Graph
    features: np.ndarray
    edges: np.ndarray
    kind: str           # which augmentation produced this view
    probability: float
    _adj_cache: list = field(default_factory=list, repr=False, compare=False)
    _feat_cache: list = field(default_factory=list, repr=False, compare=False)

    @property
    def num_nodes(self) -> int:
        return self.base.num_nodes

    @property
    def num_features(self) -> int:
        return self.base.num_features

    @property
    def num_classes(self) -> int:
        return self.base.num_classes

    @property
    def labels(self) -> np.ndarray:
        return self.base.labels

    @property
    def train_mask(self) -> np.ndarray:
        return self.base.train_mask

    @property
    def val_mask(self) -> np.ndarray:
        return self.base.val_mask

    @property
    def test_mask(self) -> np.ndarray:
        return self.base.test_mask

    def adjacency(self) -> NormalizedAdjacency:
        if not self._adj_cache:
            self._adj_cache.append(normalize_adjacency(self))
        return self._adj_cache[0]


def _identity_view(g: Graph, kind: str) -> GraphView:
    return GraphView(g, g.features, g.edges, kind, 0.0)


def mask_features(g: Graph, p: float, rng: np.random.Generator) -> GraphView:
    """Zero out feature columns with one shared binary vector.

    A single length-d vector is drawn once (entry zero with probability p)
    and applied to every node's feature row.
    """
    if p == 0.0:
        return _identity_view(g, "mask")
    keep = rng.random(g.num_features) >= p
    feats = g.features * keep[None, :]
    return GraphView(g, _frozen(feats), g.edges, "mask", p)


def corrupt_features(g: Graph, p: float, rng: np.random.Generator) -> GraphView:
    """Replace random entries with draws from N(mean(row), 1).

    Each entry is independently replaced with probability p; the Gaussian
    mean is the owning node's feature mean.
    """
    if p == 0.0:
        return _identity_view(g, "corrupt")
    hit = rng.random(g.features.shape) < p
    row_means = g.features.mean(axis=1, keepdims=True)
    noise = rng.standard_normal(g.features.shape) + row_means
    feats = np.where(hit, noise, g.features)
    return GraphView(g, _frozen(feats), g.edges, "corrupt", p)


def drop_edges(g: Graph, p: float, rng: np.random.Generator) -> GraphView:
    """Keep each stored undirected edge independently with probability 1-p."""
    if p == 0.0:
        return _identity_view(g, "drop_edges")
    keep = rng.random(g.num_edges) >= p
    edges = g.edges[keep]
    return GraphView(g, g.features, _frozen(np.ascontiguousarray(edges)),
                     "drop_edges", p)


def extract_subgraph(g: Graph, p: float, rng: np.random.Generator) -> GraphView:
    """Induce the subgraph of a random node subset, keeping all n slots.

    Each node survives with probability 1-p. Dropped nodes keep their index
    but lose their feature row (zeroed) and all incident edges, so the view
    stays aligned with the base graph's masks.
    """
    if p == 0.0:
        return _identity_view(g, "subgraph")
    keep = rng.random(g.num_nodes) >= p
    feats = g.features * keep[:, None]
    if g.num_edges:
        edge_keep = keep[g.edges[:, 0]] & keep[g.edges[:, 1]]
        edges = np.ascontiguousarray(g.edges[edge_keep])
    else:
        edges = g.edges
    return GraphView(g, _frozen(feats), _frozen(edges), "subgraph", p)


_AUGMENT_FN = {
    "mask": mask_features,
    "corrupt": corrupt_features,
    "drop_edges": drop_edges,
    "subgraph": extract_subgraph,
}


def view_rng(spec: AugmentSpec, view_index: int) -> np.random.Generator:
    """Stream for 1-based view k: PCG64 seeded with spec.seed XOR k."""
    return np.random.Generator(np.random.PCG64((spec.seed ^ view_index) & (2**64 - 1)))


def generate_views(g: Graph, spec: AugmentSpec, k: int) -> list[GraphView]:
    """Produce k views, cycling through the four augmentations in order.

    View i (1-based) uses augmentation AUGMENT_ORDER[(i-1) % 4] with the
    spec's probability for that function and an rng stream derived from
    spec.seed XOR i, so the sequence is reproducible and views are
    independent of each other.
    """
    if k < 2:
        raise TooFewViews(f"k={k}, need at least 2 views")
    views = []
    for i in range(1, k + 1):
        kind = AUGMENT_ORDER[(i - 1) % len(AUGMENT_ORDER)]
        p = spec.probability_for(kind)
        views.append(_AUGMENT_FN[kind](g, p, view_rng(spec, i)))
    return views
