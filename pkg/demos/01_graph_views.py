"""Walk through the four stochastic graph augmentations.

Builds a small random community graph, applies each augmentation, and shows
what survives: node count and labels never change, features and edges do.
"""

import numpy as np

from akegnn import (
    AugmentSpec,
    build_graph,
    corrupt_features,
    drop_edges,
    extract_subgraph,
    generate_views,
    mask_features,
)

rng = np.random.default_rng(0)
n = 12
edges = sorted({(min(u, v), max(u, v))
                for u, v in rng.integers(0, n, size=(30, 2)) if u != v})
g = build_graph(n, edges, rng.standard_normal((n, 6)),
                rng.integers(0, 3, n), ((0, 1, 2), (3, 4), (5, 6, 7)))
print(f"base graph: {g.num_nodes} nodes, {g.num_edges} edges, "
      f"{g.num_features} features\n")

print("masking zeroes whole feature columns (one shared mask):")
v = mask_features(g, 0.4, np.random.default_rng(1))
zeroed = (~v.features.any(axis=0)).sum()
print(f"  p=0.4 -> {zeroed}/{g.num_features} columns zeroed\n")

print("corruption replaces single entries with draws from N(row mean, 1):")
v = corrupt_features(g, 0.3, np.random.default_rng(2))
changed = (v.features != g.features).mean()
print(f"  p=0.3 -> {changed:.0%} of entries replaced\n")

print("edge dropping keeps each edge with probability 1-p:")
v = drop_edges(g, 0.5, np.random.default_rng(3))
print(f"  p=0.5 -> {v.edges.shape[0]}/{g.num_edges} edges survive\n")

print("subgraph extraction keeps a random node subset (all slots remain):")
v = extract_subgraph(g, 0.5, np.random.default_rng(4))
kept = int(v.features.any(axis=1).sum())
print(f"  p=0.5 -> {kept}/{n} nodes keep their features, "
      f"{v.edges.shape[0]} induced edges\n")

print("generate_views cycles mask -> corrupt -> drop -> subgraph:")
spec = AugmentSpec(p_mask=0.1, p_corrupt=0.0, p_drop_edge=0.1,
                   p_subgraph=0.0, seed=42)
for i, view in enumerate(generate_views(g, spec, 4), start=1):
    same = (np.array_equal(view.features, g.features)
            and np.array_equal(view.edges, g.edges))
    print(f"  view {i}: {view.kind:10s} p={view.probability:.1f} "
          f"{'(identical to base)' if same else '(modified)'}")
