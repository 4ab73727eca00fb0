"""Anatomy of one adaptive channel exchange.

Trains two small GCNs on different views of a toy graph, then walks through
the exchange machinery: histogram entropy of a weight matrix, the most
correlated (redundant) output-channel pair, the entropy-maximizing
substitution, and the bidirectional swap.
"""

import numpy as np

from akegnn import (
    AugmentSpec,
    EntropyConfig,
    ExchangeConfig,
    ModelSpec,
    build_graph,
    exchange_layer,
    generate_views,
    init_model,
    matrix_entropy,
    most_correlated_pair,
    select_exchange,
    train,
)
from akegnn.nn import TrainConfig

rng = np.random.default_rng(3)
n = 30
edges = sorted({(min(u, v), max(u, v))
                for u, v in rng.integers(0, n, size=(80, 2)) if u != v})
feats = rng.standard_normal((n, 10))
feats[:15, :3] += 1.5
labels = np.array([0] * 15 + [1] * 15)
g = build_graph(n, edges, feats, labels,
                (range(0, 8), range(8, 16), range(16, 30)))

views = generate_views(g, AugmentSpec(0.2, 0.0, 0.2, 0.0, seed=9), 2)
tc = TrainConfig(epochs=60, tolerance_num=60, dropout_rate=0.2)
source = init_model(ModelSpec((10, 8, 2), 0.2), 1)
target = init_model(source.spec, 2)
source, _ = train(source, views[0], g, tc)
target, _ = train(target, views[1], g, tc)

entropy = EntropyConfig(num_bins=12)
wt = target.layers[0].weight
print(f"target hidden weight matrix: {wt.shape}")
print(f"entropy before exchange: {matrix_entropy(wt, entropy):.4f} "
      f"(max possible ln {entropy.num_bins} = {np.log(entropy.num_bins):.4f})\n")

idx1, idx2, corr = most_correlated_pair(wt, "output")
print(f"most correlated (redundant) channel pair: ({idx1}, {idx2}) "
      f"with r = {corr:+.3f}")

i, r = select_exchange(source.layers[0], target.layers[0], idx1, idx2, entropy)
print(f"entropy-maximizing substitution: source channel {i} "
      f"into redundant slot {r}\n")

cfg = ExchangeConfig(iterations=1, channels_per_layer=3, entropy=entropy)
events = exchange_layer(source, target, 0, cfg, np.random.default_rng(0))
for ev in events:
    print(f"step: pair={ev.redundant_pair} r={ev.pair_correlation:+.3f} "
          f"swap source[{ev.source_channel}] <-> target[{ev.chosen}] "
          f"entropy {ev.entropy_before:.4f} -> {ev.entropy_after:.4f}")
