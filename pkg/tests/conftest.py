import numpy as np
import pytest

from akegnn.exchange import EntropyConfig, matrix_entropy
from akegnn.graph import build_graph
from akegnn.nn import forward, masked_cross_entropy


def loss_of(model, graph, mask):
    logits, _ = forward(model, graph, train_mode=False)
    return masked_cross_entropy(logits, graph.labels, mask)


def finite_difference_grads(model, graph, mask, h=1e-5):
    """Central differences through the whole forward pass, per parameter."""
    grads = []
    for layer in model.layers:
        gw = np.zeros_like(layer.weight)
        gb = np.zeros_like(layer.bias)
        for arr, out in ((layer.weight, gw), (layer.bias, gb)):
            flat = arr.ravel()
            for j in range(flat.size):
                orig = flat[j]
                flat[j] = orig + h
                up = loss_of(model, graph, mask)
                flat[j] = orig - h
                down = loss_of(model, graph, mask)
                flat[j] = orig
                out.ravel()[j] = (up - down) / (2 * h)
        grads.append((gw, gb))
    return grads


def max_relative_error(analytic, numeric):
    worst = 0.0
    for (aw, ab), (nw, nb) in zip(analytic, numeric):
        for a, n in ((aw, nw), (ab, nb)):
            denom = np.maximum(1.0, np.maximum(np.abs(a), np.abs(n)))
            worst = max(worst, float((np.abs(a - n) / denom).max()))
    return worst


def select_oracle(ws, wt, idx1, idx2, bins, axis="output"):
    """Exhaustively score every channel substitution and return the argmax.

    Candidate construction and the scan are independent of the library; the
    entropy convention is the package's documented one (entropy ties are
    real and the convention decides them).
    """
    best = None
    k = wt.shape[1] if axis == "output" else wt.shape[0]
    for i in range(k):
        for r in sorted((idx1, idx2)):
            cand = wt.copy()
            if axis == "output":
                cand[:, r] = ws[:, i]
            else:
                cand[r, :] = ws[i, :]
            h = matrix_entropy(cand, EntropyConfig(bins))
            if best is None or h > best[0]:
                best = (h, i, r)
    return best[1], best[2]


def random_small_graph(rng, n, d, num_classes=3):
    pairs = {(min(u, v), max(u, v))
             for u, v in rng.integers(0, n, size=(2 * n, 2)) if u != v}
    feats = rng.standard_normal((n, d))
    labels = rng.integers(0, num_classes, size=n)
    idx = rng.permutation(n)
    third = max(1, n // 3)
    splits = (idx[:third], idx[third:2 * third], idx[2 * third:])
    return build_graph(n, sorted(pairs), feats, labels, splits)


@pytest.fixture(scope="session")
def community_graph():
    """Two noisy communities, 40 nodes, good enough to learn in ~40 epochs."""
    rng = np.random.default_rng(7)
    n_per, n = 20, 40
    edges = set()
    for base in (0, n_per):
        while len([e for e in edges if e[0] >= base]) < 60:
            u, v = rng.integers(base, base + n_per, size=2)
            if u != v:
                edges.add((min(u, v), max(u, v)))
    for _ in range(6):
        u = int(rng.integers(0, n_per))
        v = int(rng.integers(n_per, n))
        edges.add((u, v))
    feats = np.vstack([
        rng.standard_normal((n_per, 8)) + np.array([1.2] * 4 + [0.0] * 4),
        rng.standard_normal((n_per, 8)) + np.array([0.0] * 4 + [1.2] * 4),
    ])
    labels = np.array([0] * n_per + [1] * n_per)
    idx = rng.permutation(n)
    return build_graph(n, sorted(edges), feats, labels,
                       (idx[:8], idx[8:16], idx[16:]))
