"""GCN forward/backward, loss, Adam, and the supervised training loop.

The propagation rule per layer is ``H_{l+1} = act(A_hat @ (drop(H_l) @ W_l) + b_l)``
with ReLU between layers and raw logits after the last. Gradients are exact
reverse-mode derivatives of the masked cross-entropy, including the dropout
masks; A_hat is symmetric so its transpose never needs materializing.

Feature matrices that are mostly zeros (bag-of-words graphs) are routed
through scipy sparse kernels for the first layer; the math is unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import EmptyMask, ShapeMismatch, StaleCache
from .graph import NormalizedAdjacency

# below this density the layer-0 feature matrix is handled as CSR
_SPARSE_DENSITY_CUTOFF = 0.05


@dataclass(frozen=True)
class ModelSpec:
    layer_sizes: tuple[int, ...]  # (d, hidden..., num_classes)
    dropout_rate: float = 0.5

    def __post_init__(self):
        if len(self.layer_sizes) < 2:
            raise ValueError("need at least one layer (two sizes)")
        object.__setattr__(self, "layer_sizes", tuple(int(s) for s in self.layer_sizes))

    @property
    def num_layers(self) -> int:
        return len(self.layer_sizes) - 1


@dataclass
class LayerParams:
    weight: np.ndarray  # (C_in, C_out)
    bias: np.ndarray    # (C_out,)

    def copy(self) -> "LayerParams":
        return LayerParams(self.weight.copy(), self.bias.copy())


@dataclass
class GnnModel:
    spec: ModelSpec
    layers: list[LayerParams]
    init_seed: int

    def copy(self) -> "GnnModel":
        return GnnModel(self.spec, [l.copy() for l in self.layers], self.init_seed)

    def all_parameters(self) -> np.ndarray:
        """Every scalar parameter flattened into one vector (weights then bias, per layer)."""
        return np.concatenate(
            [np.concatenate([l.weight.ravel(), l.bias.ravel()]) for l in self.layers])


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 200
    lr: float = 0.01
    weight_decay: float = 5e-4
    tolerance_metric: str = "loss"  # loss | accuracy | both
    tolerance_num: int = 10
    dropout_rate: float = 0.5
    seed: int = 0
    weight_decay_per_layer: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if self.tolerance_metric not in ("loss", "accuracy", "both"):
            raise ValueError(f"unknown tolerance metric {self.tolerance_metric!r}")


@dataclass
class TrainHistory:
    train_loss: list[float] = field(default_factory=list)
    train_acc: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    val_acc: list[float] = field(default_factory=list)
    stop_epoch: int = 0   # epochs actually run (1-based count)
    best_epoch: int = 0   # epoch whose parameters were returned
    budget: int = 0       # epochs allotted by the config


def init_model(spec: ModelSpec, seed: int) -> GnnModel:
    """Glorot-uniform weights, zero biases, reproducible from the seed."""
    rng = np.random.Generator(np.random.PCG64(seed))
    layers = []
    sizes = spec.layer_sizes
    for c_in, c_out in zip(sizes[:-1], sizes[1:]):
        bound = np.sqrt(6.0 / (c_in + c_out))
        w = rng.uniform(-bound, bound, size=(c_in, c_out))
        layers.append(LayerParams(w, np.zeros(c_out)))
    return GnnModel(spec, layers, seed)


def _maybe_sparse(features: np.ndarray):
    nnz = np.count_nonzero(features)
    if features.size and nnz / features.size < _SPARSE_DENSITY_CUTOFF:
        return sp.csr_array(features)
    return features


def _features_operand(view):
    """The view's feature matrix as the cheapest matmul operand, cached."""
    cache = getattr(view, "_feat_cache", None)
    if cache is None:
        return _maybe_sparse(view.features)
    if not cache:
        cache.append(_maybe_sparse(view.features))
    return cache[0]


def _dropout(h, rate: float, rng: np.random.Generator):
    """Inverted dropout; returns (dropped, multiplier) with multiplier shaped like h.

    For sparse h only the stored values are masked (dropping a structural
    zero is a no-op), so the result keeps the CSR structure.
    """
    if rate == 0.0:
        return h, None
    scale = 1.0 / (1.0 - rate)
    if sp.issparse(h):
        keep = rng.random(h.data.shape[0]) >= rate
        mult = keep * scale
        out = h.copy()
        out.data = out.data * mult
        return out, mult
    keep = rng.random(h.shape) >= rate
    mult = keep * scale
    return h * mult, mult


@dataclass
class ForwardCache:
    adjacency: NormalizedAdjacency
    inputs: list            # per layer: input after dropout (dense or CSR)
    dropout_mults: list     # per layer: multiplier array or None
    preacts: list[np.ndarray]  # per layer: A_hat @ (H W) + b
    logits: np.ndarray
    train_mode: bool
    model: GnnModel


def forward(model: GnnModel, view, train_mode: bool = False,
            rng: np.random.Generator | None = None,
            dropout_rate: float | None = None) -> tuple[np.ndarray, ForwardCache]:
    """Run the GCN on a Graph or GraphView; returns logits and the backward cache."""
    if view.num_features != model.spec.layer_sizes[0]:
        raise ShapeMismatch(
            f"view has {view.num_features} features, model expects "
            f"{model.spec.layer_sizes[0]}")
    rate = model.spec.dropout_rate if dropout_rate is None else dropout_rate
    if train_mode and rate > 0.0 and rng is None:
        raise ValueError("train-mode forward with dropout needs an rng")

    adj = view.adjacency()
    a_hat = adj.to_scipy()
    h = _features_operand(view)
    inputs, mults, preacts = [], [], []
    for li, layer in enumerate(model.layers):
        if train_mode and rate > 0.0:
            h_drop, mult = _dropout(h, rate, rng)
        else:
            h_drop, mult = h, None
        z = a_hat @ (h_drop @ layer.weight) + layer.bias
        z = np.asarray(z)
        inputs.append(h_drop)
        mults.append(mult)
        preacts.append(z)
        h = np.maximum(z, 0.0) if li < len(model.layers) - 1 else z
    logits = preacts[-1]
    cache = ForwardCache(adj, inputs, mults, preacts, logits, train_mode, model)
    return logits, cache


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def softmax(logits: np.ndarray) -> np.ndarray:
    return np.exp(_log_softmax(logits))


def masked_cross_entropy(logits: np.ndarray, labels: np.ndarray,
                         mask: np.ndarray) -> float:
    """Mean negative log-likelihood over the masked nodes."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise EmptyMask("cross entropy over an empty mask")
    lsm = _log_softmax(logits[mask])
    picked = lsm[np.arange(lsm.shape[0]), labels[mask]]
    return float(-picked.mean())


def backward(cache: ForwardCache, labels: np.ndarray,
             mask: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    """Gradients of masked_cross_entropy w.r.t. every weight and bias."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise EmptyMask("backward over an empty mask")
    model = cache.model
    if len(cache.inputs) != len(model.layers):
        raise StaleCache("cache does not match the model's layer count")

    n_masked = int(mask.sum())
    probs = softmax(cache.logits)
    g = np.zeros_like(probs)
    g[mask] = probs[mask]
    g[mask, labels[mask]] -= 1.0
    g /= n_masked

    a_hat = cache.adjacency.to_scipy()
    grads: list[tuple[np.ndarray, np.ndarray]] = [None] * len(model.layers)
    for li in range(len(model.layers) - 1, -1, -1):
        grad_b = g.sum(axis=0)
        # z = A_hat (H_drop W) + b and A_hat is symmetric: dM = A_hat g
        dm = np.asarray(a_hat @ g)
        h_drop = cache.inputs[li]
        if sp.issparse(h_drop):
            grad_w = np.asarray((h_drop.T @ dm))
        else:
            grad_w = h_drop.T @ dm
        grads[li] = (grad_w, grad_b)
        if li == 0:
            break
        g_h = dm @ model.layers[li].weight.T
        mult = cache.dropout_mults[li]
        if mult is not None:
            g_h = g_h * mult
        g = g_h * (cache.preacts[li - 1] > 0.0)
    return grads


@dataclass
class AdamState:
    m: list[tuple[np.ndarray, np.ndarray]]
    v: list[tuple[np.ndarray, np.ndarray]]

    @classmethod
    def zeros_like(cls, model: GnnModel) -> "AdamState":
        m = [(np.zeros_like(l.weight), np.zeros_like(l.bias)) for l in model.layers]
        v = [(np.zeros_like(l.weight), np.zeros_like(l.bias)) for l in model.layers]
        return cls(m, v)


def adam_step(model: GnnModel, grads, opt_state: AdamState, lr: float,
              weight_decay, t: int,
              beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> None:
    """One Adam update in place; weight decay folds into the gradient first.

    ``weight_decay`` is a scalar applied to every layer, or a per-layer
    sequence.
    """
    if t < 1:
        raise ValueError("step count t starts at 1")
    if np.isscalar(weight_decay):
        wd = [float(weight_decay)] * len(model.layers)
    else:
        wd = list(weight_decay)
        if len(wd) != len(model.layers):
            raise ShapeMismatch("per-layer weight decay length != layer count")
    bc1 = 1.0 - beta1 ** t
    bc2 = 1.0 - beta2 ** t
    for li, (layer, (gw, gb)) in enumerate(zip(model.layers, grads)):
        for param, grad, m, v in (
            (layer.weight, gw, opt_state.m[li][0], opt_state.v[li][0]),
            (layer.bias, gb, opt_state.m[li][1], opt_state.v[li][1]),
        ):
            g = grad + wd[li] * param
            m *= beta1
            m += (1.0 - beta1) * g
            v *= beta2
            v += (1.0 - beta2) * g * g
            param -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)


def evaluate(model: GnnModel, graph, mask: np.ndarray) -> float:
    """Accuracy of argmax predictions on the masked nodes (no dropout).

    Ties go to the lowest class id.
    """
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise EmptyMask("evaluate over an empty mask")
    logits, _ = forward(model, graph, train_mode=False)
    pred = logits.argmax(axis=1)
    return float((pred[mask] == graph.labels[mask]).mean())


def train(model: GnnModel, view, graph, cfg: TrainConfig) -> tuple[GnnModel, TrainHistory]:
    """Full-batch supervised training with patience-based early stopping.

    Gradients come from ``view`` (the model's training data); per-epoch
    validation metrics, like every reported number, are measured on
    ``graph`` — the original, un-augmented graph the model will be
    evaluated on. The returned model carries the parameters of the best
    validation epoch.
    """
    labels = graph.labels
    train_mask, val_mask = graph.train_mask, graph.val_mask
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    model = model.copy()
    state = AdamState.zeros_like(model)
    wd = cfg.weight_decay_per_layer if cfg.weight_decay_per_layer is not None \
        else cfg.weight_decay

    hist = TrainHistory(budget=cfg.epochs)
    best_params = [l.copy() for l in model.layers]
    best_loss = np.inf
    best_acc = -np.inf
    best_epoch = 1
    since_loss = 0
    since_acc = 0

    for epoch in range(1, cfg.epochs + 1):
        logits, cache = forward(model, view, train_mode=True, rng=rng,
                                dropout_rate=cfg.dropout_rate)
        loss = masked_cross_entropy(logits, labels, train_mask)
        grads = backward(cache, labels, train_mask)
        adam_step(model, grads, state, cfg.lr, wd, epoch)

        eval_logits, _ = forward(model, graph, train_mode=False)
        val_loss = masked_cross_entropy(eval_logits, labels, val_mask)
        pred = eval_logits.argmax(axis=1)
        val_acc = float((pred[val_mask] == labels[val_mask]).mean())
        train_acc = float((pred[train_mask] == labels[train_mask]).mean())

        hist.train_loss.append(loss)
        hist.train_acc.append(train_acc)
        hist.val_loss.append(val_loss)
        hist.val_acc.append(val_acc)
        hist.stop_epoch = epoch

        improved_loss = val_loss < best_loss
        improved_acc = val_acc > best_acc
        if cfg.tolerance_metric == "loss":
            checkpoint = improved_loss
        elif cfg.tolerance_metric == "accuracy":
            checkpoint = improved_acc
        else:  # both: accuracy first, loss breaks ties
            checkpoint = improved_acc or (val_acc == best_acc and improved_loss)
        if checkpoint:
            best_params = [l.copy() for l in model.layers]
            best_epoch = epoch
        if improved_loss:
            best_loss = val_loss
        if improved_acc:
            best_acc = val_acc

        since_loss = 0 if improved_loss else since_loss + 1
        since_acc = 0 if improved_acc else since_acc + 1
        if cfg.tolerance_metric == "loss" and since_loss >= cfg.tolerance_num:
            break
        if cfg.tolerance_metric == "accuracy" and since_acc >= cfg.tolerance_num:
            break
        if cfg.tolerance_metric == "both" and \
                (since_loss >= cfg.tolerance_num or since_acc >= cfg.tolerance_num):
            break

    hist.best_epoch = best_epoch
    model.layers = best_params
    return model, hist
