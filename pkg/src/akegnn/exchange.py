"""Entropy-guided channel exchange between trained models.

A weight matrix's information content is measured as the Shannon entropy of
its value histogram over B equal-width bins. The adaptive strategy finds the
most Pearson-correlated pair of output channels in the target layer (the
redundant pair), then substitutes whichever of the two, by whichever source
channel, maximizes the target matrix's entropy; source and target swap those
channels. Eight ablation strategies (random / in-order / input-axis /
pointwise / random-init partner / self) move the same number of scalars so
comparisons stay budget-matched.
"""

from __future__ import annotations

import enum
import json
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyMatrix,
    IndexOutOfRange,
    MTooLarge,
    ShapeMismatch,
    SpecMismatch,
    TooFewChannels,
)
from .nn import GnnModel, LayerParams, init_model


@dataclass(frozen=True)
class EntropyConfig:
    num_bins: int = 30

    def __post_init__(self):
        if self.num_bins < 2:
            raise ValueError("need at least 2 bins")


class ExchangeStrategy(enum.Enum):
    ADAPTIVE_OUTPUT = "adaptive-output"
    RANDOM_OUTPUT = "random-output"
    IN_ORDER_OUTPUT = "in-order-output"
    ADAPTIVE_INPUT = "adaptive-input"
    RANDOM_INPUT = "random-input"
    IN_ORDER_INPUT = "in-order-input"
    POINTWISE_RANDOM = "pointwise"
    RANDOM_INIT_PARTNER = "random-init"
    SELF_EXCHANGE = "self"

    @property
    def axis(self) -> str:
        return "input" if self.value.endswith("input") else "output"


@dataclass(frozen=True)
class ExchangeConfig:
    iterations: int = 3          # N
    channels_per_layer: int = 5  # M
    strategy: ExchangeStrategy = ExchangeStrategy.ADAPTIVE_OUTPUT
    entropy: EntropyConfig = field(default_factory=EntropyConfig)
    layers: tuple[int, ...] | None = None  # None = every layer

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations N must be >= 1")
        if self.channels_per_layer < 1:
            raise ValueError("channels per layer M must be >= 1")


@dataclass
class ExchangeEvent:
    iteration: int
    layer: int
    strategy: str
    source_model: int | None = None
    target_model: int | None = None
    source_channel: int | None = None
    redundant_pair: tuple[int, int] | None = None
    chosen: int | None = None
    entropy_before: float = 0.0
    entropy_after: float = 0.0
    pair_correlation: float | None = None

    def to_json(self) -> str:
        d = {k: (list(v) if isinstance(v, tuple) else v)
             for k, v in self.__dict__.items()}
        return json.dumps(d, sort_keys=True)


def matrix_entropy(w: np.ndarray, cfg: EntropyConfig = EntropyConfig()) -> float:
    """Histogram entropy of a weight matrix over equal-width bins.

    The range [min, max] splits into num_bins bins; the maximum lands in the
    last bin. A constant matrix has zero entropy. Result is in [0, ln B].
    """
    w = np.asarray(w, dtype=np.float64)
    if w.size == 0:
        raise EmptyMatrix("entropy of an empty matrix")
    lo = w.min()
    hi = w.max()
    if lo == hi:
        return 0.0
    b = cfg.num_bins
    idx = np.floor((w.ravel() - lo) * (b / (hi - lo))).astype(np.int64)
    np.clip(idx, 0, b - 1, out=idx)
    counts = np.bincount(idx, minlength=b)
    p = counts[counts > 0] / w.size
    return float(-(p * np.log(p)).sum())


def _channels(w: np.ndarray, axis: str) -> np.ndarray:
    """Channels as rows of the returned matrix: columns of w for the output
    axis, rows of w for the input axis."""
    if axis == "output":
        return w.T
    if axis == "input":
        return w
    raise ValueError(f"unknown axis {axis!r}")


def most_correlated_pair(w: np.ndarray, axis: str = "output") -> tuple[int, int, float]:
    """Find the channel pair with the highest (signed) Pearson correlation.

    Zero-variance channels correlate 0 with everything; ties break to the
    lexicographically smallest index pair.
    """
    chans = _channels(np.asarray(w, dtype=np.float64), axis)
    k = chans.shape[0]
    if k < 2:
        raise TooFewChannels(f"{k} channels along {axis} axis")
    centered = chans - chans.mean(axis=1, keepdims=True)
    norms = np.sqrt((centered * centered).sum(axis=1))
    safe = np.where(norms > 0.0, norms, 1.0)
    unit = centered / safe[:, None]
    corr = unit @ unit.T
    corr[norms == 0.0, :] = 0.0
    corr[:, norms == 0.0] = 0.0

    iu, ju = np.triu_indices(k, k=1)
    flat = corr[iu, ju]
    best = int(np.argmax(flat))  # first max = lexicographically smallest pair
    return int(iu[best]), int(ju[best]), float(flat[best])


def select_exchange(source_layer: LayerParams, target_layer: LayerParams,
                    idx1: int, idx2: int,
                    cfg: EntropyConfig = EntropyConfig(),
                    axis: str = "output") -> tuple[int, int]:
    """Pick (source channel i, redundant channel r) maximizing post-swap entropy.

    Tries every source channel i against both redundant candidates
    r in {idx1, idx2}, scoring the target weight matrix with channel r
    replaced by source channel i. Ties break to smallest i, then smallest r.
    """
    ws, wt = source_layer.weight, target_layer.weight
    if ws.shape != wt.shape:
        raise ShapeMismatch(f"source {ws.shape} vs target {wt.shape}")
    if idx1 == idx2:
        raise ValueError("redundant candidates must differ")
    num_channels = _channels(wt, axis).shape[0]
    r_candidates = sorted((int(idx1), int(idx2)))
    best = (-np.inf, 0, 0)
    scratch = wt.copy()
    for i in range(num_channels):
        for r in r_candidates:
            if axis == "output":
                saved = scratch[:, r].copy()
                scratch[:, r] = ws[:, i]
                h = matrix_entropy(scratch, cfg)
                scratch[:, r] = saved
            else:
                saved = scratch[r, :].copy()
                scratch[r, :] = ws[i, :]
                h = matrix_entropy(scratch, cfg)
                scratch[r, :] = saved
            if h > best[0]:
                best = (h, i, r)
    return best[1], best[2]


def swap_channels(a: GnnModel, b: GnnModel, layer: int, chan_a: int,
                  chan_b: int, axis: str = "output") -> None:
    """Exchange one channel between two models' matching layers, in place.

    Output-axis swaps move a weight column together with its bias entry;
    input-axis swaps move weight rows only.
    """
    la, lb = a.layers[layer], b.layers[layer]
    if la.weight.shape != lb.weight.shape:
        raise ShapeMismatch("layer shapes differ between models")
    k = la.weight.shape[1] if axis == "output" else la.weight.shape[0]
    if not (0 <= chan_a < k and 0 <= chan_b < k):
        raise IndexOutOfRange(f"channel out of range for axis {axis} (k={k})")
    if axis == "output":
        tmp = la.weight[:, chan_a].copy()
        la.weight[:, chan_a] = lb.weight[:, chan_b]
        lb.weight[:, chan_b] = tmp
        tmp_b = la.bias[chan_a]
        la.bias[chan_a] = lb.bias[chan_b]
        lb.bias[chan_b] = tmp_b
    else:
        tmp = la.weight[chan_a, :].copy()
        la.weight[chan_a, :] = lb.weight[chan_b, :]
        lb.weight[chan_b, :] = tmp


def _swap_scalars(a: LayerParams, b: LayerParams, flat_positions: np.ndarray) -> None:
    fa = a.weight.ravel()
    fb = b.weight.ravel()
    tmp = fa[flat_positions].copy()
    fa[flat_positions] = fb[flat_positions]
    fb[flat_positions] = tmp


def exchange_layer(source: GnnModel, target: GnnModel, layer: int,
                   cfg: ExchangeConfig, rng: np.random.Generator,
                   iteration: int = 0,
                   source_id: int | None = None,
                   target_id: int | None = None) -> list[ExchangeEvent]:
    """Run M exchange steps on one layer under the configured strategy."""
    if source.spec != target.spec:
        raise SpecMismatch("models have different architectures")
    strat = cfg.strategy
    m_steps = cfg.channels_per_layer
    wt = target.layers[layer].weight
    c_in, c_out = wt.shape
    axis = strat.axis
    num_channels = c_out if axis == "output" else c_in

    if strat in (ExchangeStrategy.IN_ORDER_OUTPUT, ExchangeStrategy.IN_ORDER_INPUT) \
            and m_steps > num_channels:
        raise MTooLarge(f"M={m_steps} exceeds {num_channels} {axis} channels")
    if strat is ExchangeStrategy.POINTWISE_RANDOM and m_steps * c_in > wt.size:
        raise MTooLarge(f"M={m_steps} moves more scalars than the layer holds")

    partner = source
    if strat is ExchangeStrategy.RANDOM_INIT_PARTNER:
        partner = init_model(source.spec, int(rng.integers(2**63)))

    pointwise_chunks = None
    if strat is ExchangeStrategy.POINTWISE_RANDOM:
        # M * C_in distinct scalar positions, matching the parameter count
        # moved by M output-channel swaps
        flat = rng.choice(wt.size, size=m_steps * c_in, replace=False)
        pointwise_chunks = np.sort(flat.reshape(m_steps, c_in), axis=1)

    events: list[ExchangeEvent] = []
    for m in range(m_steps):
        ev = ExchangeEvent(iteration=iteration, layer=layer, strategy=strat.value,
                           source_model=source_id, target_model=target_id,
                           entropy_before=matrix_entropy(wt, cfg.entropy))
        if strat in (ExchangeStrategy.ADAPTIVE_OUTPUT, ExchangeStrategy.ADAPTIVE_INPUT):
            idx1, idx2, corr = most_correlated_pair(wt, axis)
            i, r = select_exchange(partner.layers[layer], target.layers[layer],
                                   idx1, idx2, cfg.entropy, axis)
            swap_channels(partner, target, layer, i, r, axis)
            ev.source_channel, ev.chosen = i, r
            ev.redundant_pair, ev.pair_correlation = (idx1, idx2), corr
        elif strat in (ExchangeStrategy.RANDOM_OUTPUT, ExchangeStrategy.RANDOM_INPUT,
                       ExchangeStrategy.RANDOM_INIT_PARTNER):
            i = int(rng.integers(num_channels))
            r = int(rng.integers(num_channels))
            swap_channels(partner, target, layer, i, r, axis)
            ev.source_channel, ev.chosen = i, r
        elif strat in (ExchangeStrategy.IN_ORDER_OUTPUT, ExchangeStrategy.IN_ORDER_INPUT):
            swap_channels(partner, target, layer, m, m, axis)
            ev.source_channel, ev.chosen = m, m
        elif strat is ExchangeStrategy.POINTWISE_RANDOM:
            _swap_scalars(partner.layers[layer], target.layers[layer],
                          pointwise_chunks[m])
        elif strat is ExchangeStrategy.SELF_EXCHANGE:
            c1, c2 = rng.choice(num_channels, size=2, replace=False)
            swap_channels(target, target, layer, int(c1), int(c2), axis)
            ev.source_channel, ev.chosen = int(c1), int(c2)
        else:  # pragma: no cover
            raise ValueError(f"unhandled strategy {strat}")
        ev.entropy_after = matrix_entropy(wt, cfg.entropy)
        events.append(ev)
    return events


def run_schedule(models: list[GnnModel], cfg: ExchangeConfig,
                 rng: np.random.Generator) -> list[ExchangeEvent]:
    """Drive N exchange iterations over the ring of models.

    Iteration n (1-based) pairs source (n-1) mod K with target n mod K
    (0-based model indices) and exchanges every configured layer.
    """
    k = len(models)
    if k < 2:
        raise SpecMismatch("need at least two models to exchange")
    spec = models[0].spec
    if any(m.spec != spec for m in models):
        raise SpecMismatch("models do not share one architecture")
    layer_ids = cfg.layers if cfg.layers is not None \
        else tuple(range(spec.num_layers))
    events: list[ExchangeEvent] = []
    for n in range(1, cfg.iterations + 1):
        s = (n - 1) % k
        t = n % k
        for layer in layer_ids:
            events.extend(exchange_layer(
                models[s], models[t], layer, cfg, rng,
                iteration=n, source_id=s, target_id=t))
    return events


def write_trace(events: list[ExchangeEvent], path) -> None:
    """Serialize events as line-delimited JSON."""
    with open(path, "w", encoding="utf-8") as fh:
        for ev in events:
            fh.write(ev.to_json() + "\n")


# --- empirical entropy helpers used by the redundancy analysis -------------

def empirical_entropy(xs) -> float:
    """Entropy of the exact-value empirical distribution of a sample."""
    counts = np.array(sorted(Counter(np.asarray(xs).tolist()).values()),
                      dtype=np.float64)
    p = counts / counts.sum()
    return float(-(p * np.log(p)).sum())


def empirical_joint_entropy(xs, ys) -> float:
    """Entropy of the exact-value empirical distribution of paired samples."""
    xs = np.asarray(xs).tolist()
    ys = np.asarray(ys).tolist()
    if len(xs) != len(ys):
        raise ShapeMismatch("paired samples differ in length")
    counts = np.array(sorted(Counter(zip(xs, ys)).values()), dtype=np.float64)
    p = counts / counts.sum()
    return float(-(p * np.log(p)).sum())
