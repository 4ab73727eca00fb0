"""End-to-end experiment orchestration: the exchange method, its baselines,
and the ablation/depth/few-shot sweeps.

Every experiment maps a list of run seeds to per-seed test accuracies on the
un-augmented graph. One run seed deterministically derives every stream it
needs (view generation, model inits, dropout, exchange randomness), so any
experiment repeated with the same seed list reproduces bit-identical
accuracies. Budgets are matched the way the baselines are defined: the plain
backbone trains for one epoch budget; the exchange method, further-training,
and ensemble+FT all get two budgets per model (initial phase + retrain
phase, each with early stopping re-armed).
"""

from __future__ import annotations

import hashlib
import json
import os
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial

import numpy as np

from .augment import AugmentSpec, generate_views
from .errors import InsufficientLabeledNodes
from .exchange import (
    ExchangeConfig,
    ExchangeEvent,
    ExchangeStrategy,
    run_schedule,
)
from .graph import Graph
from .nn import (
    GnnModel,
    ModelSpec,
    TrainConfig,
    evaluate,
    forward,
    init_model,
    train,
)

METHOD_BACKBONE = "backbone"
METHOD_FT = "ft"
METHOD_ENSEMBLE = "ensemble"
METHOD_ENSEMBLE_FT = "ensemble-ft"
METHOD_AKE = "ake"


@dataclass(frozen=True)
class ExperimentConfig:
    hidden_sizes: tuple[int, ...] = (16,)
    dropout: float = 0.5
    train: TrainConfig = field(default_factory=TrainConfig)
    augment: AugmentSpec = field(default_factory=AugmentSpec)
    exchange: ExchangeConfig = field(default_factory=ExchangeConfig)
    num_views: int = 4
    seeds: tuple[int, ...] = tuple(range(10))
    method: str = METHOD_AKE

    def __post_init__(self):
        if self.num_views < 2:
            raise ValueError("multi-view methods need num_views >= 2")
        object.__setattr__(self, "hidden_sizes",
                           tuple(int(h) for h in self.hidden_sizes))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))

    def model_spec(self, graph: Graph) -> ModelSpec:
        sizes = (graph.num_features, *self.hidden_sizes, graph.num_classes)
        return ModelSpec(sizes, dropout_rate=self.dropout)

    def fingerprint(self) -> str:
        blob = json.dumps(_jsonable(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _jsonable(obj):
    if hasattr(obj, "__dict__") or hasattr(obj, "__dataclass_fields__"):
        fields = getattr(obj, "__dataclass_fields__", None)
        if fields is not None:
            return {k: _jsonable(getattr(obj, k)) for k in fields}
    if isinstance(obj, ExchangeStrategy):
        return obj.value
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer, np.floating)):
        return obj.item()
    return obj


@dataclass
class ExperimentResult:
    method: str
    strategy: str | None
    seeds: tuple[int, ...]
    test_accuracies: list[float]
    val_accuracies: list[float]
    epochs_used: list[int]
    budget_per_model: int
    wall_ms: float
    config_fingerprint: str
    exchange_traces: list[list[ExchangeEvent]] = field(default_factory=list)

    @property
    def mean(self) -> float:
        return float(np.mean(self.test_accuracies))

    @property
    def std(self) -> float:
        return float(np.std(self.test_accuracies))


def derive_seed(run_seed: int, role: str, *extra: int) -> int:
    """Stable 64-bit stream seed from (run seed, role tag, indices)."""
    parts = [int(run_seed) & (2**63 - 1), zlib.crc32(role.encode())]
    parts.extend(int(e) & (2**63 - 1) for e in extra)
    state = np.random.SeedSequence(parts).generate_state(2, np.uint32)
    return int(state.view(np.uint64)[0])


def _worker_count() -> int:
    raw = os.environ.get("AKE_THREADS", "1")
    try:
        k = int(raw)
    except ValueError:
        k = 1
    if k == 0:
        return os.cpu_count() or 1
    return max(1, k)


def _map_seeds(fn, seeds):
    """Apply fn to every seed, optionally across worker processes.

    Results always come back in seed order, so parallelism cannot change
    the outcome.
    """
    workers = _worker_count()
    if workers <= 1 or len(seeds) <= 1:
        return [fn(s) for s in seeds]
    with ProcessPoolExecutor(max_workers=min(workers, len(seeds))) as pool:
        return list(pool.map(fn, seeds))


def _train_cfg(cfg: ExperimentConfig, seed: int, model_idx: int,
               phase: int) -> TrainConfig:
    """Per-phase training config: same budget and early-stopping rules every
    phase (patience re-arms because each phase is a fresh trainer), distinct
    dropout stream."""
    return replace(cfg.train,
                   dropout_rate=cfg.dropout,
                   seed=derive_seed(seed, "train", model_idx, phase))


def _seed_views(graph: Graph, cfg: ExperimentConfig, seed: int):
    spec = replace(cfg.augment, seed=derive_seed(seed, "views"))
    return generate_views(graph, spec, cfg.num_views)


def _result(method, strategy, cfg, seeds, per_seed, budget, t0,
            traces=None) -> ExperimentResult:
    return ExperimentResult(
        method=method,
        strategy=strategy,
        seeds=tuple(seeds),
        test_accuracies=[r[0] for r in per_seed],
        val_accuracies=[r[1] for r in per_seed],
        epochs_used=[r[2] for r in per_seed],
        budget_per_model=budget,
        wall_ms=(time.perf_counter() - t0) * 1000.0,
        config_fingerprint=cfg.fingerprint(),
        exchange_traces=traces or [],
    )


# --- single-seed run bodies (top level so they pickle for worker pools) ----

def _backbone_one(graph, cfg, seed):
    model = init_model(cfg.model_spec(graph), derive_seed(seed, "init", 0))
    trained, hist = train(model, graph, graph, _train_cfg(cfg, seed, 0, 0))
    return (evaluate(trained, graph, graph.test_mask),
            evaluate(trained, graph, graph.val_mask),
            hist.stop_epoch)


def _ft_one(graph, cfg, seed):
    """Per-view accuracies for one seed: two training phases per view."""
    views = _seed_views(graph, cfg, seed)
    out = []
    for k, view in enumerate(views):
        model = init_model(cfg.model_spec(graph), derive_seed(seed, "init", k))
        model, h1 = train(model, view, graph, _train_cfg(cfg, seed, k, 0))
        model, h2 = train(model, view, graph, _train_cfg(cfg, seed, k, 1))
        out.append((evaluate(model, graph, graph.test_mask),
                    evaluate(model, graph, graph.val_mask),
                    h1.stop_epoch + h2.stop_epoch))
    return out


def majority_vote(predictions: np.ndarray, num_classes: int) -> np.ndarray:
    """Per-node majority over a (num_models, n) array of predicted classes.

    Ties fall to the lowest class id.
    """
    n = predictions.shape[1]
    votes = np.zeros((n, num_classes), dtype=np.int64)
    for pred in predictions:
        votes[np.arange(n), pred] += 1
    return votes.argmax(axis=1)


def _ensemble_one(graph, cfg, further_train, seed):
    views = _seed_views(graph, cfg, seed)
    preds = []
    epochs = 0
    for k, view in enumerate(views):
        model = init_model(cfg.model_spec(graph), derive_seed(seed, "init", k))
        model, h1 = train(model, view, graph, _train_cfg(cfg, seed, k, 0))
        epochs += h1.stop_epoch
        if further_train:
            model, h2 = train(model, view, graph, _train_cfg(cfg, seed, k, 1))
            epochs += h2.stop_epoch
        logits, _ = forward(model, graph, train_mode=False)
        preds.append(logits.argmax(axis=1))
    final = majority_vote(np.stack(preds), graph.num_classes)
    test = float((final[graph.test_mask] == graph.labels[graph.test_mask]).mean())
    val = float((final[graph.val_mask] == graph.labels[graph.val_mask]).mean())
    return (test, val, epochs)


def _ake_one(graph, cfg, seed):
    views = _seed_views(graph, cfg, seed)
    spec = cfg.model_spec(graph)

    models: list[GnnModel] = []
    epochs = [0] * len(views)
    for k, view in enumerate(views):
        model = init_model(spec, derive_seed(seed, "init", k))
        model, hist = train(model, view, graph, _train_cfg(cfg, seed, k, 0))
        epochs[k] = hist.stop_epoch
        models.append(model)

    rng = np.random.Generator(np.random.PCG64(derive_seed(seed, "exchange")))
    events = run_schedule(models, cfg.exchange, rng)

    # every model retrains with the initial budget; the first one — whose
    # prediction is reported — retrains on the original graph, the rest stay
    # on their views
    for k, view in enumerate(views):
        data = graph if k == 0 else view
        models[k], hist = train(models[k], data, graph,
                                _train_cfg(cfg, seed, k, 1))
        epochs[k] += hist.stop_epoch

    first = models[0]
    return (evaluate(first, graph, graph.test_mask),
            evaluate(first, graph, graph.val_mask),
            epochs[0], events)


# --- public experiment entry points ----------------------------------------

def run_backbone(graph: Graph, cfg: ExperimentConfig) -> ExperimentResult:
    """Single model trained on the original graph with the standard budget."""
    t0 = time.perf_counter()
    per_seed = _map_seeds(partial(_backbone_one, graph, cfg), cfg.seeds)
    return _result(METHOD_BACKBONE, None, cfg, cfg.seeds, per_seed,
                   cfg.train.epochs, t0)


def run_ft(graph: Graph, cfg: ExperimentConfig) -> ExperimentResult:
    """Further training: one doubled-budget model per view, best view reported.

    The winning view is the one with the highest mean test accuracy across
    seeds (ties to the lowest view index); its per-seed accuracies become
    the result.
    """
    t0 = time.perf_counter()
    per_seed_views = _map_seeds(partial(_ft_one, graph, cfg), cfg.seeds)
    by_view = list(zip(*per_seed_views))  # [view][seed] -> triple
    means = [float(np.mean([acc for acc, _, _ in rows])) for rows in by_view]
    best = int(np.argmax(means))
    return _result(METHOD_FT, None, cfg, cfg.seeds, list(by_view[best]),
                   2 * cfg.train.epochs, t0)


def run_ensemble(graph: Graph, cfg: ExperimentConfig,
                 further_train: bool = False) -> ExperimentResult:
    """Majority vote over the per-view models' predicted classes."""
    t0 = time.perf_counter()
    per_seed = _map_seeds(partial(_ensemble_one, graph, cfg, further_train),
                          cfg.seeds)
    method = METHOD_ENSEMBLE_FT if further_train else METHOD_ENSEMBLE
    budget = (2 if further_train else 1) * cfg.train.epochs
    return _result(method, None, cfg, cfg.seeds, per_seed, budget, t0)


def run_ake(graph: Graph, cfg: ExperimentConfig) -> ExperimentResult:
    """The full two-phase pipeline: individual learning, channel exchange
    over the model ring, retraining, and evaluation of the first model."""
    t0 = time.perf_counter()
    outs = _map_seeds(partial(_ake_one, graph, cfg), cfg.seeds)
    per_seed = [(o[0], o[1], o[2]) for o in outs]
    traces = [o[3] for o in outs]
    return _result(METHOD_AKE, cfg.exchange.strategy.value, cfg, cfg.seeds,
                   per_seed, 2 * cfg.train.epochs, t0, traces)


def run_method(graph: Graph, cfg: ExperimentConfig) -> ExperimentResult:
    dispatch = {
        METHOD_BACKBONE: run_backbone,
        METHOD_FT: run_ft,
        METHOD_ENSEMBLE: run_ensemble,
        METHOD_ENSEMBLE_FT: lambda g, c: run_ensemble(g, c, further_train=True),
        METHOD_AKE: run_ake,
    }
    if cfg.method not in dispatch:
        raise ValueError(f"unknown method {cfg.method!r}")
    return dispatch[cfg.method](graph, cfg)


def ablation_sweep(graph: Graph, cfg: ExperimentConfig,
                   strategies) -> dict[str, ExperimentResult]:
    """Run the exchange pipeline once per strategy with shared seeds."""
    if not strategies:
        raise ValueError("need at least one strategy")
    out: dict[str, ExperimentResult] = {}
    for strat in strategies:
        strat = ExchangeStrategy(strat) if not isinstance(strat, ExchangeStrategy) \
            else strat
        sub = replace(cfg, exchange=replace(cfg.exchange, strategy=strat))
        out[strat.value] = run_ake(graph, sub)
    return out


def depth_sweep(graph: Graph, cfg: ExperimentConfig,
                depths) -> list[tuple[int, ExperimentResult, ExperimentResult]]:
    """Backbone vs exchange pipeline at increasing layer counts.

    Depth d means d propagation layers: hidden size is replicated d-1 times.
    """
    hidden = cfg.hidden_sizes[0]
    out = []
    for depth in depths:
        if depth < 2:
            raise ValueError("depth sweep starts at 2 layers")
        sub = replace(cfg, hidden_sizes=(hidden,) * (depth - 1))
        out.append((int(depth), run_backbone(graph, sub), run_ake(graph, sub)))
    return out


def resample_train_mask(graph: Graph, per_class: int,
                        rng: np.random.Generator) -> Graph:
    """Draw a fresh train split of per_class nodes per class from the pool
    of nodes outside val/test."""
    pool = ~(graph.val_mask | graph.test_mask)
    picked = []
    for c in range(graph.num_classes):
        candidates = np.where(pool & (graph.labels == c))[0]
        if candidates.size < per_class:
            raise InsufficientLabeledNodes(
                f"class {c} has {candidates.size} available nodes, "
                f"need {per_class}")
        picked.append(rng.choice(candidates, size=per_class, replace=False))
    return graph.with_train_indices(np.sort(np.concatenate(picked)))


def fewshot_sweep(graph: Graph, cfg: ExperimentConfig,
                  labels_per_class) -> list[tuple[int, ExperimentResult, ExperimentResult]]:
    """Backbone vs exchange pipeline as the labeled budget varies.

    For every budget and every seed the train mask is resampled from the
    non-val/test pool; val and test stay fixed.
    """
    out = []
    for budget in labels_per_class:
        if budget < 1:
            raise ValueError("labels per class must be >= 1")
        t0 = time.perf_counter()
        backbone_rows, ake_rows, ake_traces = [], [], []
        for seed in cfg.seeds:
            rng = np.random.Generator(np.random.PCG64(
                derive_seed(seed, "fewshot", budget)))
            g = resample_train_mask(graph, int(budget), rng)
            backbone_rows.append(_backbone_one(g, cfg, seed))
            t, v, e, tr = _ake_one(g, cfg, seed)
            ake_rows.append((t, v, e))
            ake_traces.append(tr)
        out.append((
            int(budget),
            _result(METHOD_BACKBONE, None, cfg, cfg.seeds, backbone_rows,
                    cfg.train.epochs, t0),
            _result(METHOD_AKE, cfg.exchange.strategy.value, cfg, cfg.seeds,
                    ake_rows, 2 * cfg.train.epochs, t0, ake_traces),
        ))
    return out
