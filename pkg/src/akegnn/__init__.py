"""Multi-view GCN training with entropy-guided channel exchange."""

from .augment import (
    AugmentSpec,
    GraphView,
    corrupt_features,
    drop_edges,
    extract_subgraph,
    generate_views,
    mask_features,
)
from .bundles import load_bundle, save_bundle
from .exchange import (
    EntropyConfig,
    ExchangeConfig,
    ExchangeEvent,
    ExchangeStrategy,
    exchange_layer,
    matrix_entropy,
    most_correlated_pair,
    run_schedule,
    select_exchange,
    swap_channels,
)
from .graph import Graph, NormalizedAdjacency, build_graph, normalize_adjacency, spmm
from .nn import (
    GnnModel,
    LayerParams,
    ModelSpec,
    TrainConfig,
    TrainHistory,
    adam_step,
    backward,
    evaluate,
    forward,
    init_model,
    masked_cross_entropy,
    train,
)
from .pipeline import (
    ExperimentConfig,
    ExperimentResult,
    ablation_sweep,
    depth_sweep,
    fewshot_sweep,
    run_ake,
    run_backbone,
    run_ensemble,
    run_ft,
)
from .results import ResultsRow, read_results, write_results

__version__ = "0.1.0"

__all__ = [
    "AugmentSpec", "GraphView", "corrupt_features", "drop_edges",
    "extract_subgraph", "generate_views", "mask_features",
    "load_bundle", "save_bundle",
    "EntropyConfig", "ExchangeConfig", "ExchangeEvent", "ExchangeStrategy",
    "exchange_layer", "matrix_entropy", "most_correlated_pair",
    "run_schedule", "select_exchange", "swap_channels",
    "Graph", "NormalizedAdjacency", "build_graph", "normalize_adjacency",
    "spmm",
    "GnnModel", "LayerParams", "ModelSpec", "TrainConfig", "TrainHistory",
    "adam_step", "backward", "evaluate", "forward", "init_model",
    "masked_cross_entropy", "train",
    "ExperimentConfig", "ExperimentResult", "ablation_sweep", "depth_sweep",
    "fewshot_sweep", "run_ake", "run_backbone", "run_ensemble", "run_ft",
    "ResultsRow", "read_results", "write_results",
]
