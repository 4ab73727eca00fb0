"""Command-line entry points.

Subcommands: train, ake, ablate, depth, fewshot, baselines. Every command
loads a graph bundle, builds an experiment config (JSON file mirroring
ExperimentConfig; every field optional, defaults reproduce the stock Cora
GCN setting), dispatches to the pipeline, and writes a results CSV plus an
exchange trace where applicable. AKE_THREADS caps per-seed worker processes
(0 = one per CPU).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

from .augment import AugmentSpec
from .bundles import load_bundle
from .errors import AkeGnnError, UsageError
from .exchange import EntropyConfig, ExchangeConfig, ExchangeStrategy, write_trace
from .nn import TrainConfig
from .pipeline import (
    ExperimentConfig,
    ablation_sweep,
    depth_sweep,
    fewshot_sweep,
    run_ake,
    run_backbone,
    run_ensemble,
    run_ft,
)
from .results import result_rows, write_results

ALL_STRATEGIES = [s.value for s in ExchangeStrategy]


def config_from_dict(raw: dict) -> ExperimentConfig:
    """Build an ExperimentConfig from a JSON-style dict; absent keys keep
    their documented defaults."""
    known = {"hidden_sizes", "dropout", "train", "augment", "exchange",
             "num_views", "seeds", "method"}
    unknown = set(raw) - known
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")

    train_raw = dict(raw.get("train", {}))
    augment_raw = dict(raw.get("augment", {}))
    exchange_raw = dict(raw.get("exchange", {}))

    try:
        train_cfg = TrainConfig(**train_raw)
        augment_cfg = AugmentSpec(**augment_raw)
        if "strategy" in exchange_raw:
            exchange_raw["strategy"] = ExchangeStrategy(exchange_raw["strategy"])
        if "num_bins" in exchange_raw:
            exchange_raw["entropy"] = EntropyConfig(exchange_raw.pop("num_bins"))
        if "layers" in exchange_raw and exchange_raw["layers"] is not None:
            exchange_raw["layers"] = tuple(exchange_raw["layers"])
        exchange_cfg = ExchangeConfig(**exchange_raw)
        return ExperimentConfig(
            hidden_sizes=tuple(raw.get("hidden_sizes", (16,))),
            dropout=float(raw.get("dropout", 0.5)),
            train=train_cfg,
            augment=augment_cfg,
            exchange=exchange_cfg,
            num_views=int(raw.get("num_views", 4)),
            seeds=tuple(raw.get("seeds", range(10))),
            method=str(raw.get("method", "ake")),
        )
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad config: {exc}") from None


def _load_config(path: str | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path}:{exc.lineno}: {exc.msg}") from None
    return config_from_dict(raw)


def _parse_seeds(text: str | None):
    if text is None:
        return None
    if "," in text:
        return tuple(int(t) for t in text.split(",") if t)
    return tuple(range(int(text)))


def _int_list(text: str):
    return [int(t) for t in text.split(",") if t]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="akegnn",
        description="Multi-view GCN training with entropy-guided channel exchange")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--bundle", required=True, help="graph bundle directory")
        p.add_argument("--config", default=None, help="experiment config JSON")
        p.add_argument("--seeds", default=None,
                       help="seed count (N -> 0..N-1) or comma list")
        p.add_argument("--out", default="results",
                       help="output directory (default: results)")

    p = sub.add_parser("train", help="train the plain backbone")
    common(p)
    p = sub.add_parser("ake", help="run the adaptive-exchange pipeline")
    common(p)
    p = sub.add_parser("ablate", help="compare exchange strategies")
    common(p)
    p.add_argument("--strategies", default=",".join(ALL_STRATEGIES),
                   help=f"comma list from: {', '.join(ALL_STRATEGIES)}")
    p = sub.add_parser("depth", help="backbone vs exchange at growing depth")
    common(p)
    p.add_argument("--depths", default="2,4,6,8,10", help="comma list of depths")
    p = sub.add_parser("fewshot", help="backbone vs exchange on small label budgets")
    common(p)
    p.add_argument("--labels-per-class", default="1,5,10,20,50",
                   help="comma list of labeled-node budgets per class")
    p = sub.add_parser("baselines", help="backbone, FT, ensemble, ensemble+FT")
    common(p)
    return parser


def run_cli(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        cfg = _load_config(args.config)
        seeds = _parse_seeds(args.seeds)
        if seeds is not None:
            cfg = replace(cfg, seeds=seeds)
        graph = load_bundle(args.bundle)
        with open(os.path.join(args.bundle, "meta.json"), encoding="utf-8") as fh:
            dataset = json.load(fh)["name"]
        os.makedirs(args.out, exist_ok=True)

        rows = []
        traces = []
        if args.command == "train":
            rows += result_rows(run_backbone(graph, cfg), dataset)
        elif args.command == "ake":
            res = run_ake(graph, cfg)
            rows += result_rows(res, dataset)
            traces = res.exchange_traces
        elif args.command == "ablate":
            strategies = [s for s in args.strategies.split(",") if s]
            try:
                strategies = [ExchangeStrategy(s) for s in strategies]
            except ValueError as exc:
                raise UsageError(str(exc)) from None
            for name, res in ablation_sweep(graph, cfg, strategies).items():
                rows += result_rows(res, dataset)
                traces.extend(res.exchange_traces)
        elif args.command == "depth":
            for depth, backbone, ake in depth_sweep(graph, cfg,
                                                    _int_list(args.depths)):
                rows += result_rows(backbone, dataset, depth=depth)
                rows += result_rows(ake, dataset, depth=depth)
                traces.extend(ake.exchange_traces)
        elif args.command == "fewshot":
            budgets = _int_list(args.labels_per_class)
            for budget, backbone, ake in fewshot_sweep(graph, cfg, budgets):
                rows += result_rows(backbone, dataset, labels_per_class=budget)
                rows += result_rows(ake, dataset, labels_per_class=budget)
                traces.extend(ake.exchange_traces)
        elif args.command == "baselines":
            rows += result_rows(run_backbone(graph, cfg), dataset)
            rows += result_rows(run_ft(graph, cfg), dataset)
            rows += result_rows(run_ensemble(graph, cfg), dataset)
            rows += result_rows(run_ensemble(graph, cfg, further_train=True),
                                dataset)

        csv_path = os.path.join(args.out, "results.csv")
        write_results(rows, csv_path)
        if traces:
            write_trace([ev for per_seed in traces for ev in per_seed],
                        os.path.join(args.out, "exchange_trace.jsonl"))
        for line in summarize(rows):
            print(line)
        print(f"wrote {csv_path} ({len(rows)} rows)")
        return 0
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except AkeGnnError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def summarize(rows) -> list[str]:
    import numpy as np
    seen = []
    for row in rows:
        key = (row.method, row.strategy, row.depth, row.labels_per_class)
        if key not in seen:
            seen.append(key)
    lines = []
    for method, strategy, depth, budget in seen:
        accs = [r.test_accuracy for r in rows
                if (r.method, r.strategy, r.depth, r.labels_per_class)
                == (method, strategy, depth, budget)]
        tag = strategy or method
        extras = "".join(
            [f" depth={depth}" if depth is not None else "",
             f" budget={budget}" if budget is not None else ""])
        lines.append(f"{tag}{extras}: {100 * float(np.mean(accs)):.2f}"
                     f" +/- {100 * float(np.std(accs)):.2f}"
                     f" (n={len(accs)})")
    return lines


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
