"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with worker processes and live output:

    AKE_THREADS=0 pytest tests/test_acceptance.py -v -s

The Cora experiments dominate the runtime (tens of minutes on two cores).
One criterion is known-red: test_ake_improvement measures the real margins
of the exchange pipeline against further training and the plain backbone,
which do not reach the required +0.3/+0.5 under this implementation's
training protocol.
"""

import json
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import (
    finite_difference_grads,
    max_relative_error,
    random_small_graph,
    select_oracle,
)
from akegnn import (
    EntropyConfig,
    ExchangeConfig,
    ExchangeStrategy,
    ExperimentConfig,
    LayerParams,
    ModelSpec,
    backward,
    forward,
    init_model,
    load_bundle,
    select_exchange,
)
from akegnn.exchange import (
    empirical_entropy,
    empirical_joint_entropy,
    exchange_layer,
)
from akegnn.pipeline import (
    ablation_sweep,
    depth_sweep,
    run_ake,
    run_backbone,
    run_ft,
)
from akegnn.results import read_results


@pytest.fixture(scope="module", autouse=True)
def _worker_pool():
    """Acceptance experiments use every core unless the caller chose."""
    had = os.environ.get("AKE_THREADS")
    if had is None:
        os.environ["AKE_THREADS"] = "0"
    yield
    if had is None:
        os.environ.pop("AKE_THREADS", None)

CORA = os.path.join(os.path.dirname(__file__), "..", "data", "cora")

CONSERVING = [
    ExchangeStrategy.ADAPTIVE_OUTPUT,
    ExchangeStrategy.RANDOM_OUTPUT,
    ExchangeStrategy.IN_ORDER_OUTPUT,
    ExchangeStrategy.ADAPTIVE_INPUT,
    ExchangeStrategy.RANDOM_INPUT,
    ExchangeStrategy.IN_ORDER_INPUT,
    ExchangeStrategy.POINTWISE_RANDOM,
]


def criterion(name: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="module")
def cora():
    return load_bundle(CORA)


@pytest.fixture(scope="module")
def backbone_result(cora):
    return run_backbone(cora, ExperimentConfig(seeds=tuple(range(10))))


def test_gradient_correctness():
    """Analytic gradients match central differences on 50 random models."""
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(2, 11))
        d = int(rng.integers(1, 7))
        g = random_small_graph(rng, n, d)
        depth = int(rng.integers(2, 4))
        hidden = [int(rng.integers(2, 6)) for _ in range(depth - 1)]
        spec = ModelSpec((d, *hidden, g.num_classes), dropout_rate=0.0)
        model = init_model(spec, int(rng.integers(1 << 30)))
        for layer in model.layers:
            # random biases keep pre-activations off the exact ReLU kink,
            # where central differences straddle the subgradient
            layer.bias += rng.normal(0.0, 0.1, size=layer.bias.shape)
        _, cache = forward(model, g, train_mode=True, dropout_rate=0.0)
        analytic = backward(cache, g.labels, g.train_mask)
        numeric = finite_difference_grads(model, g, g.train_mask)
        worst = max(worst, max_relative_error(analytic, numeric))
    elapsed = time.perf_counter() - t0
    criterion("gradient correctness",
              worst < 1e-4 and elapsed < 10.0,
              f"max rel err {worst:.2e} (< 1e-4), {elapsed:.1f}s (< 10s)")


def test_exchange_oracle():
    """select_exchange equals the brute-force enumerator on 200 instances."""
    rng = np.random.default_rng(7)
    t0 = time.perf_counter()
    mismatches = 0
    for _ in range(200):
        c_in = int(rng.integers(2, 9))
        c_out = int(rng.integers(2, 9))
        ws = rng.standard_normal((c_in, c_out))
        wt = rng.standard_normal((c_in, c_out))
        idx = rng.choice(c_out, size=2, replace=False)
        bins = int(rng.integers(2, 33))
        got = select_exchange(LayerParams(ws, np.zeros(c_out)),
                              LayerParams(wt, np.zeros(c_out)),
                              int(idx[0]), int(idx[1]), EntropyConfig(bins))
        want = select_oracle(ws, wt, int(idx[0]), int(idx[1]), bins)
        mismatches += got != want
    elapsed = time.perf_counter() - t0
    criterion("exchange oracle",
              mismatches == 0 and elapsed < 5.0,
              f"{mismatches}/200 mismatches, {elapsed:.1f}s (< 5s)")


def test_conservation():
    """Sorted parameter multiset is bitwise invariant under 100 sequences."""
    rng = np.random.default_rng(11)
    violations = 0
    for trial in range(100):
        strat = CONSERVING[trial % len(CONSERVING)]
        sizes = (int(rng.integers(2, 7)), int(rng.integers(3, 9)),
                 int(rng.integers(2, 6)))
        spec = ModelSpec(sizes, dropout_rate=0.0)
        a = init_model(spec, int(rng.integers(1 << 30)))
        b = init_model(spec, int(rng.integers(1 << 30)))
        before = np.sort(np.concatenate([a.all_parameters(),
                                         b.all_parameters()]))
        layer = int(rng.integers(0, 2))
        m = int(rng.integers(1, min(a.layers[layer].weight.shape) + 1))
        cfg = ExchangeConfig(iterations=1, channels_per_layer=m,
                             strategy=strat)
        exchange_layer(a, b, layer, cfg,
                       np.random.default_rng(int(rng.integers(1 << 30))))
        after = np.sort(np.concatenate([a.all_parameters(),
                                        b.all_parameters()]))
        violations += not np.array_equal(before, after)
    criterion("conservation", violations == 0,
              f"{violations}/100 sequences changed the parameter multiset")


def test_entropy_propositions():
    """Sample-level joint-entropy identities on 100 discrete instances each."""
    rng = np.random.default_rng(13)
    worst_gap = 0.0
    for _ in range(100):
        n = int(rng.integers(5, 80))
        x = rng.integers(-6, 7, size=n)
        y = rng.integers(-6, 7, size=n)
        a = int(rng.choice([-3, -2, -1, 1, 2, 3]))
        b = int(rng.choice([-3, -2, -1, 1, 2, 3]))
        z = a * x + b * y
        hxy = empirical_joint_entropy(x, y)
        worst_gap = max(worst_gap,
                        abs(empirical_joint_entropy(x, z) - hxy),
                        abs(empirical_joint_entropy(y, z) - hxy))
    prop1 = worst_gap < 1e-12

    failures = 0
    for _ in range(100):
        n = int(rng.integers(4, 60))
        x = rng.integers(0, 5, size=n)
        y = rng.integers(0, 5, size=n)
        x[0] = x[1] = 0
        y[0], y[1] = 1, 2  # y is provably not a function of x
        failures += not (empirical_joint_entropy(x, y) > empirical_entropy(x))
    prop2 = failures == 0
    criterion("entropy propositions", prop1 and prop2,
              f"linear-combination gap {worst_gap:.2e} (< 1e-12); "
              f"{failures}/100 strictness failures")


def test_cora_baseline(backbone_result):
    """Stock two-layer GCN lands in [80, 83] mean test accuracy, 10 seeds."""
    mean = 100 * backbone_result.mean
    criterion("cora gcn baseline", 80.0 <= mean <= 83.0,
              f"mean {mean:.2f} +/- {100 * backbone_result.std:.2f} over "
              f"{len(backbone_result.seeds)} seeds (window [80, 83])")


def test_ake_improvement(cora, backbone_result):
    """Exchange pipeline vs matched-budget FT (+0.3) and backbone (+0.5).

    Known-red: the measured margins fall short under this implementation's
    training protocol; see the project notes for the full analysis.
    """
    cfg = ExperimentConfig(seeds=tuple(range(10)))
    ft = run_ft(cora, cfg)
    ake = run_ake(cora, cfg)
    d_ft = 100 * (ake.mean - ft.mean)
    d_bb = 100 * (ake.mean - backbone_result.mean)
    criterion("ake improvement",
              d_ft >= 0.3 and d_bb >= 0.5,
              f"ake {100 * ake.mean:.2f} vs ft {100 * ft.mean:.2f} "
              f"(margin {d_ft:+.2f}, need >= +0.30) and backbone "
              f"{100 * backbone_result.mean:.2f} (margin {d_bb:+.2f}, "
              f"need >= +0.50)")


def test_ablation_ordering(cora):
    """Adaptive output-channel exchange ranks first among nine strategies.

    One competitor may edge it by < 0.2 points; pointwise, random-init, and
    self exchange must be strictly beaten.
    """
    cfg = ExperimentConfig(seeds=tuple(range(20)))
    results = ablation_sweep(cora, cfg, list(ExchangeStrategy))
    means = {name: 100 * res.mean for name, res in results.items()}
    adaptive = means["adaptive-output"]
    above = {name: m for name, m in means.items()
             if name != "adaptive-output" and m > adaptive}
    slip_ok = (not above) or (len(above) == 1
                              and max(above.values()) - adaptive < 0.2)
    must_beat = {"pointwise", "random-init", "self"}
    strict_ok = all(adaptive > means[name] for name in must_beat)
    ranking = ", ".join(f"{k}={v:.2f}"
                        for k, v in sorted(means.items(), key=lambda kv: -kv[1]))
    criterion("ablation ordering", slip_ok and strict_ok, ranking)


def test_over_smoothing(cora):
    """Depth sweep: the plain GCN collapses by >= 15 points at depth 8; the
    exchange pipeline matches or beats it at every depth >= 4."""
    cfg = ExperimentConfig(seeds=tuple(range(5)))
    sweep = depth_sweep(cora, cfg, [2, 4, 6, 8, 10])
    by_depth = {d: (100 * bb.mean, 100 * ake.mean) for d, bb, ake in sweep}
    collapse = by_depth[2][0] - by_depth[8][0]
    dominated = [d for d in (4, 6, 8, 10) if by_depth[d][1] < by_depth[d][0]]
    detail = ("; ".join(f"d{d}: gcn {bb:.1f} ake {ake:.1f}"
                        for d, (bb, ake) in sorted(by_depth.items()))
              + f"; collapse {collapse:.1f} (>= 15)")
    criterion("over-smoothing", collapse >= 15.0 and not dominated, detail)


def test_determinism(tmp_path):
    """Repeated CLI runs with the same seeds emit identical CSVs
    (wall_ms excluded)."""
    from akegnn.cli import run_cli
    cfg = {"train": {"epochs": 30, "tolerance_num": 30},
           "exchange": {"iterations": 2, "channels_per_layer": 2}}
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    snapshots = []
    for name in ("first", "second"):
        out = tmp_path / name
        code = run_cli(["ake", "--bundle", CORA, "--config", str(cfg_path),
                        "--seeds", "3", "--out", str(out)])
        assert code == 0
        rows = read_results(str(out / "results.csv"))
        snapshots.append([
            {k: v for k, v in row.__dict__.items() if k != "wall_ms"}
            for row in rows
        ])
    criterion("determinism", snapshots[0] == snapshots[1],
              f"{len(snapshots[0])} rows compared across two runs")


def test_conversion_fidelity(tmp_path, cora):
    """[SECONDARY] Converter reproduces the published dataset statistics and
    its bundles load through the primary."""
    raw = os.path.join(os.path.dirname(__file__), "..", "dataset-tools",
                       "rawdata")
    if not os.path.isdir(raw):
        pytest.skip("dataset-tools raw files not present")
    expected = {
        "cora": dict(num_nodes=2708, num_edges=5278, num_features=1433,
                     num_classes=7, train_size=140, val_size=500,
                     test_size=1000),
        "citeseer": dict(num_nodes=3327, num_edges=4676, num_features=3703,
                         num_classes=6),
    }
    problems = []
    for dataset, want in expected.items():
        out = tmp_path / dataset
        convert = subprocess.run(
            [sys.executable, "-m", "planetoid_bundler.cli", "convert",
             "--dataset", dataset, "--raw", raw, "--out", str(out)],
            capture_output=True, text=True)
        if convert.returncode != 0:
            problems.append(f"{dataset}: convert failed: {convert.stderr}")
            continue
        report = json.loads((out / "report.json").read_text())
        for key, value in want.items():
            if report[key] != value:
                problems.append(f"{dataset}: {key}={report[key]} != {value}")
        verify = subprocess.run(
            [sys.executable, "-m", "planetoid_bundler.cli", "verify",
             "--bundle", str(out)], capture_output=True, text=True)
        if verify.returncode != 0:
            problems.append(f"{dataset}: verify failed: {verify.stderr}")
        g = load_bundle(str(out))
        if (g.num_nodes, g.num_features) != (want["num_nodes"],
                                             want["num_features"]):
            problems.append(f"{dataset}: load_bundle disagrees with report")
    criterion("conversion fidelity [secondary]", not problems,
              "; ".join(problems) or
              "cora 2708/5278/1433/7 splits 140/500/1000; "
              "citeseer 3327/4676/3703/6; verify + load_bundle ok")
