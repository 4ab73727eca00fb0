"""Mini versions of the three experiment sweeps on Cora.

Strategy ablation, depth (over-smoothing), and few-shot label budgets, all
with 2 seeds and the stock config so the full picture appears in minutes.
The CLI runs the same sweeps at paper scale:

    akegnn ablate  --bundle data/cora --seeds 20 --out results/ablate
    akegnn depth   --bundle data/cora --seeds 5  --out results/depth
    akegnn fewshot --bundle data/cora --seeds 5  --out results/fewshot
"""

import os

os.environ.setdefault("AKE_THREADS", "0")

from akegnn import (  # noqa: E402
    ExperimentConfig,
    ablation_sweep,
    depth_sweep,
    fewshot_sweep,
    load_bundle,
)

g = load_bundle("data/cora")
cfg = ExperimentConfig(seeds=(0, 1))

print("=== exchange-strategy ablation (2 seeds) ===")
strategies = ["adaptive-output", "random-output", "pointwise", "self"]
for name, res in ablation_sweep(g, cfg, strategies).items():
    print(f"  {name:16s} {100 * res.mean:.2f}%")

print("\n=== depth sweep: plain GCN vs exchange pipeline (2 seeds) ===")
for depth, backbone, ake in depth_sweep(g, cfg, [2, 4, 6]):
    print(f"  depth {depth}: backbone {100 * backbone.mean:5.1f}%   "
          f"exchange {100 * ake.mean:5.1f}%")

print("\n=== few-shot sweep: labeled nodes per class (2 seeds) ===")
for budget, backbone, ake in fewshot_sweep(g, cfg, [5, 20]):
    print(f"  {budget:2d} per class: backbone {100 * backbone.mean:5.1f}%   "
          f"exchange {100 * ake.mean:5.1f}%")
