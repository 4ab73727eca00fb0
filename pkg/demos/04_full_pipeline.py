"""The whole experiment pipeline on Cora, small seed count.

Compares the plain backbone against further training, voting ensembles, and
the adaptive-exchange pipeline. Five seeds keep this to a couple of minutes;
the acceptance suite runs the full protocol.
"""

import os

os.environ.setdefault("AKE_THREADS", "0")  # use every core

from akegnn import (  # noqa: E402
    ExperimentConfig,
    load_bundle,
    run_ake,
    run_backbone,
    run_ensemble,
    run_ft,
)

g = load_bundle("data/cora")
cfg = ExperimentConfig(seeds=tuple(range(5)))
print(f"config fingerprint: {cfg.fingerprint()}")
print(f"{len(cfg.seeds)} seeds, {cfg.num_views} views, "
      f"N={cfg.exchange.iterations} M={cfg.exchange.channels_per_layer}\n")

rows = [
    ("backbone", run_backbone(g, cfg)),
    ("further training (best view)", run_ft(g, cfg)),
    ("ensemble", run_ensemble(g, cfg)),
    ("ensemble + further training", run_ensemble(g, cfg, further_train=True)),
    ("adaptive exchange", run_ake(g, cfg)),
]
print(f"{'method':30s} {'test acc':>10s} {'std':>6s} {'budget':>7s}")
for name, res in rows:
    print(f"{name:30s} {100 * res.mean:9.2f}% {100 * res.std:5.2f}% "
          f"{res.budget_per_model:5d}ep")

trace = rows[-1][1].exchange_traces[0]
print(f"\nfirst seed exchanged {len(trace)} channels; sample event:")
print("  " + trace[0].to_json())
