"""Train the two-layer GCN on the bundled Cora graph.

Uses the stock recipe: hidden 16, dropout 0.5, Adam at lr 0.01 with weight
decay 5e-4, up to 200 epochs with patience-10 early stopping on validation
loss, parameters restored from the best validation epoch.
"""

from akegnn import ExperimentConfig, evaluate, init_model, load_bundle, train
from akegnn.pipeline import derive_seed

g = load_bundle("data/cora")
print(f"cora: {g.num_nodes} nodes, {g.num_edges} edges, "
      f"{g.num_features} features, {g.num_classes} classes")
print(f"splits: {int(g.train_mask.sum())}/{int(g.val_mask.sum())}/"
      f"{int(g.test_mask.sum())} train/val/test\n")

cfg = ExperimentConfig()  # stock Cora settings
model = init_model(cfg.model_spec(g), seed=derive_seed(0, "init", 0))
trained, hist = train(model, g, g, cfg.train)

print(f"stopped after {hist.stop_epoch} epochs "
      f"(best validation epoch: {hist.best_epoch})")
for epoch in (1, 10, 25, 50, hist.best_epoch):
    if epoch <= hist.stop_epoch:
        print(f"  epoch {epoch:3d}: train loss {hist.train_loss[epoch-1]:.3f} "
              f"val acc {hist.val_acc[epoch-1]:.3f}")

print(f"\ntest accuracy:  {evaluate(trained, g, g.test_mask):.4f}")
print(f"val accuracy:   {evaluate(trained, g, g.val_mask):.4f}")
print(f"train accuracy: {evaluate(trained, g, g.train_mask):.4f}")
