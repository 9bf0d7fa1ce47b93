"""Rank features by how well they separate classes, then prune the weak ones."""
import numpy as np

from gestlex import FeatureDataset, filter_features, fsw, fsw_all

# Two classes, one feature: tight clouds far apart give a small FSW.
tiny = FeatureDataset(["p", "q"], [[[1.0], [2.0], [3.0]], [[5.0], [6.0], [7.0]]])
print("hand instance FSW:", fsw(tiny, 0))          # 0.125

# Three features of decreasing usefulness.
rng = np.random.default_rng(0)
classes = {"x": 0.0, "y": 4.0, "z": 8.0}
points = []
for mu in classes.values():
    good = rng.normal(mu, 1.0, 40)
    fair = rng.normal(mu / 4, 1.0, 40)
    noise = rng.normal(0.0, 1.0, 40)             # same for every class
    points.append(np.c_[good, fair, noise])
ds = FeatureDataset(list(classes), points, ["good", "fair", "noise"])

for name, v in zip(ds.feature_names, fsw_all(ds)):
    print(f"  {name:6s} FSW = {v:.4f}")

# Keep the two strongest; feature_index maps back to the original columns.
kept = filter_features(ds, top_k=2)
print("kept:", kept.feature_names, "original columns", kept.feature_index)

# Or keep everything under a threshold.
print("FSW <= 1:", filter_features(ds, threshold=1.0).feature_names)
