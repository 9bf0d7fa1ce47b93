"""Fit class ellipsoids and measure their separation."""
import numpy as np

from gestlex import Ellipsoid, FeatureDataset, edrm_matrix, fit_ellipsoid, min_surface_distance

# Two unit spheres with centers 4 apart: surfaces 2 apart, ratio 0.5.
s = min_surface_distance(Ellipsoid.sphere([0, 0, 0]), Ellipsoid.sphere([4, 0, 0]))
print("spheres:", s.surface_distance, "EDRM", s.edrm, "closest points", s.x_a, s.x_b)

# A fitted ellipsoid follows the shape of its cloud.
rng = np.random.default_rng(1)
cloud = rng.multivariate_normal([0, 0], [[4.0, 1.5], [1.5, 1.0]], 300)
e = fit_ellipsoid(cloud)                    # surface at 0.65 of the farthest point
print("semi-axes:", e.semi_axes, "\ndirections:\n", e.directions)

# Slide a second cloud in from far away and watch EDRM fall to 0 once they touch.
for dx in (12, 8, 5, 3):
    other = fit_ellipsoid(cloud + [dx, 0])
    sol = min_surface_distance(e, other)
    print(f"offset {dx:2d}: EDRM {sol.edrm:.4f} overlap={sol.overlap} sweeps={sol.iterations}")

# The full pairwise matrix for a dataset; failed pairs would be listed and scored 0.
ds = FeatureDataset(["p", "q", "r"], [cloud, cloud + [10, 0], cloud + [0, 3]])
S = edrm_matrix(ds)
print(S.labels)
print(np.round(S.edrm, 4), "failed:", S.failed_pairs)
