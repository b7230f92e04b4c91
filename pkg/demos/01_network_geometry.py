"""
Drawing a dense network around a typical user, and checking how many base
stations actually transmit.
"""

import numpy as np

from udn_meanfield import geometry
from udn_meanfield.geometry import DensityConfig

rng = np.random.default_rng(1)

# %% One snapshot: 10 BSs and 1 user per unit area inside a disk of radius 5
cfg = DensityConfig(lambda_b=10.0, lambda_u=1.0, R=5.0)
snap = geometry.generate_snapshot(cfg, rng, activity_mode="voronoi")
print("BSs:", len(snap.bs_points), " users:", len(snap.user_points))
print("active BSs:", snap.active.sum(), " serving BS:", snap.serving_index)

# %% Only BSs with a user in their cell transmit.  The gamma approximation
# of the Voronoi cell area predicts the active fraction:
print("analytical active probability:", geometry.active_probability(10.0, 1.0))

# With a few hundred snapshots the empirical fraction is already close
# (edge cells are excluded by counting only well inside the window).
from udn_meanfield import NetworkConfig, SimConfig, validate_active_probability

check = validate_active_probability(NetworkConfig(10.0, 1.0), SimConfig(trials=500))
print(f"empirical {check.empirical:.4f} vs analytical {check.analytical:.4f} "
      f"(relative gap {check.relative_gap:.2%}, {check.n_bs} BSs counted)")

# %% Coverage: the chance of at least one BS inside the reception ball
for lb in (0.01, 0.1, 1.0):
    p = geometry.coverage_probability(DensityConfig(lb, 1.0, 2.0))
    print(f"lambda_b={lb:<5} P(covered within R=2) = {p:.4f}")

# %% For the whole-plane regime a finite window stands in for the plane.
# Its radius is picked so the truncated interference is 0.1% of the total.
for alpha in (3.0, 4.0, 5.0):
    print(f"alpha={alpha}: window radius {geometry.truncation_radius(alpha):.1f}")
