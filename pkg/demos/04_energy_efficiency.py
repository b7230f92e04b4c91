"""
Energy-efficient transmit power against mean-field interference.

Every BS picks P to maximise [c1 + log(P / (noise + I(P_hat)))] / (P_c + P)
while the population power P_hat follows the same rule; the solution is a
fixed point solved with the Lambert W function.
"""

import math

import numpy as np

from udn_meanfield import NetworkConfig, RicianMarginal, ee

marginal = RicianMarginal(math.sqrt(2), 1.0)

# %% A dense network where the optimum is interior
cfg = NetworkConfig(100.0, 1.0, R=10.0, noise=1e-3, asymptotic=True)
params = ee.make_ee_params(cfg, marginal)
res = ee.optimal_power_fixed_point(params)
print(f"P* = {res.power:.5f} after {res.iterations} iterations, EE = {res.ee_value:.4f}")
print("residuals:", ["%.1e" % r for r in res.residual_trace])

# %% The optimum against the equilibrium interference beats every grid power
at_eq = params.with_p_hat(res.power)
grid = ee.power_grid(cfg.p_max, 2000)
print("best grid EE:", ee.ee_closed_form(grid, at_eq).max())

# %% The same value through the Gumbel law of the conditional EE
print("Gumbel mean:", ee.ee_gumbel_mean(res.power, at_eq, marginal))

# %% Baselines.  With homogeneous powers the log term no longer depends on
# P once interference dominates, so the half-power baseline can win.
print("fixed P_max/2:", ee.baseline_fixed_power(params))
print("full search (equilibrium):", ee.baseline_full_search(params))
print("full search (homogeneous):", ee.baseline_full_search(params, interference="homogeneous"))

# %% Sparser network: the optimum clamps at P_max
cfg = NetworkConfig(10.0, 1.0, R=10.0, noise=1e-3, asymptotic=True)
res = ee.optimal_power_fixed_point(ee.make_ee_params(cfg, marginal))
print(f"lambda_b=10: P* = {res.power} (clamped={res.clamped})")
