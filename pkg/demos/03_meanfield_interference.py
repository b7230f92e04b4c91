"""
How well does a single number stand in for the aggregate interference?

The normalised interference at the typical user is simulated over many
snapshots and compared with two expressions for its mean: the closed form
that drives the power control, and the exact Campbell mean of the
simulated quantity.
"""

import math

from udn_meanfield import FadingParams, NetworkConfig, SimConfig, channel, meanfield
from udn_meanfield.montecarlo import estimate_normalized_interference

fading = FadingParams.from_norm(math.sqrt(2), 1.0)
eg2 = channel.fading_second_moment(channel.fading_marginal(math.inf, fading))

# %%
for cfg in (NetworkConfig(100.0, 1.0, R=10.0), NetworkConfig(50.0, 1.0, n_antennas=4, R=5.0)):
    est = estimate_normalized_interference(cfg, SimConfig(trials=1000, activity_mode="thinning"), fading)
    closed = meanfield.mf_interference(cfg, 1.0, eg2, "closed").value
    exact = meanfield.mf_interference(cfg, 1.0, eg2, "campbell").value
    diag = meanfield.udn_condition_check(cfg, 1e4)
    print(f"lambda_b={cfg.lambda_b:g} N={cfg.n_antennas}: A0 ratio {diag.ratio_a0:.1e}")
    print(f"   simulated {est.mean:.5f} +- {est.std_error:.5f}")
    print(f"   Campbell  {exact:.5f}")
    print(f"   closed    {closed:.5f}")

# The Campbell mean sits within Monte-Carlo error.  The closed form carries
# (lambda_u pi R)^2 in place of the active BS density and is far larger.

# %% Both expressions fall as lambda_b^(-alpha/2) for fixed users
for lb in (10.0, 100.0, 1000.0):
    cfg = NetworkConfig(lb, 1.0, R=10.0)
    print(lb, meanfield.mf_interference(cfg, 1.0, eg2).value)
