"""Oracle checks bundled for the ``validate`` command.

Each check returns a :class:`Check` row; none of them raise on failure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import channel, ee, geometry
from .channel import FadingParams, FadingState
from .meanfield import NetworkConfig, mf_interference, udn_condition_check
from .montecarlo import (SimConfig, estimate_normalized_interference, estimate_outage, trial_rng,
                         validate_active_probability)


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    target: str
    passed: bool


def poisson_count_check(density: float, radius: float, samples: int, seed: int, alpha: float = 0.01) -> Check:
    """Chi-square goodness of fit of PPP counts to Poisson(density pi radius^2)."""
    rng = np.random.default_rng(seed)
    mean = density * math.pi * radius ** 2
    counts = np.array([len(geometry.sample_ppp(density, radius, rng)) for _ in range(samples)])
    # bins with expected count >= 5, tails pooled
    lo, hi = int(stats.poisson.ppf(1e-4, mean)), int(stats.poisson.isf(1e-4, mean))
    edges = np.arange(lo, hi + 1)
    probs = stats.poisson.pmf(edges, mean)
    probs[0] += stats.poisson.cdf(lo - 1, mean)
    probs[-1] += stats.poisson.sf(hi, mean)
    obs = np.bincount(np.clip(counts, lo, hi) - lo, minlength=len(edges))
    exp = probs * samples
    keep = exp >= 5
    obs_k = np.append(obs[keep], obs[~keep].sum())
    exp_k = np.append(exp[keep], exp[~keep].sum())
    if exp_k[-1] == 0:
        obs_k, exp_k = obs_k[:-1], exp_k[:-1]
    exp_k *= obs_k.sum() / exp_k.sum()
    p = stats.chisquare(obs_k, exp_k).pvalue
    return Check("poisson counts chi-square", float(p), f"p >= {alpha}", bool(p >= alpha))


def radial_uniformity_check(density: float, radius: float, seed: int, min_points: int, alpha: float = 0.01) -> Check:
    """KS test of sampled radii against the CDF r^2 / radius^2."""
    rng = np.random.default_rng(seed)
    chunks, n = [], 0
    while n < min_points:
        pts = geometry.sample_ppp(density, radius, rng)
        chunks.append(np.hypot(pts[:, 0], pts[:, 1]))
        n += len(pts)
    r = np.concatenate(chunks)
    p = stats.kstest(r, lambda x: np.clip(x / radius, 0, 1) ** 2).pvalue
    return Check("radial uniformity KS", float(p), f"p >= {alpha}", bool(p >= alpha))


def ou_moment_check(params: FadingParams, t: float, paths: int, seed: int, em_dt: float = 1e-3) -> Check:
    """Exact OU stepping against Euler-Maruyama: mean and variance within 3 sigma."""
    rng_a = np.random.default_rng([seed, 0])
    rng_b = np.random.default_rng([seed, 1])
    exact = channel.evolve_fading(FadingState.zeros(paths), t, params, rng_a).g
    g = np.zeros((paths, 2))
    mu = np.asarray(params.mu)
    steps = int(round(t / em_dt))
    sq = math.sqrt(em_dt)
    for _ in range(steps):
        g += 0.5 * (mu - g) * em_dt + params.eta * sq * rng_b.standard_normal(g.shape)
    worst = 0.0
    for c in range(2):
        a, b = exact[:, c], g[:, c]
        z_mean = abs(a.mean() - b.mean()) / math.sqrt(a.var(ddof=1) / paths + b.var(ddof=1) / paths)
        # var of sample variance ~ (m4 - s^4) / n
        va = (np.mean((a - a.mean()) ** 4) - a.var() ** 2) / paths
        vb = (np.mean((b - b.mean()) ** 4) - b.var() ** 2) / paths
        z_var = abs(a.var(ddof=1) - b.var(ddof=1)) / math.sqrt(va + vb)
        worst = max(worst, z_mean, z_var)
    return Check(f"OU exact vs Euler-Maruyama t={t}", float(worst), "z <= 3", bool(worst <= 3))


def fpk_refinement_check(params: FadingParams, t: float = 1.0, h: float = 0.02) -> Check:
    r1 = channel.fpk_residual(params, t, h)
    r2 = channel.fpk_residual(params, t, h / 2)
    ratio = r1 / r2
    return Check("FPK residual refinement ratio", ratio, "3.5 <= ratio <= 4.5", bool(3.5 <= ratio <= 4.5))


def lambert_check(n: int = 10_000) -> Check:
    y = np.geomspace(1e-8, 1e6, n)
    w = ee.lambert_w0(y)
    err = float(np.max(np.abs(w * np.exp(w) - y) / np.maximum(1.0, y)))
    return Check("Lambert W identity", err, "<= 1e-12", bool(err <= 1e-12))


def gumbel_check(configs: int, seed: int) -> Check:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(configs):
        cfg = NetworkConfig(lambda_b=10 ** rng.uniform(-1, 2), lambda_u=10 ** rng.uniform(-3, 0),
                            n_antennas=int(rng.integers(1, 65)), alpha=rng.uniform(2.5, 5), R=rng.uniform(1, 50),
                            noise=10 ** rng.uniform(-6, 0), p_c=rng.uniform(0.1, 5), p_max=1.0)
        marginal = channel.RicianMarginal(rng.uniform(0, 3), rng.uniform(0.05, 2))
        params = ee.make_ee_params(cfg, marginal, rng.uniform(0.01, 1.0))
        p = rng.uniform(0.01, 1.0)
        a = ee.ee_closed_form(p, params)
        b = ee.ee_gumbel_mean(p, params, marginal)
        worst = max(worst, abs(a - b) / max(abs(a), 1e-300))
    return Check("Gumbel mean vs closed form", worst, "<= 1e-9 relative", bool(worst <= 1e-9))


def activity_check(trials: int, seed: int) -> Check:
    cfg = NetworkConfig(lambda_b=10.0, lambda_u=1.0)
    res = validate_active_probability(cfg, SimConfig(trials=trials, master_seed=seed))
    return Check("active fraction vs p_a (ratio 10)", res.relative_gap, "<= 1%", bool(res.relative_gap <= 0.01))


def outage_check(trials: int, seed: int) -> Check:
    cfg = NetworkConfig(lambda_b=0.1, lambda_u=0.01, R=2.0)
    est = estimate_outage(cfg, SimConfig(trials=trials, master_seed=seed, activity_mode="thinning"))
    target = 1.0 - geometry.coverage_probability(geometry.DensityConfig(cfg.lambda_b, cfg.lambda_u, cfg.R))
    z = abs(est.mean - target) / math.sqrt(target * (1 - target) / trials)
    return Check("outage fraction vs 1 - p_R", z, "z <= 3", bool(z <= 3))


def interference_check(cfg: NetworkConfig, trials: int, seed: int, form: str = "closed") -> Check:
    """Monte-Carlo normalised interference (thinning) against the closed form."""
    fading = FadingParams.from_norm(math.sqrt(2), 1.0)
    eg2 = channel.fading_second_moment(channel.fading_marginal(math.inf, fading))
    est = estimate_normalized_interference(cfg, SimConfig(trials=trials, master_seed=seed, activity_mode="thinning"),
                                           fading)
    target = mf_interference(cfg, 1.0, eg2, form).value
    z = abs(est.mean - target) / est.std_error
    a0 = udn_condition_check(cfg, 1e4).a0_satisfied
    return Check(f"MC interference vs {form} form (lb={cfg.lambda_b:g}, A0={a0})", z, "z <= 3", bool(z <= 3))


def run_all(trials: int = 2000, seed: int = 2016) -> list[Check]:
    fading = FadingParams.from_norm(math.sqrt(2), 1.0)
    cfg = NetworkConfig(lambda_b=100.0, lambda_u=1.0, R=10.0)
    return [
        poisson_count_check(1.0, 1.0, 10 * trials, seed),
        radial_uniformity_check(10.0, 2.0, seed, 10 * trials),
        ou_moment_check(fading, 1.0, 5 * trials, seed, em_dt=1e-2),
        fpk_refinement_check(fading),
        lambert_check(),
        gumbel_check(50, seed),
        activity_check(trials, seed),
        outage_check(trials, seed),
        interference_check(cfg, trials, seed, "campbell"),
        interference_check(cfg, trials, seed, "closed"),
    ]
