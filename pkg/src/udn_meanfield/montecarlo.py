"""Brute-force estimators at the typical user and the figure experiments.

Every trial draws from its own generator seeded by
``SeedSequence(master_seed, spawn_key=(stream, trial))``, so results do not
depend on how trials are split across worker processes.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import channel, ee, geometry
from .channel import AntennaModel, FadingParams, FadingState, RicianMarginal
from .errors import ConvergenceError, InsufficientDataError, ParameterError
from .meanfield import NetworkConfig, density_scale, mf_interference, mf_rate

ACTIVITY_MODES = ("voronoi", "thinning")
RATE_METRICS = ("log", "literal")

# Stream keys keep the random streams of different experiments disjoint.
STREAM_RATE = 1
STREAM_INTERFERENCE = 2
STREAM_ACTIVITY = 3
STREAM_TRAJECTORY = 4
STREAM_OUTAGE = 5


@dataclass(frozen=True)
class SimConfig:
    trials: int = 10_000
    master_seed: int = 2016
    dt: float = 0.05
    horizon: float = 20.0
    activity_mode: str = "voronoi"
    rate_metric: str = "log"
    workers: int = 1
    transient: float = 5.0
    marginal_mode: str = "paper"
    truncation_tol: float = 1e-3

    def __post_init__(self):
        if self.trials < 1:
            raise ParameterError("trials >= 1")
        if not self.dt > 0:
            raise ParameterError("dt > 0")
        if not self.horizon >= self.dt:
            raise ParameterError("horizon >= dt")
        if self.activity_mode not in ACTIVITY_MODES:
            raise ParameterError(f"activity_mode must be one of {ACTIVITY_MODES}")
        if self.rate_metric not in RATE_METRICS:
            raise ParameterError(f"rate_metric must be one of {RATE_METRICS}")
        if self.workers < 1:
            raise ParameterError("workers >= 1")
        if not 0 <= self.master_seed < 2 ** 64:
            raise ParameterError("master_seed must fit in 64 bits")


@dataclass(frozen=True)
class EstimateWithCI:
    mean: float
    std_error: float
    trials_used: int
    outages: int = 0

    @property
    def trials(self) -> int:
        return self.trials_used + self.outages


@dataclass(frozen=True)
class SINRSample:
    sinr: float
    normalized_interference: float
    outage: bool
    n_interferers: int = 0


@dataclass
class TrajectoryResult:
    times: np.ndarray
    ee_proposed: np.ndarray
    ee_fixed: np.ndarray
    ee_full_search: np.ndarray
    power_trace: np.ndarray
    iterations: np.ndarray = field(default=None, repr=False)

    def post_transient(self, t_min: float) -> dict:
        """Time averages over t >= t_min."""
        mask = self.times >= t_min
        if not np.any(mask):
            raise InsufficientDataError("no samples after the transient cut-off")
        return {
            "ee_proposed": float(np.mean(self.ee_proposed[mask])),
            "ee_fixed": float(np.mean(self.ee_fixed[mask])),
            "ee_full_search": float(np.mean(self.ee_full_search[mask])),
            "power": float(np.mean(self.power_trace[mask])),
        }


def trial_rng(master_seed: int, stream: int, trial: int, point: int = 0) -> np.random.Generator:
    seq = np.random.SeedSequence(master_seed, spawn_key=(stream, point, trial))
    return np.random.Generator(np.random.PCG64(seq))


def simulation_window(cfg: NetworkConfig, sim: SimConfig) -> float:
    """Reception disk, or a truncation radius standing in for the whole plane."""
    if cfg.asymptotic:
        return max(cfg.R, geometry.truncation_radius(cfg.alpha, sim.truncation_tol))
    return cfg.R


def _powers(rule, n: int, rng) -> np.ndarray:
    if callable(rule):
        return np.asarray(rule(n, rng), dtype=float)
    return np.full(n, float(rule))


def simulate_snapshot_sinr(cfg: NetworkConfig, sim: SimConfig, tx_power_rule, fading_time: float,
                           rng: np.random.Generator, fading: FadingParams) -> SINRSample:
    """One SINR draw at the typical user.

    The serving link has gain N; every active interferer adds
    N P_i l_i0 |g_i0|^2 with probability 1 / sqrt(N).  Fading magnitudes are
    drawn from the marginal at ``fading_time``.
    """
    window = simulation_window(cfg, sim)
    dens = geometry.DensityConfig(cfg.lambda_b, cfg.lambda_u, window)
    snap = geometry.generate_snapshot(dens, rng, sim.activity_mode)
    if snap.outage:
        return SINRSample(math.nan, math.nan, True)
    marginal = channel.fading_marginal(fading_time, fading, sim.marginal_mode)
    antenna = AntennaModel(cfg.n_antennas)

    d0 = math.hypot(*snap.bs_points[snap.serving_index])
    g0 = channel.sample_rician(marginal, 1, rng)[0]
    p0 = _powers(tx_power_rule, 1, rng)[0]
    signal = antenna.main_gain * p0 * channel.path_loss(d0, cfg.alpha) * g0 ** 2

    idx = snap.interferer_indices()
    interference = 0.0
    if len(idx):
        pts = snap.bs_points[idx]
        loss = channel.path_loss(np.hypot(pts[:, 0], pts[:, 1]), cfg.alpha)
        g = channel.sample_rician(marginal, len(idx), rng)
        p = _powers(tx_power_rule, len(idx), rng)
        gains = antenna.sample_gains(len(idx), rng)
        interference = float(np.sum(gains * p * loss * g ** 2))
    sinr = signal / (cfg.noise + interference) if cfg.noise + interference > 0 else math.inf
    i_hat = interference / (cfg.n_antennas * density_scale(cfg))
    return SINRSample(float(sinr), i_hat, False, len(idx))


def _trial_chunk(args):
    cfg, sim, power, fading_time, fading, stream, point, trials = args
    out = np.empty((len(trials), 3))
    for k, i in enumerate(trials):
        s = simulate_snapshot_sinr(cfg, sim, power, fading_time, trial_rng(sim.master_seed, stream, i, point), fading)
        out[k] = (s.outage, s.sinr, s.normalized_interference)
    return out


def _run_trials(cfg, sim, power, fading_time, fading, stream, point) -> np.ndarray:
    ids = np.arange(sim.trials)
    if sim.workers == 1:
        return _trial_chunk((cfg, sim, power, fading_time, fading, stream, point, ids))
    chunks = np.array_split(ids, sim.workers * 4)
    jobs = [(cfg, sim, power, fading_time, fading, stream, point, c) for c in chunks if len(c)]
    with ProcessPoolExecutor(max_workers=sim.workers) as pool:
        parts = list(pool.map(_trial_chunk, jobs))
    return np.vstack(parts)


def _summarise(values: np.ndarray, outages: int) -> EstimateWithCI:
    n = len(values)
    if n == 0:
        raise InsufficientDataError("every trial was an outage")
    se = float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    return EstimateWithCI(float(np.mean(values)), se, n, outages)


def estimate_average_rate(cfg: NetworkConfig, sim: SimConfig, fading: FadingParams, tx_power=1.0,
                          fading_time: float = math.inf, point: int = 0) -> EstimateWithCI:
    """Mean of log(1 + SINR) over non-outage trials (E[1 + SINR] for the literal metric)."""
    if sim.trials < 100:
        raise ParameterError("estimate_average_rate needs at least 100 trials")
    res = _run_trials(cfg, sim, tx_power, fading_time, fading, STREAM_RATE, point)
    ok = res[:, 0] == 0
    sinr = res[ok, 1]
    values = np.log1p(sinr) if sim.rate_metric == "log" else 1.0 + sinr
    return _summarise(values, int(np.sum(~ok)))


def estimate_normalized_interference(cfg: NetworkConfig, sim: SimConfig, fading: FadingParams, tx_power=1.0,
                                     fading_time: float = math.inf, point: int = 0,
                                     return_samples: bool = False):
    """Monte-Carlo mean of the density- and antenna-normalised interference."""
    res = _run_trials(cfg, sim, tx_power, fading_time, fading, STREAM_INTERFERENCE, point)
    ok = res[:, 0] == 0
    est = _summarise(res[ok, 2], int(np.sum(~ok)))
    return (est, res[ok, 2]) if return_samples else est


def estimate_outage(cfg: NetworkConfig, sim: SimConfig, fading: FadingParams | None = None) -> EstimateWithCI:
    """Fraction of snapshots with no BS inside the simulation window."""
    fading = FadingParams() if fading is None else fading
    res = _run_trials(cfg, sim, 1.0, math.inf, fading, STREAM_OUTAGE, 0)
    p = float(np.mean(res[:, 0]))
    return EstimateWithCI(p, math.sqrt(p * (1 - p) / sim.trials), sim.trials, 0)


@dataclass(frozen=True)
class ActivityCheck:
    empirical: float
    analytical: float
    relative_gap: float
    n_bs: int


def validate_active_probability(cfg: NetworkConfig, sim: SimConfig, window: float | None = None,
                                margin: float | None = None) -> ActivityCheck:
    """Voronoi-mode active fraction against the gamma approximation.

    BSs are counted only inside ``window - margin`` so that cells cut by the
    window edge do not bias the estimate; no user is pinned to the origin.
    """
    if cfg.lambda_u == 0:
        return ActivityCheck(0.0, 0.0, 0.0, 0)
    if not cfg.lambda_b > 0:
        raise ParameterError("lambda_b must be positive")
    spacing = 1.0 / math.sqrt(cfg.lambda_b)
    margin = 5.0 * spacing if margin is None else margin
    window = margin + 12.0 * spacing if window is None else window
    inner = window - margin
    if not inner > 0:
        raise ParameterError("window must exceed the margin")
    dens = geometry.DensityConfig(cfg.lambda_b, cfg.lambda_u, window)
    n_bs = 0
    n_active = 0
    for i in range(sim.trials):
        rng = trial_rng(sim.master_seed, STREAM_ACTIVITY, i)
        snap = geometry.generate_snapshot(dens, rng, "voronoi", include_typical_user=False)
        if len(snap.bs_points) == 0:
            continue
        keep = np.hypot(snap.bs_points[:, 0], snap.bs_points[:, 1]) <= inner
        n_bs += int(np.sum(keep))
        n_active += int(np.sum(snap.active[keep]))
    if n_bs == 0:
        raise InsufficientDataError("no BS fell inside the counting region")
    emp = n_active / n_bs
    ana = geometry.active_probability(cfg.lambda_b, cfg.lambda_u)
    gap = abs(emp - ana) / ana if ana > 0 else math.inf
    return ActivityCheck(emp, ana, gap, n_bs)


def _ee_at(cfg, fading, t, log_g, sim, form="closed"):
    marginal = channel.fading_marginal(t, fading, sim.marginal_mode)
    return ee.make_ee_params(cfg, marginal, cfg.p_max, t, e_log_g=log_g, form=form)


def simulate_trajectory(cfg: NetworkConfig, sim: SimConfig, fading: FadingParams,
                        p_init: float | None = None, p_hat_init: float | None = None,
                        fading_source: str = "path", n_paths: int = 1, grid_size: int = 1000,
                        tol: float = 1e-6) -> TrajectoryResult:
    """EE over time for the proposed, fixed P_max/2 and full-search policies.

    The serving-link fading evolves from g(0) = 0 with the exact OU kernel.
    With ``fading_source="path"`` its realised log|g(t)| replaces E[log|g|]
    in c1, so curves fluctuate with the fading; ``"marginal"`` uses the
    expectation.  The mean-field interference always uses the population
    moment E|g(t)|^2.  Results are averaged over ``n_paths`` paths.
    """
    if fading_source not in ("path", "marginal"):
        raise ParameterError("fading_source must be 'path' or 'marginal'")
    n_steps = int(round(sim.horizon / sim.dt))
    times = sim.dt * np.arange(1, n_steps + 1)
    out = np.zeros((4, n_steps))
    iters = np.zeros(n_steps, dtype=int)
    for path in range(n_paths):
        rng = trial_rng(sim.master_seed, STREAM_TRAJECTORY, path)
        state = FadingState.zeros()
        p_prev, p_hat_prev = p_init, p_hat_init
        for k, t in enumerate(times):
            state = channel.evolve_fading(state, sim.dt, fading, rng)
            log_g = math.log(float(state.magnitude)) if fading_source == "path" else None
            params = _ee_at(cfg, fading, t, log_g, sim)
            try:
                res = ee.optimal_power_fixed_point(params, p_prev, p_hat_prev, tol=tol)
            except ConvergenceError as exc:
                raise ConvergenceError(f"fixed point failed at t={t:.4g}: {exc}", exc.trace, t) from exc
            _, full = ee.baseline_full_search(params, grid_size, p_hat=res.power)
            out[0, k] += res.ee_value
            out[1, k] += ee.baseline_fixed_power(params)
            out[2, k] += full
            out[3, k] += res.power
            iters[k] = max(iters[k], res.iterations)
            p_prev = p_hat_prev = res.power
    out /= n_paths
    return TrajectoryResult(times, out[0], out[1], out[2], out[3], iters)


@dataclass
class SweepTable:
    n_list: list
    lambda_b_list: list
    ee: np.ndarray
    power: np.ndarray
    errors: dict = field(default_factory=dict)


def stationary_ee_sweep(cfg_base: NetworkConfig, n_list: Sequence[int], lambda_b_list: Sequence[float],
                        fading: FadingParams, mode: str = "paper") -> SweepTable:
    """Maximised stationary EE on an (N, lambda_b) grid; rows follow ``n_list``."""
    if len(n_list) == 0 or len(lambda_b_list) == 0:
        raise ParameterError("sweep lists must be non-empty")
    marginal = channel.fading_marginal(math.inf, fading, mode)
    table = np.full((len(n_list), len(lambda_b_list)), np.nan)
    power = np.full_like(table, np.nan)
    errors = {}
    for i, n in enumerate(n_list):
        for j, lb in enumerate(lambda_b_list):
            try:
                cfg = cfg_base.replace(n_antennas=int(n), lambda_b=float(lb))
                res = ee.optimal_power_fixed_point(ee.make_ee_params(cfg, marginal))
            except (ConvergenceError, ParameterError) as exc:
                errors[(n, lb)] = str(exc)
                continue
            table[i, j] = res.ee_value
            power[i, j] = res.power
    return SweepTable(list(n_list), list(lambda_b_list), table, power, errors)


def rate_sweep(cfg_base: NetworkConfig, sim: SimConfig, fading: FadingParams, ratios: Sequence[float],
               tx_power: float = 1.0, form: str = "closed"):
    """Simulated and mean-field average rate across BS/user density ratios.

    Returns a list of dicts with keys ``ratio``, ``lambda_b``, ``simulated``,
    ``std_error``, ``analytical`` and ``accuracy`` (simulated / analytical).
    """
    rows = []
    marginal = channel.fading_marginal(math.inf, fading, sim.marginal_mode)
    eg2 = channel.fading_second_moment(marginal)
    for k, ratio in enumerate(ratios):
        cfg = cfg_base.replace(lambda_b=ratio * cfg_base.lambda_u)
        est = estimate_average_rate(cfg, sim, fading, tx_power, point=k)
        i_hat = mf_interference(cfg, tx_power, eg2, form)
        ana = mf_rate(cfg, i_hat, marginal, tx_power, sim.rate_metric)
        rows.append({
            "ratio": float(ratio),
            "lambda_b": cfg.lambda_b,
            "simulated": est.mean,
            "std_error": est.std_error,
            "analytical": ana,
            "accuracy": est.mean / ana,
            "trials_used": est.trials_used,
            "outages": est.outages,
        })
    return rows
