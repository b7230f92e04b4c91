"""Energy efficiency under mean-field interference and its optimal power.

With the high-SINR approximation the spatially averaged energy efficiency
of a BS transmitting P against mean-field interference I_hat is

    EE(P) = [c1 + log(P / (sigma'^2 + I_hat))] / (P_c + P),
    c1    = 2 E[log|g|] + alpha (gamma + log pi) / 2.

Setting dEE/dP = 0 with I_hat held fixed gives P = P_c / W(P_c e^{c1-1} /
(sigma'^2 + I_hat)).  Since I_hat depends on the population power P_hat
and all BSs follow the same rule, the optimum is found by iterating that
map with P_hat tied to P.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import RicianMarginal, fading_log_moment, fading_second_moment, rician_expectation
from .errors import ConvergenceError, DomainError, ParameterError
from .meanfield import MFInterference, NetworkConfig, mf_interference, normalized_noise

EULER_GAMMA = 0.5772156649

_HALLEY_MAX_ITER = 20


def lambert_w0(y):
    """Principal branch of the Lambert W function for y >= 0.

    Halley's iteration from a log-based starting point; converges in a
    handful of steps to full double precision.
    """
    arr = np.asarray(y, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise DomainError("lambert_w0 is only defined here for y >= 0")
    w = np.where(arr <= math.e, np.log1p(arr), 0.0)
    big = arr > math.e
    if np.any(big):
        l1 = np.log(arr[big])
        l2 = np.log(l1)
        w[big] = l1 - l2 + l2 / l1
    for _ in range(_HALLEY_MAX_ITER):
        ew = np.exp(w)
        f = w * ew - arr
        wp1 = w + 1.0
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w = w - step
        if np.all(np.abs(step) <= 4 * np.finfo(float).eps * (1.0 + np.abs(w))):
            break
    w = np.where(arr == 0, 0.0, w)
    return float(w) if w.ndim == 0 else w


def compute_c1(alpha: float, e_log_g: float) -> float:
    return 2.0 * e_log_g + alpha * (EULER_GAMMA + math.log(math.pi)) / 2.0


@dataclass(frozen=True)
class EEParams:
    """Everything the closed form needs at one time instant.

    ``eg2`` is the population fading moment E|g|^2 so that the mean-field
    interference can be re-evaluated for any P_hat.
    """

    cfg: NetworkConfig
    c1: float
    i_hat: MFInterference
    t: float
    eg2: float
    form: str = "closed"

    def __post_init__(self):
        if not math.isfinite(self.c1):
            raise ParameterError("c1 must be finite")
        if self.i_hat.value < 0:
            raise ParameterError("mean-field interference must be non-negative")

    @property
    def sigma_eff(self) -> float:
        return normalized_noise(self.cfg)

    def interference(self, p_hat: float) -> float:
        return mf_interference(self.cfg, p_hat, self.eg2, self.form).value

    def with_p_hat(self, p_hat: float) -> "EEParams":
        return replace(self, i_hat=mf_interference(self.cfg, p_hat, self.eg2, self.form))


def make_ee_params(cfg: NetworkConfig, marginal: RicianMarginal, p_hat: float | None = None,
                   t: float = math.inf, e_log_g: float | None = None, form: str = "closed") -> EEParams:
    """Build EEParams from a fading marginal.

    ``e_log_g`` overrides E[log|g|], e.g. with the realised log-magnitude of
    a simulated serving link.
    """
    if e_log_g is None:
        e_log_g = fading_log_moment(marginal)
    eg2 = fading_second_moment(marginal)
    p_hat = cfg.p_max if p_hat is None else p_hat
    return EEParams(cfg, compute_c1(cfg.alpha, e_log_g), mf_interference(cfg, p_hat, eg2, form), t, eg2, form)


def ee_closed_form(P, params: EEParams):
    """EE at power ``P`` against the interference stored in ``params``."""
    p = np.asarray(P, dtype=float)
    if np.any(p <= 0):
        raise DomainError("transmit power must be positive")
    denom = params.sigma_eff + params.i_hat.value
    if not denom > 0:
        raise ParameterError("sigma'^2 + I_hat must be positive")
    out = (params.c1 + np.log(p / denom)) / (params.cfg.p_c + p)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class GumbelParams:
    beta: float
    mu_g: float

    def __post_init__(self):
        if not self.beta > 0:
            raise ParameterError("Gumbel scale must be positive")

    @property
    def mean(self) -> float:
        return self.mu_g + self.beta * EULER_GAMMA


def _c0(P, params: EEParams, g_abs):
    return P * np.square(g_abs) / (params.sigma_eff + params.i_hat.value)


def gumbel_params(P: float, params: EEParams, g_abs: float) -> GumbelParams:
    """Gumbel law of the conditional EE given serving-link fading |g|.

    The scale is alpha / (2 (P + P_c)) and the location
    scale * log(pi c0^(2/alpha)) with c0 = P |g|^2 / (sigma'^2 + I_hat).
    """
    if not P > 0:
        raise DomainError("transmit power must be positive")
    alpha = params.cfg.alpha
    beta = alpha / (2.0 * (P + params.cfg.p_c))
    c0 = float(_c0(P, params, g_abs))
    return GumbelParams(beta, beta * (math.log(math.pi) + 2.0 / alpha * math.log(c0)))


def ee_ccdf(v, P: float, params: EEParams, g_abs: float):
    """Pr(EE > v | g) = 1 - exp(-pi [c0 e^{-v (P + P_c)}]^(2/alpha))."""
    c0 = float(_c0(P, params, g_abs))
    x = math.pi * np.power(c0 * np.exp(-np.asarray(v, dtype=float) * (P + params.cfg.p_c)), 2.0 / params.cfg.alpha)
    return -np.expm1(-x)


def ee_gumbel_mean(P: float, params: EEParams, fading) -> float:
    """EE as the fading average of the conditional Gumbel mean.

    ``fading`` is a RicianMarginal (exact average by quadrature) or an array
    of |g| samples (sample average).
    """
    if not P > 0:
        raise DomainError("transmit power must be positive")
    alpha = params.cfg.alpha
    beta = alpha / (2.0 * (P + params.cfg.p_c))
    denom = params.sigma_eff + params.i_hat.value

    def conditional_mean(g):
        log_c0 = math.log(P / denom) + 2.0 * np.log(g)
        return beta * (math.log(math.pi) + 2.0 / alpha * log_c0) + beta * EULER_GAMMA

    if isinstance(fading, RicianMarginal):
        if fading.nu == 0 and fading.s == 0:
            raise DomainError("fading magnitude is zero almost surely")
        if fading.s == 0:
            return float(conditional_mean(fading.nu))
        return rician_expectation(conditional_mean, fading)
    g = np.asarray(fading, dtype=float)
    return float(np.mean(conditional_mean(g)))


@dataclass
class EEResult:
    power: float
    ee_value: float
    iterations: int
    residual_trace: list = field(default_factory=list)
    clamped: bool = False
    damped: bool = False
    p_hat: float = float("nan")


def _best_response(params: EEParams, interference: float) -> tuple[float, bool]:
    cfg = params.cfg
    arg = cfg.p_c * math.exp(params.c1 - 1.0) / (params.sigma_eff + interference)
    if not (arg > 0 and math.isfinite(arg)):
        raise ParameterError(f"Lambert W argument must be positive and finite, got {arg}")
    p = cfg.p_c / lambert_w0(arg)
    if p > cfg.p_max:
        return cfg.p_max, True
    return p, False


def optimal_power_fixed_point(params: EEParams, p_init: float | None = None, p_hat_init: float | None = None,
                              tol: float = 1e-6, max_iter: int = 50, frozen: bool = False) -> EEResult:
    """EE-optimal power with the population power tied to the BS's own.

    Each step sets P <- min(P_max, P_c / W(P_c e^{c1-1} / (sigma'^2 + I_hat(P_hat))))
    and then P_hat <- P, stopping once |P_{k+1} - P_k| < tol.  If the
    residual flips sign five times in a row the update is relaxed by 1/2.
    With ``frozen=True`` the interference in ``params`` is used as is and a
    single evaluation is returned.
    """
    cfg = params.cfg
    p = cfg.p_max / 2 if p_init is None else float(p_init)
    p_hat = p if p_hat_init is None else float(p_hat_init)
    for name, val in (("p_init", p), ("p_hat_init", p_hat)):
        if not 0 < val <= cfg.p_max:
            raise ParameterError(f"{name} must lie in (0, p_max]")

    if frozen:
        new, clamped = _best_response(params, params.i_hat.value)
        ee = ee_closed_form(new, params)
        return EEResult(new, ee, 1, [abs(new - p)], clamped, False, params.i_hat.p_hat)

    trace = []
    relax = 1.0
    flips = 0
    last_delta = 0.0
    clamped = False
    for k in range(1, max_iter + 1):
        target, clamped = _best_response(params, params.interference(p_hat))
        new = p + relax * (target - p)
        delta = new - p
        trace.append(abs(delta))
        if abs(delta) < tol:
            p = new
            final = params.with_p_hat(p)
            return EEResult(p, ee_closed_form(p, final), k, trace, clamped, relax < 1, p)
        flips = flips + 1 if delta * last_delta < 0 else 0
        if flips >= 5 and relax == 1.0:
            relax = 0.5
        last_delta = delta
        p = new
        p_hat = p
    raise ConvergenceError(f"fixed point did not converge in {max_iter} iterations", trace, params.t)


def baseline_fixed_power(params: EEParams, fraction: float = 0.5) -> float:
    """EE when every BS transmits ``fraction * P_max``."""
    p = fraction * params.cfg.p_max
    return ee_closed_form(p, params.with_p_hat(p))


def power_grid(p_max: float, grid_size: int, low: float = 1e-4) -> np.ndarray:
    if grid_size < 2:
        raise ParameterError("grid_size must be at least 2")
    return np.geomspace(low * p_max, p_max, grid_size)


def baseline_full_search(params: EEParams, grid_size: int = 1000, p_hat: float | None = None,
                         interference: str = "equilibrium") -> tuple[float, float]:
    """Best EE over a log-spaced power grid on [1e-4 P_max, P_max].

    ``interference="equilibrium"`` holds the population at its mean-field
    fixed point (``p_hat``, solved if omitted) while the BS searches its own
    power.  ``"homogeneous"`` instead lets the population follow every grid
    power.
    """
    grid = power_grid(params.cfg.p_max, grid_size)
    if interference == "equilibrium":
        if p_hat is None:
            p_hat = optimal_power_fixed_point(params).power
        values = ee_closed_form(grid, params.with_p_hat(p_hat))
    elif interference == "homogeneous":
        values = np.array([ee_closed_form(p, params.with_p_hat(p)) for p in grid])
    else:
        raise ParameterError(f"unknown interference rule {interference!r}")
    i = int(np.argmax(values))
    return float(grid[i]), float(values[i])
