"""Path loss, sectorised antennas and Ornstein-Uhlenbeck fading.

The fading vector g = (g_x, g_y) of a link follows

    dg = 1/2 (mu - g) dt + eta dW

with independent Wiener processes per component.  Started at g(0) = 0,
each component at time t is Gaussian with mean mu (1 - e^{-t/2}) and
variance eta^2 (1 - e^{-t}), so |g(t)| is Rician.  The closed-form energy
efficiency instead uses the scale eta (1 - e^{-t}); both are exposed
through ``fading_marginal(mode=...)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import DomainError, ParameterError

MARGINAL_MODES = ("paper", "sde")


@dataclass(frozen=True)
class AntennaModel:
    """Sectorised array: gain N inside a beam of width 2 pi / sqrt(N), zero outside."""

    n_antennas: int

    def __post_init__(self):
        if int(self.n_antennas) != self.n_antennas or self.n_antennas < 1:
            raise ParameterError("n_antennas must be a positive integer")

    @property
    def main_gain(self) -> float:
        return float(self.n_antennas)

    @property
    def beam_width(self) -> float:
        return 2.0 * math.pi / math.sqrt(self.n_antennas)

    @property
    def hit_probability(self) -> float:
        return self.beam_width / (2.0 * math.pi)

    @property
    def mean_interference_gain(self) -> float:
        return self.main_gain * self.hit_probability

    def sample_gains(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Directional gain seen from ``n`` interferers with independent beam hits."""
        return np.where(rng.random(n) < self.hit_probability, self.main_gain, 0.0)


def path_loss(distance, alpha: float):
    """Bounded power-law attenuation min(1, d^-alpha)."""
    if not alpha > 2:
        raise ParameterError(f"alpha must exceed 2, got {alpha}")
    d = np.asarray(distance, dtype=float)
    if np.any(d < 0):
        raise ParameterError("distance must be non-negative")
    with np.errstate(divide="ignore", over="ignore"):
        out = np.minimum(1.0, np.power(d, -alpha))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class FadingParams:
    mu: tuple = (1.0, 1.0)
    eta: float = 1.0

    def __post_init__(self):
        mu = tuple(float(m) for m in np.broadcast_to(np.asarray(self.mu, dtype=float), (2,)))
        if any(m < 0 or not math.isfinite(m) for m in mu):
            raise ParameterError("mu components must be finite and non-negative")
        if not (self.eta >= 0 and math.isfinite(self.eta)):
            raise ParameterError("eta must be finite and non-negative")
        object.__setattr__(self, "mu", mu)

    @property
    def mu_norm(self) -> float:
        return math.hypot(*self.mu)

    @classmethod
    def from_norm(cls, mu_norm: float, eta: float) -> "FadingParams":
        """Equal components with Euclidean norm ``mu_norm``."""
        c = mu_norm / math.sqrt(2.0)
        return cls((c, c), eta)


@dataclass(frozen=True)
class FadingState:
    """Fading vectors at time ``t``; ``g`` has shape (..., 2)."""

    g: np.ndarray
    t: float = 0.0

    @property
    def magnitude(self):
        return np.hypot(self.g[..., 0], self.g[..., 1])

    @classmethod
    def zeros(cls, n_paths: int | None = None) -> "FadingState":
        shape = (2,) if n_paths is None else (n_paths, 2)
        return cls(np.zeros(shape), 0.0)


def evolve_fading(state: FadingState, dt: float, params: FadingParams,
                  rng: np.random.Generator) -> FadingState:
    """Advance every fading vector by ``dt`` with the exact OU transition."""
    if not dt > 0:
        raise ParameterError("dt must be positive")
    mu = np.asarray(params.mu)
    decay = math.exp(-0.5 * dt)
    sd = params.eta * math.sqrt(-math.expm1(-dt))
    g = np.asarray(state.g, dtype=float)
    g_new = mu + (g - mu) * decay
    if sd > 0:
        g_new = g_new + sd * rng.standard_normal(g.shape)
    return FadingState(g_new, state.t + dt)


@dataclass(frozen=True)
class RicianMarginal:
    nu: float
    s: float

    def __post_init__(self):
        if not (self.nu >= 0 and self.s >= 0):
            raise ParameterError("Rician parameters must be non-negative")

    @property
    def degenerate(self) -> bool:
        return self.s == 0.0


def fading_marginal(t: float, params: FadingParams, mode: str = "paper") -> RicianMarginal:
    """Law of |g(t)| for g(0) = 0.

    ``mode="paper"`` uses scale eta (1 - e^{-t}); ``mode="sde"`` uses the
    exact OU standard deviation eta sqrt(1 - e^{-t}).  ``t`` may be
    ``math.inf`` for the stationary law Rice(|mu|, eta).
    """
    if not t >= 0:
        raise ParameterError("t must be non-negative")
    if mode not in MARGINAL_MODES:
        raise ParameterError(f"unknown marginal mode {mode!r}")
    if math.isinf(t):
        return RicianMarginal(params.mu_norm, params.eta)
    nu = params.mu_norm * -math.expm1(-0.5 * t)
    frac = -math.expm1(-t)
    s = params.eta * (frac if mode == "paper" else math.sqrt(frac))
    return RicianMarginal(nu, s)


def component_gaussian(t: float, params: FadingParams, mode: str = "sde", component: int = 0):
    """Mean and standard deviation of one fading component at time ``t``."""
    mu = params.mu[component]
    if math.isinf(t):
        return mu, params.eta
    frac = -math.expm1(-t)
    sd = params.eta * (frac if mode == "paper" else math.sqrt(frac))
    return mu * -math.expm1(-0.5 * t), sd


def fading_second_moment(marginal: RicianMarginal) -> float:
    """E|g|^2 = nu^2 + 2 s^2."""
    return marginal.nu ** 2 + 2.0 * marginal.s ** 2


def rician_pdf(r, marginal: RicianMarginal):
    r = np.asarray(r, dtype=float)
    nu, s = marginal.nu, marginal.s
    if s == 0:
        raise DomainError("degenerate Rician law has no density")
    s2 = s * s
    # i0e(x) = exp(-x) I0(x), which folds exp(-(r^2+nu^2)/2s^2 + r nu/s^2) into exp(-(r-nu)^2/2s^2)
    out = r / s2 * np.exp(-(r - nu) ** 2 / (2 * s2)) * special.i0e(r * nu / s2)
    return np.where(r >= 0, out, 0.0)


def rician_expectation(func, marginal: RicianMarginal, epsabs: float = 1e-13, epsrel: float = 1e-12) -> float:
    """E[func(|g|)] by adaptive quadrature over the Rician density."""
    nu, s = marginal.nu, marginal.s
    if s == 0:
        return float(func(nu))
    upper = nu + 40.0 * s
    # split at the bulk so QUADPACK resolves the peak and the log singularity at 0
    cuts = sorted({0.0, max(nu - 8 * s, 0.0), nu, nu + 8 * s, upper})

    def integrand(r):
        pdf = rician_pdf(r, marginal)
        return func(r) * pdf if pdf > 0 else 0.0

    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b - a <= 1e-12 * s:
            continue
        val, _ = integrate.quad(integrand, a, b, epsabs=epsabs, epsrel=epsrel, limit=200)
        total += val
    return total


def fading_log_moment(marginal: RicianMarginal) -> float:
    """E[log |g|] under Rice(nu, s)."""
    if marginal.nu == 0 and marginal.s == 0:
        raise DomainError("E[log|g|] is undefined for |g| = 0 almost surely")
    if marginal.s == 0:
        return math.log(marginal.nu)
    if marginal.nu == 0:
        # Rayleigh: |g|^2 / (2 s^2) ~ Exp(1), so E log|g| = (log(2 s^2) - gamma) / 2
        return 0.5 * (math.log(2 * marginal.s ** 2) - np.euler_gamma)
    return rician_expectation(np.log, marginal)


def sample_rician(marginal: RicianMarginal, size, rng: np.random.Generator) -> np.ndarray:
    """Draw |g| for ``size`` independent links."""
    theta = 2.0 * math.pi * rng.random(size)
    x = marginal.nu * np.cos(theta) + marginal.s * rng.standard_normal(size)
    y = marginal.nu * np.sin(theta) + marginal.s * rng.standard_normal(size)
    return np.hypot(x, y)


def _gaussian_pdf(u, mean, sd):
    return np.exp(-0.5 * ((u - mean) / sd) ** 2) / (sd * math.sqrt(2 * math.pi))


def fpk_residual(params: FadingParams, t: float, h: float, mode: str = "sde",
                 component: int = 0, half_width: float = 6.0) -> float:
    """Sup-norm residual of the Fokker-Planck equation on Gaussian marginals.

    Checks

        df/dt = 1/2 d/du[(u - mu) f] + eta^2 / 2 d^2f/du^2

    with second-order central differences of step ``h`` in both ``u`` and
    ``t`` on a grid spanning ``half_width`` standard deviations.  For the
    exact (``sde``) marginals the residual is O(h^2).
    """
    if not h > 0:
        raise ParameterError("grid step must be positive")
    if params.eta == 0:
        raise ParameterError("the density needs eta > 0")
    mu = params.mu[component]
    mean, sd = component_gaussian(t, params, mode, component)
    if not math.isinf(t) and t - h <= 0:
        raise ParameterError("t must exceed the step h")
    n = int(math.ceil(half_width * sd / h))
    u = mean + h * np.arange(-n, n + 1)

    def f(uu, tt):
        m, s = component_gaussian(tt, params, mode, component)
        return _gaussian_pdf(uu, m, s)

    if math.isinf(t):
        df_dt = np.zeros_like(u)
    else:
        df_dt = (f(u, t + h) - f(u, t - h)) / (2 * h)
    q = lambda uu: (uu - mu) * f(uu, t)
    drift = 0.5 * (q(u + h) - q(u - h)) / (2 * h)
    diffusion = 0.5 * params.eta ** 2 * (f(u + h, t) - 2 * f(u, t) + f(u - h, t)) / h ** 2
    return float(np.max(np.abs(df_dt - drift - diffusion)))
