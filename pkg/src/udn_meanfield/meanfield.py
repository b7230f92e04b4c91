"""Mean-field interference and its diagnostics.

The SINR at the typical user, divided through by N lambda_b^(alpha/2), is

    S_1 / (sigma'^2 + I_hat)

where sigma'^2 = sigma^2 / (N lambda_b^(alpha/2)) and I_hat is the
interference normalised by BS density and antenna count.  Two forms of
E[I_hat] are offered:

``closed``
    (lambda_u pi R)^2 / (sqrt(N) lambda_b^(alpha/2)) * (1 + tail) * P_hat * E|g|^2
    with tail = (1 - R^(2-alpha)) / (alpha - 2), or 1 / (alpha - 2) in the
    asymptotic branch.  This is the closed form used by the power control.
``campbell``
    the exact mean of the simulated quantity: active-interferer density
    p_a lambda_b times the integral of min(1, r^-alpha) over the reception
    disk, times P_hat E|g|^2 / (sqrt(N) lambda_b^(alpha/2)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import RicianMarginal, fading_log_moment, path_loss, sample_rician
from .errors import InsufficientDataError, ParameterError
from .geometry import active_probability

BRANCHES = ("finite-R", "asymptotic-R")
FORMS = ("closed", "campbell")

DEFAULT_A0_THRESHOLD = 100.0


@dataclass(frozen=True)
class NetworkConfig:
    """Scalar model parameters.

    ``asymptotic=True`` selects the R -> infinity branch; ``R`` is still
    used inside (lambda_u pi R)^2 by the closed forms.
    """

    lambda_b: float
    lambda_u: float
    n_antennas: int = 1
    alpha: float = 4.0
    R: float = 10.0
    noise: float = 1e-3
    p_max: float = 1.0
    p_c: float = 1.0
    asymptotic: bool = False

    def __post_init__(self):
        errors = self.violations()
        if errors:
            raise ParameterError("; ".join(errors))

    def violations(self) -> list[str]:
        out = []
        if not self.alpha > 2:
            out.append("alpha > 2")
        if not (self.lambda_b >= 0 and self.lambda_u >= 0):
            out.append("densities >= 0")
        if int(self.n_antennas) != self.n_antennas or self.n_antennas < 1:
            out.append("n_antennas >= 1 integer")
        if not self.R > 0:
            out.append("R > 0")
        if not self.noise >= 0:
            out.append("noise >= 0")
        if not self.p_max > 0:
            out.append("p_max > 0")
        if not self.p_c > 0:
            out.append("p_c > 0")
        return out

    @property
    def branch(self) -> str:
        return BRANCHES[1] if self.asymptotic else BRANCHES[0]

    def replace(self, **changes) -> "NetworkConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class MFInterference:
    value: float
    branch: str
    p_hat: float
    form: str = "closed"


@dataclass(frozen=True)
class UDNDiagnostics:
    ratio_a0: float
    ratio_a2: float
    threshold: float
    a0_satisfied: bool


def _require_bs(cfg: NetworkConfig):
    if not cfg.lambda_b > 0:
        raise ParameterError("lambda_b must be positive")


def density_scale(cfg: NetworkConfig) -> float:
    """lambda_b^(alpha/2), the signal scaling from the mapping theorem."""
    return cfg.lambda_b ** (cfg.alpha / 2.0)


def normalized_noise(cfg: NetworkConfig) -> float:
    _require_bs(cfg)
    return cfg.noise / (cfg.n_antennas * density_scale(cfg))


def _tail_coefficient(cfg: NetworkConfig) -> float:
    if cfg.asymptotic:
        return 1.0 / (cfg.alpha - 2.0)
    return (1.0 - cfg.R ** (2.0 - cfg.alpha)) / (cfg.alpha - 2.0)


def pathloss_integral(alpha: float, R: float = math.inf) -> float:
    """Integral of min(1, r^-alpha) over the disk of radius R (area measure)."""
    if R <= 1:
        return math.pi * R * R
    tail = 1.0 if math.isinf(R) else 1.0 - R ** (2.0 - alpha)
    return math.pi * (1.0 + 2.0 * tail / (alpha - 2.0))


def mean_pathloss_to_typical(cfg: NetworkConfig, form: str = "closed") -> float:
    """Mean of sum min(1, |z|^-alpha) over a density-lambda_u PPP on the reception ball.

    ``closed`` returns lambda_u pi (1 + (1 - R^(2-alpha)) / (alpha - 2));
    ``campbell`` evaluates the integral exactly, which carries a factor 2 on
    the tail term.
    """
    if form == "closed":
        return cfg.lambda_u * math.pi * (1.0 + _tail_coefficient(cfg))
    if form == "campbell":
        R = math.inf if cfg.asymptotic else cfg.R
        return cfg.lambda_u * pathloss_integral(cfg.alpha, R)
    raise ParameterError(f"unknown form {form!r}")


def mf_interference(cfg: NetworkConfig, p_hat: float, eg2: float, form: str = "closed") -> MFInterference:
    """Mean-field interference for population power ``p_hat`` and fading moment ``eg2``."""
    _require_bs(cfg)
    if p_hat < 0 or p_hat > cfg.p_max * (1 + 1e-12):
        raise ParameterError(f"p_hat must lie in [0, p_max], got {p_hat}")
    if eg2 < 0:
        raise ParameterError("fading second moment must be non-negative")
    norm = math.sqrt(cfg.n_antennas) * density_scale(cfg)
    if form == "closed":
        value = (cfg.lambda_u * math.pi * cfg.R) ** 2 / norm * (1.0 + _tail_coefficient(cfg)) * p_hat * eg2
    elif form == "campbell":
        lam_active = active_probability(cfg.lambda_b, cfg.lambda_u) * cfg.lambda_b
        R = math.inf if cfg.asymptotic else cfg.R
        value = lam_active * pathloss_integral(cfg.alpha, R) * p_hat * eg2 / norm
    else:
        raise ParameterError(f"unknown form {form!r}")
    return MFInterference(float(value), cfg.branch, float(p_hat), form)


def udn_condition_check(cfg: NetworkConfig, threshold: float = DEFAULT_A0_THRESHOLD) -> UDNDiagnostics:
    """Ratios N lambda_b^alpha / (lambda_u R)^4 and N lambda_b^alpha / lambda_u^4."""
    num = cfg.n_antennas * cfg.lambda_b ** cfg.alpha
    with np.errstate(divide="ignore"):
        a0 = num / (cfg.lambda_u * cfg.R) ** 4 if cfg.lambda_u > 0 else math.inf
        a2 = num / cfg.lambda_u ** 4 if cfg.lambda_u > 0 else math.inf
    return UDNDiagnostics(float(a0), float(a2), threshold, bool(a0 >= threshold))


def mf_rate(cfg: NetworkConfig, i_hat: MFInterference, fading: RicianMarginal, tx_power: float,
            rate_metric: str = "log") -> float:
    """Mean rate c1 + log(P / (sigma'^2 + I_hat)) under the high-SINR approximation.

    ``rate_metric="literal"`` returns E[1 + SINR] instead, using the same
    mean-field denominator and E[S_1] = P E|g|^2 E[r^-alpha] (finite only
    when alpha < 2, so it is reported as infinity for unbounded path loss).
    """
    from .ee import compute_c1

    denom = normalized_noise(cfg) + i_hat.value
    if not denom > 0:
        raise ParameterError("sigma'^2 + I_hat must be positive")
    if not tx_power > 0:
        raise ParameterError("tx_power must be positive")
    if rate_metric == "literal":
        # E[r^-alpha] diverges for the nearest point of a PPP when alpha >= 2
        return math.inf
    c1 = compute_c1(cfg.alpha, fading_log_moment(fading))
    return c1 + math.log(tx_power / denom)


@dataclass
class EmpiricalMeasure:
    """Pooled per-interferer statistics of P |h|^2 across snapshots."""

    mean: float
    std_error: float
    n_interferers: int
    n_snapshots: int
    mean_power: float
    mean_fading: float
    mean_pathloss: float
    histogram: tuple = field(repr=False, default=())

    @property
    def factorized(self) -> float:
        """E[P] E[|g|^2] E[l], the product form of the mean."""
        return self.mean_power * self.mean_fading * self.mean_pathloss


def empirical_mf_measure(snapshots, alpha: float, fading, rng: np.random.Generator,
                         tx_policy=1.0, bins: int = 32) -> EmpiricalMeasure:
    """Empirical mean-field measure of interferer states P_i |h_i0|^2.

    ``fading`` is a RicianMarginal to draw |g| from, or a callable
    ``(n, rng) -> |g|``.  ``tx_policy`` is a constant power or a callable
    ``(n, rng) -> powers``.
    """
    powers, gains, losses = [], [], []
    used = 0
    for snap in snapshots:
        idx = snap.interferer_indices()
        if len(idx) == 0:
            continue
        used += 1
        d = np.hypot(snap.bs_points[idx, 0], snap.bs_points[idx, 1])
        losses.append(path_loss(d, alpha) * np.ones(len(idx)))
        if isinstance(fading, RicianMarginal):
            g = sample_rician(fading, len(idx), rng)
        else:
            g = np.asarray(fading(len(idx), rng), dtype=float)
        gains.append(g ** 2)
        if callable(tx_policy):
            powers.append(np.asarray(tx_policy(len(idx), rng), dtype=float))
        else:
            powers.append(np.full(len(idx), float(tx_policy)))
    if used == 0:
        raise InsufficientDataError("no snapshot contains an active interferer")
    p = np.concatenate(powers)
    g2 = np.concatenate(gains)
    ell = np.concatenate(losses)
    x = p * g2 * ell
    n = len(x)
    se = float(np.std(x, ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    hist = np.histogram(x, bins=bins)
    return EmpiricalMeasure(float(np.mean(x)), se, n, used, float(np.mean(p)),
                            float(np.mean(g2)), float(np.mean(ell)), hist)


def kantorovich_gap(samples) -> float:
    """(m + M)^2 / (4 m M) for the sample minimum m and maximum M."""
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ParameterError("need at least one sample")
    if np.any(x <= 0):
        raise ParameterError("samples must be strictly positive")
    m, M = float(x.min()), float(x.max())
    return (m + M) ** 2 / (4.0 * m * M)
