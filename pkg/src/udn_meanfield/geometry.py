"""Poisson deployments, nearest-BS association and BS activity.

Points are stored as ``(n, 2)`` float arrays; a row is one planar
coordinate.  All samplers take an explicit ``numpy.random.Generator``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from .errors import NoBaseStationError, ParameterError

# Below this many candidates a dense distance matrix beats building a tree.
_BRUTE_FORCE_LIMIT = 64

# Shape parameter of the gamma fit to the Poisson-Voronoi cell area.
VORONOI_AREA_SHAPE = 3.5


@dataclass(frozen=True)
class DensityConfig:
    lambda_b: float
    lambda_u: float
    R: float

    def __post_init__(self):
        if not (self.lambda_b >= 0 and self.lambda_u >= 0):
            raise ParameterError("densities must be non-negative")
        if not self.R > 0:
            raise ParameterError("reception radius R must be positive")


@dataclass(frozen=True)
class NetworkSnapshot:
    """One spatial realisation seen from a typical user at the origin.

    ``serving_index`` is ``None`` when the window holds no BS.
    """

    bs_points: np.ndarray
    user_points: np.ndarray
    active: np.ndarray
    serving_index: Optional[int]
    window_radius: float
    activity_mode: str = "voronoi"
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def outage(self) -> bool:
        return self.serving_index is None

    def interferer_indices(self) -> np.ndarray:
        """Indices of active BSs other than the serving one."""
        idx = np.flatnonzero(self.active)
        if self.serving_index is not None:
            idx = idx[idx != self.serving_index]
        return idx


def _as_points(points) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.size == 0:
        return np.empty((0, 2))
    arr = arr.reshape(-1, 2)
    if not np.all(np.isfinite(arr)):
        raise ParameterError("point coordinates must be finite")
    return arr


def sample_ppp(density: float, radius: float, rng: np.random.Generator) -> np.ndarray:
    """Homogeneous PPP on the disk of the given radius centred at the origin."""
    if density < 0:
        raise ParameterError(f"density must be non-negative, got {density}")
    if not radius > 0:
        raise ParameterError(f"radius must be positive, got {radius}")
    n = rng.poisson(density * math.pi * radius * radius)
    if n == 0:
        return np.empty((0, 2))
    r = radius * np.sqrt(rng.random(n))
    theta = 2.0 * math.pi * rng.random(n)
    return np.column_stack((r * np.cos(theta), r * np.sin(theta)))


def nearest_bs(target, bs_points) -> tuple[int, float]:
    """Index and distance of the BS closest to ``target``.

    Ties go to the lowest index.  Raises NoBaseStationError for an empty set;
    callers treat that as an outage.
    """
    pts = _as_points(bs_points)
    if len(pts) == 0:
        raise NoBaseStationError("no base station available for association")
    t = np.asarray(target, dtype=float).reshape(2)
    d = np.hypot(pts[:, 0] - t[0], pts[:, 1] - t[1])
    i = int(np.argmin(d))  # argmin returns the first minimiser
    return i, float(d[i])


def associate(user_points, bs_points) -> np.ndarray:
    """Nearest-BS index for every user (lowest index on ties)."""
    users = _as_points(user_points)
    bss = _as_points(bs_points)
    if len(users) == 0:
        return np.empty(0, dtype=int)
    if len(bss) == 0:
        raise NoBaseStationError("no base station available for association")
    if len(bss) <= _BRUTE_FORCE_LIMIT:
        d = np.hypot(users[:, None, 0] - bss[None, :, 0], users[:, None, 1] - bss[None, :, 1])
        return np.argmin(d, axis=1)
    tree = cKDTree(bss)
    dist, idx = tree.query(users, k=2)
    nearest = idx[:, 0].copy()
    # near-ties (possibly many-way) are resolved exactly against all candidates
    tie = dist[:, 1] <= dist[:, 0] * (1 + 1e-9)
    for u in np.flatnonzero(tie):
        cand = np.array(tree.query_ball_point(users[u], dist[u, 0] * (1 + 1e-9) + 1e-300))
        d = np.hypot(bss[cand, 0] - users[u, 0], bss[cand, 1] - users[u, 1])
        nearest[u] = cand[d == d.min()].min()
    return nearest


def compute_active_flags(bs_points, user_points) -> np.ndarray:
    """Flag BSs whose Voronoi cell holds at least one user."""
    bss = _as_points(bs_points)
    flags = np.zeros(len(bss), dtype=bool)
    users = _as_points(user_points)
    if len(users) == 0 or len(bss) == 0:
        return flags
    flags[associate(users, bss)] = True
    return flags


def coverage_probability(cfg: DensityConfig) -> float:
    """Probability that the reception ball holds at least one BS."""
    return float(-math.expm1(-math.pi * cfg.lambda_b * cfg.R ** 2))


def active_probability(lambda_b: float, lambda_u: float) -> float:
    """Gamma-approximated probability that a BS serves at least one user.

    Uses p_a = 1 - (1 + lambda_u / (3.5 lambda_b))^-3.5, which is accurate
    when lambda_b / lambda_u is large.
    """
    if not lambda_b > 0:
        raise ParameterError("active probability needs lambda_b > 0")
    if lambda_u < 0:
        raise ParameterError("lambda_u must be non-negative")
    k = VORONOI_AREA_SHAPE
    return float(-math.expm1(-k * math.log1p(lambda_u / (k * lambda_b))))


def truncation_radius(alpha: float, tol: float = 1e-3) -> float:
    """Window radius whose outside share of mean bounded-path-loss interference is ``tol``.

    The mean of sum min(1, r^-alpha) over a unit PPP is pi (inside r < 1)
    plus 2 pi / (alpha - 2) (outside); the part beyond W >= 1 is
    2 pi W^(2 - alpha) / (alpha - 2).
    """
    if not alpha > 2:
        raise ParameterError("alpha must exceed 2")
    if not 0 < tol < 1:
        raise ParameterError("tol must lie in (0, 1)")
    tail = 2.0 / (alpha - 2.0)
    total = 1.0 + tail
    w = (tail / (tol * total)) ** (1.0 / (alpha - 2.0))
    return max(1.0, w)


def generate_snapshot(
    cfg: DensityConfig,
    rng: np.random.Generator,
    activity_mode: str = "voronoi",
    window_radius: Optional[float] = None,
    include_typical_user: bool = True,
    p_active: Optional[float] = None,
) -> NetworkSnapshot:
    """Draw BSs and users on a disk and decide which BSs transmit.

    ``voronoi`` mode flags BSs with a non-empty cell; ``thinning`` mode keeps
    each BS independently with probability ``p_active`` (default
    :func:`active_probability`).  With ``include_typical_user`` a user sits at
    the origin, so its serving BS is always active.
    """
    w = cfg.R if window_radius is None else float(window_radius)
    bs = sample_ppp(cfg.lambda_b, w, rng)
    if activity_mode == "voronoi":
        users = sample_ppp(cfg.lambda_u, w, rng)
        if include_typical_user:
            users = np.vstack((np.zeros((1, 2)), users))
        active = compute_active_flags(bs, users)
    elif activity_mode == "thinning":
        users = np.zeros((1, 2)) if include_typical_user else np.empty((0, 2))
        p = active_probability(cfg.lambda_b, cfg.lambda_u) if p_active is None else p_active
        active = rng.random(len(bs)) < p
    else:
        raise ParameterError(f"unknown activity mode {activity_mode!r}")

    serving = None
    if len(bs):
        serving, _ = nearest_bs((0.0, 0.0), bs)
        if include_typical_user:
            active[serving] = True
    return NetworkSnapshot(bs, users, active, serving, w, activity_mode)
