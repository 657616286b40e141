"""Explicit smoothing of a cone vertex with a curvature bound.

Around a vertex of total angle ``2*pi*alpha`` on a polyhedral surface with
faces of curvature ``kappa`` the metric is ``lambda(r) (dr^2 + r^2 dtheta^2)``
with

    lambda(r) = 4 alpha^2 r^(2(alpha-1)) / (1 + kappa r^(2 alpha))^2.

The smoothed factor keeps ``lambda`` for ``r >= delta`` and integrates a
blended log-derivative ``g`` inwards:

    lambda_delta(r) = lambda(delta) * exp(int_delta^r g(t) dt)

where ``g = (log lambda)' * phi + (log lambda_bar)' * (1 - phi)`` and
``phi = phi_{delta/2, delta}`` is a smooth step. ``lambda_bar`` is the
constant 4 (``mode="flat"``), the unit hyperbolic weight ``4/(1-r^2)^2``
(``mode="hyperbolic"``) or the unit spherical weight ``4/(1+r^2)^2``
(``mode="spherical-cbb"``). Vertices with ``alpha > 1`` (cone angle above
``2*pi``) are smoothed keeping curvature at most ``kappa``; vertices with
``alpha < 1`` keeping curvature at least ``kappa``.

All kernels work in a normalised coordinate where the curvature has been
rescaled into the range a mode can handle; results are mapped back.
"""

from __future__ import annotations

import bisect
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Literal, NamedTuple

import numpy as np

from .model_space import model_space
from .quadrature import integrate

Mode = Literal["flat", "hyperbolic", "spherical-cbb"]
MODES = ("flat", "hyperbolic", "spherical-cbb")

DELTA_SHRINK = 1e-6
CHECK_POINTS = 2048
GRID_FLOOR = 1e-6


class SmoothingError(ValueError):
    """Parameters for which no admissible smoothing exists."""


# ----------------------------------------------------------------------
# cone metric


@dataclass(frozen=True)
class ConeMetric:
    """Radial conformal factor of a cone vertex.

    ``alpha`` is the total angle over ``2*pi`` and ``radius`` the conformal
    radius up to which the formula describes the surface.
    """

    alpha: float
    kappa: float
    radius: float = 1.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        if self.kappa < 0 and self.radius ** (2 * self.alpha) * -self.kappa >= 1.0:
            raise ValueError(
                f"radius {self.radius} reaches the boundary of the hyperbolic chart "
                f"at {(-self.kappa) ** (-1 / (2 * self.alpha)):.6g}"
            )

    @property
    def conical(self) -> bool:
        return self.alpha != 1.0

    @property
    def side(self) -> str:
        """``"cat"`` for alpha > 1, ``"cbb"`` for alpha < 1, ``"smooth"`` otherwise."""
        if self.alpha > 1:
            return "cat"
        if self.alpha < 1:
            return "cbb"
        return "smooth"


def _check_r(r):
    if np.any(np.asarray(r) <= 0):
        raise ValueError("radius must be positive")


def cone_factor(c: ConeMetric, r):
    _check_r(r)
    a, k = c.alpha, c.kappa
    return 4 * a * a * r ** (2 * (a - 1)) / (1 + k * r ** (2 * a)) ** 2


def log_deriv(c: ConeMetric, r):
    """First radial derivative of ``log lambda``."""
    _check_r(r)
    a, k = c.alpha, c.kappa
    u = k * r ** (2 * a)
    return (-2 + 2 * a - 2 * u * (1 + a)) / (r * (1 + u))


def log_deriv2(c: ConeMetric, r):
    """Second radial derivative of ``log lambda``."""
    _check_r(r)
    a, k = c.alpha, c.kappa
    u = k * r ** (2 * a)
    return -2 * (a - 1) / r**2 - 4 * a * k * r ** (2 * a - 2) * ((2 * a - 1) - u) / (1 + u) ** 2


def cone_laplacian(c: ConeMetric, r):
    """``(log lambda)'' + (log lambda)'/r`` with the ``1/r^2`` terms cancelled by hand."""
    _check_r(r)
    a, k = c.alpha, c.kappa
    u = k * r ** (2 * a)
    return -4 * a * k * r ** (2 * a - 2) * ((2 * a - 1 - u) / (1 + u) ** 2 + 1 / (1 + u))


def cone_curvature(c: ConeMetric, r):
    """Gaussian curvature of the unsmoothed cone metric away from the vertex."""
    return -cone_laplacian(c, r) / (2 * cone_factor(c, r))


# ----------------------------------------------------------------------
# cutoff


def _logistic_parts(z):
    """Return ``sigma(z)`` and ``sigma(z)(1 - sigma(z))`` without overflow."""
    e = np.exp(-np.abs(z))
    sig = np.where(z >= 0, 1 / (1 + e), e / (1 + e))
    return sig, e / (1 + e) ** 2


def cutoff(a: float, b: float, r, derivatives: int = 0):
    """Smooth step: 0 on ``(-inf, a]``, 1 on ``[b, inf)``.

    With ``derivatives=2`` returns ``(phi, phi', phi'')``. Inside ``(a, b)``
    the step is ``e^{-1/(r-a)} / (e^{-1/(b-r)} + e^{-1/(r-a)})``, written as a
    logistic of ``1/(b-r) - 1/(r-a)``.
    """
    if not a < b:
        raise ValueError(f"cutoff needs a < b, got {a}, {b}")
    r = np.asarray(r, dtype=float)
    inside = (r > a) & (r < b)
    x = np.where(inside, r - a, 1.0)
    y = np.where(inside, b - r, 1.0)
    z = 1 / y - 1 / x
    sig, s1 = _logistic_parts(z)
    phi = np.where(r >= b, 1.0, np.where(inside, sig, 0.0))
    if derivatives == 0:
        return phi[()] if phi.ndim == 0 else phi
    with np.errstate(over="ignore", invalid="ignore"):
        dz = 1 / y**2 + 1 / x**2
        d2z = 2 / y**3 - 2 / x**3
        d1 = np.where(inside & (s1 > 0), s1 * dz, 0.0)
        d2 = np.where(inside & (s1 > 0), s1 * ((1 - 2 * sig) * dz * dz + d2z), 0.0)
    d1 = np.nan_to_num(d1, nan=0.0, posinf=0.0)
    d2 = np.nan_to_num(d2, nan=0.0, posinf=0.0, neginf=0.0)
    out = (phi, d1, d2)
    return tuple(x[()] if x.ndim == 0 else x for x in out)


# ----------------------------------------------------------------------
# background weights (unit curvature -1, 0, +1)


def _bar_log_derivs(mode: str, r, cut: float | None = None):
    """``(log w)'``, ``(log w)''`` and the Laplacian of ``log w`` for the background weight."""
    r = np.asarray(r, dtype=float)
    if mode == "flat":
        z = np.zeros_like(r)
        return z, z, z
    if cut is not None:
        # only needed where the cutoff is below 1; avoids the hyperbolic pole
        r = np.where(r < cut, r, 0.0)
    if mode == "hyperbolic":
        d1 = 4 * r / (1 - r * r)
        d2 = 4 * (1 + r * r) / (1 - r * r) ** 2
        return d1, d2, 8 / (1 - r * r) ** 2
    d1 = -4 * r / (1 + r * r)
    d2 = -4 * (1 - r * r) / (1 + r * r) ** 2
    return d1, d2, -8 / (1 + r * r) ** 2


def _bar_weight(mode: str, r):
    if mode == "flat":
        return 4.0 * np.ones_like(np.asarray(r, dtype=float))
    if mode == "hyperbolic":
        return 4 / (1 - r * r) ** 2
    return 4 / (1 + r * r) ** 2


# ----------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class SmoothingParams:
    delta: float
    mode: Mode = "flat"
    tolerance: float = 1e-10

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if not self.delta > 0:
            raise ValueError("delta must be positive")


def _normalisation(c: ConeMetric, mode: str) -> float:
    """Coordinate scale ``t`` with ``r = t * rho`` bringing kappa into the mode's range."""
    if mode == "hyperbolic" and c.kappa < -1:
        return (-1 / c.kappa) ** (1 / (2 * c.alpha))
    if mode == "spherical-cbb" and c.kappa > 1:
        return (1 / c.kappa) ** (1 / (2 * c.alpha))
    return 1.0


def _check_mode(c: ConeMetric, mode: str):
    if c.alpha == 1.0:
        return
    if mode == "flat":
        if c.alpha > 1 and c.kappa < 0:
            raise SmoothingError("flat interpolation above a cone needs kappa >= 0; use hyperbolic")
        if c.alpha < 1 and c.kappa > 0:
            raise SmoothingError("flat interpolation below a cone needs kappa <= 0; use spherical")
    elif mode == "hyperbolic" and c.alpha < 1:
        raise SmoothingError("hyperbolic interpolation applies to cone angles above 2*pi")
    elif mode == "spherical-cbb" and c.alpha > 1:
        raise SmoothingError("spherical interpolation applies to cone angles below 2*pi")


class SmoothedCone:
    """A cone metric together with admissible smoothing parameters.

    Evaluation methods accept scalars or numpy arrays of radii in the
    original coordinate.
    """

    def __init__(self, cone: ConeMetric, params: SmoothingParams, check: bool = True):
        _check_mode(cone, params.mode)
        self.cone = cone
        self.params = params
        self.mode = params.mode
        self.scale = _normalisation(cone, params.mode)
        t = self.scale
        self.norm = ConeMetric(cone.alpha, cone.kappa * t ** (2 * cone.alpha), cone.radius / t)
        self.delta = params.delta
        self.ndelta = params.delta / t
        if check and cone.alpha != 1.0:
            reasons = _violations(self.norm, self.mode, self.ndelta)
            if reasons:
                raise SmoothingError(f"delta={params.delta:g} is not admissible: " + "; ".join(reasons))
        self._plateau = None
        self._cache = ([self.ndelta], [0.0])

    # -- normalised-coordinate kernels -----------------------------------

    def _g(self, rho):
        rho = np.asarray(rho, dtype=float)
        phi = cutoff(self.ndelta / 2, self.ndelta, rho)
        bar1, _, _ = _bar_log_derivs(self.mode, rho, self.ndelta)
        return log_deriv(self.norm, rho) * phi + bar1 * (1 - phi)

    def _g_prime(self, rho):
        rho = np.asarray(rho, dtype=float)
        phi, dphi, _ = cutoff(self.ndelta / 2, self.ndelta, rho, derivatives=2)
        bar1, bar2, _ = _bar_log_derivs(self.mode, rho, self.ndelta)
        l1 = log_deriv(self.norm, rho)
        return log_deriv2(self.norm, rho) * phi + l1 * dphi + bar2 * (1 - phi) - bar1 * dphi

    def _laplacian(self, rho):
        """``g' + g/rho`` assembled from the non-singular pieces."""
        rho = np.asarray(rho, dtype=float)
        phi, dphi, _ = cutoff(self.ndelta / 2, self.ndelta, rho, derivatives=2)
        bar1, _, bar_lap = _bar_log_derivs(self.mode, rho, self.ndelta)
        return (
            cone_laplacian(self.norm, rho) * phi
            + bar_lap * (1 - phi)
            + (log_deriv(self.norm, rho) - bar1) * dphi
        )

    def _g_scalar(self, rho: float) -> float:
        """Pure-float version of ``_g`` for the quadrature inner loop."""
        a, k = self.norm.alpha, self.norm.kappa
        lo, hi = 0.5 * self.ndelta, self.ndelta
        u = k * rho ** (2 * a)
        l1 = (-2 + 2 * a - 2 * u * (1 + a)) / (rho * (1 + u))
        if rho >= hi:
            return l1
        if rho <= lo:
            phi = 0.0
        else:
            z = 1 / (hi - rho) - 1 / (rho - lo)
            phi = 1 / (1 + math.exp(-z)) if z >= 0 else math.exp(z) / (1 + math.exp(z))
        if self.mode == "flat":
            bar = 0.0
        elif self.mode == "hyperbolic":
            bar = 4 * rho / (1 - rho * rho)
        else:
            bar = -4 * rho / (1 + rho * rho)
        return l1 * phi + bar * (1 - phi)

    def _integral_to_delta(self, rho: float, tol: float | None = None) -> float:
        """``int_rho^delta g`` for ``delta/2 <= rho <= delta``."""
        tol = self.params.tolerance if tol is None else tol
        return integrate(self._g_scalar, rho, self.ndelta, tol=tol)

    def _integral_cached(self, rho: float) -> float:
        """``int_rho^delta g`` reusing the nearest previously computed radius.

        Meant for outer quadratures that sample many nearby radii; each new
        value costs one short integral instead of one over the whole band.
        """
        keys, vals = self._cache
        i = bisect.bisect_left(keys, rho)
        if i < len(keys) and keys[i] == rho:
            return vals[i]
        j = i if i < len(keys) and (i == 0 or keys[i] - rho < rho - keys[i - 1]) else i - 1
        value = vals[j] + integrate(self._g_scalar, rho, keys[j], tol=self.params.tolerance * 1e-3)
        keys.insert(i, rho)
        vals.insert(i, value)
        return value

    def _factor_cached(self, rho: float) -> float:
        d = self.ndelta
        if self.cone.alpha == 1.0 or rho >= d or rho < d / 2:
            return self._factor_scalar(rho)
        return float(cone_factor(self.norm, d)) * math.exp(-self._integral_cached(rho))

    def _plateau_value(self) -> float:
        if self._plateau is None:
            half = self.ndelta / 2
            self._plateau = float(
                cone_factor(self.norm, self.ndelta) * math.exp(-self._integral_to_delta(half))
            )
        return self._plateau

    def _factor_scalar(self, rho: float, tol: float | None = None) -> float:
        d = self.ndelta
        if self.cone.alpha == 1.0:
            # no vertex: the model factor is smooth through the origin
            return 4.0 / (1 + self.norm.kappa * rho * rho) ** 2
        if rho >= d:
            return float(cone_factor(self.norm, rho))
        half = d / 2
        if rho >= half:
            return float(cone_factor(self.norm, d) * math.exp(-self._integral_to_delta(rho, tol)))
        w = _bar_weight(self.mode, np.float64(rho)) / _bar_weight(self.mode, np.float64(half))
        return float(self._plateau_value() * w)

    def _factor_profile(self, rho: np.ndarray) -> np.ndarray:
        """Vectorised factor on a sorted grid via cumulative integration."""
        rho = np.asarray(rho, dtype=float)
        out = np.empty_like(rho)
        d = self.ndelta
        if self.cone.alpha == 1.0:
            return cone_factor(self.norm, rho)
        outer = rho >= d
        out[outer] = cone_factor(self.norm, rho[outer])
        half = d / 2
        band = (rho >= half) & (rho < d)
        # integrate from delta down to delta/2 piece by piece so the plateau
        # value is the end of the same cumulative sum
        nodes = np.unique(np.concatenate([[half, d], rho[band]]))[::-1]
        tol = self.params.tolerance / len(nodes)
        pieces = [integrate(self._g_scalar, lo, hi, tol=tol) for hi, lo in zip(nodes[:-1], nodes[1:])]
        lookup = dict(zip(nodes[1:], np.cumsum(pieces)))
        lam_d = float(cone_factor(self.norm, d))
        out[band] = [lam_d * math.exp(-lookup[x]) for x in rho[band]]
        inner = rho < half
        if np.any(inner):
            w = _bar_weight(self.mode, rho[inner]) / _bar_weight(self.mode, np.float64(half))
            out[inner] = lam_d * math.exp(-lookup[half]) * w
        return out

    # -- public evaluation (original coordinate) -----------------------

    def _to_norm(self, r):
        return np.asarray(r, dtype=float) / self.scale

    def _factor_scale(self) -> float:
        return self.scale ** (2 * self.cone.alpha - 2)

    def factor(self, r):
        """Smoothed conformal factor ``lambda_delta(r)``."""
        _check_r(r)
        if np.ndim(r) == 0:
            return self._factor_scale() * self._factor_scalar(float(r) / self.scale)
        return self._factor_scale() * self._factor_profile(self._to_norm(r))

    def g(self, r):
        """Radial derivative of ``log lambda_delta``."""
        return self._g(self._to_norm(r)) / self.scale

    def g_prime(self, r):
        return self._g_prime(self._to_norm(r)) / self.scale**2

    def curvature(self, r, factor=None):
        """Gaussian curvature ``-(g' + g/r) / (2 lambda_delta)``."""
        _check_r(r)
        rho = self._to_norm(r)
        if self.cone.alpha == 1.0:
            k = cone_curvature(self.norm, rho)
        else:
            lam = self._factor_profile(np.atleast_1d(rho)) if factor is None else np.atleast_1d(factor) / self._factor_scale()
            k = -np.atleast_1d(self._laplacian(rho)) / (2 * lam)
            k = k.reshape(np.shape(rho))
        k = k / self.scale ** (2 * self.cone.alpha)
        return k[()] if np.ndim(k) == 0 else k


# ----------------------------------------------------------------------
# admissibility


def _violations(c: ConeMetric, mode: str, delta: float) -> list[str]:
    """Reasons why ``delta`` (normalised coordinate) is not admissible."""
    out = []
    if delta > c.radius:
        out.append(f"delta exceeds the validity radius {c.radius:g}")
    if mode == "hyperbolic" and delta >= 1:
        out.append("hyperbolic interpolation needs delta < 1")
    grid = np.geomspace(GRID_FLOOR * delta, delta, CHECK_POINTS)
    l1 = log_deriv(c, grid)
    bar1, _, _ = _bar_log_derivs(mode, grid)
    if c.alpha > 1:
        if np.any(l1 - bar1 < 0):
            out.append("log-derivative comparison fails on (0, delta]")
        if c.kappa > 0 and cone_factor(c, delta) > 1:
            out.append("lambda(delta) > 1")
        if mode == "flat" and c.kappa == 0 and cone_factor(c, delta) > 1:
            out.append("lambda(delta) > 1")
    else:
        if np.any(l1 - bar1 > 0):
            out.append("log-derivative comparison fails on (0, delta]")
    return out


def _largest_admissible(c: ConeMetric, mode: str, upper: float) -> float:
    """Bisection for the largest delta <= upper passing the grid checks."""
    if not _violations(c, mode, upper):
        return upper
    lo, hi = 0.0, upper
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _violations(c, mode, mid):
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-15 * upper:
            break
    if lo == 0.0:
        raise SmoothingError("no admissible delta found")
    return lo


def lambda_one_radius(c: ConeMetric, upper: float) -> float:
    """Smallest radius in ``(0, upper]`` where ``lambda`` reaches 1 (``upper`` if never)."""
    if cone_factor(c, upper) <= 1:
        return upper
    lo, hi = 0.0, upper
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if cone_factor(c, mid) > 1:
            hi = mid
        else:
            lo = mid
    return lo


def critical_radius(c: ConeMetric) -> float:
    """Radius where ``(log lambda)'`` changes sign, infinite if it never does."""
    ratio = (c.alpha - 1) / (c.kappa * (1 + c.alpha)) if c.kappa != 0 else -1.0
    if ratio <= 0:
        return math.inf
    return ratio ** (1 / (2 * c.alpha))


def admissible_delta(c: ConeMetric, mode: Mode = "flat") -> float:
    """A smoothing radius for which the curvature bound argument applies.

    flat, alpha > 1: below the sign change of ``(log lambda)'``, below the
    radius where ``lambda = 1`` and below ``R``. hyperbolic/spherical: the
    largest radius on which the log-derivative comparison with the
    background weight holds on a 2048-point grid, found by bisection. The
    flat CBB case (alpha < 1, kappa <= 0) only needs the sign condition.
    """
    _check_mode(c, mode)
    if c.alpha == 1.0:
        return c.radius * (1 - DELTA_SHRINK)
    t = _normalisation(c, mode)
    n = ConeMetric(c.alpha, c.kappa * t ** (2 * c.alpha), c.radius / t)
    if mode == "flat":
        upper = min(critical_radius(n), n.radius)
        if n.alpha > 1:
            upper = lambda_one_radius(n, upper)
    else:
        upper = n.radius
        if mode == "hyperbolic":
            upper = min(upper, 1.0 - 1e-12)
        if n.alpha > 1 and n.kappa > 0:
            upper = lambda_one_radius(n, min(upper, critical_radius(n)))
        upper = _largest_admissible(n, mode, upper)
    return t * upper * (1 - DELTA_SHRINK)


# ----------------------------------------------------------------------
# convenience wrappers matching the operation list


def smoothed_factor(c: ConeMetric, p: SmoothingParams, r):
    return SmoothedCone(c, p).factor(r)


def gaussian_curvature(c: ConeMetric, p: SmoothingParams | None, r):
    """Curvature of the smoothed metric, or of the raw cone when ``p`` is None."""
    if p is None:
        _check_r(r)
        return cone_curvature(c, np.asarray(r, dtype=float))[()]
    return SmoothedCone(c, p).curvature(r)


class RadialProfile(NamedTuple):
    r: np.ndarray
    lam: np.ndarray
    K: np.ndarray
    provenance: str


def log_grid(delta: float, upper: float, n: int) -> np.ndarray:
    lo = GRID_FLOOR * delta
    grid = np.geomspace(lo, upper, n)
    # the junction radii themselves are always sampled
    return np.unique(np.concatenate([grid, [delta / 2, delta]]))


def profile(c: ConeMetric, p: SmoothingParams | None, grid_n: int = 1000) -> RadialProfile:
    if p is None:
        r = np.geomspace(GRID_FLOOR * c.radius, c.radius, grid_n)
        return RadialProfile(r, cone_factor(c, r), cone_curvature(c, r), "raw-cone")
    s = SmoothedCone(c, p)
    r = log_grid(p.delta, max(c.radius, p.delta), grid_n)
    lam = s.factor(r)
    return RadialProfile(r, lam, s.curvature(r, factor=lam), "smoothed")


# ----------------------------------------------------------------------
# certification


@dataclass
class Certificate:
    alpha: float
    kappa: float
    mode: str
    direction: str
    delta: float
    rescale: float
    grid_n: int
    max_excess_curvature: float
    monotone_ok: bool
    tail_match: float
    junction_jump: float
    key_inequality_margin: float | None
    experimental: bool = False
    details: dict = field(default_factory=dict)

    @property
    def tail_match_ok(self) -> bool:
        return self.tail_match <= 1e-12

    def passed(self, curvature_tol: float = 1e-6, tail_tol: float = 1e-12, jump_tol: float = 1e-6) -> bool:
        return (
            self.max_excess_curvature <= curvature_tol
            and self.monotone_ok
            and self.tail_match <= tail_tol
            and self.junction_jump <= jump_tol
        )

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__ if k != "details"}
        d["tail_match_ok"] = self.tail_match_ok
        d.update(self.details)
        return d


def _one_sided(f, x: float, h: float, side: int) -> tuple[float, float]:
    """Value and derivative at ``x`` extrapolated from one side (fourth-order stencils)."""
    f1, f2, f3, f4 = (f(x + side * k * h) for k in (1, 2, 3, 4))
    f0 = 4 * f1 - 6 * f2 + 4 * f3 - f4
    deriv = side * (-25 * f0 + 48 * f1 - 36 * f2 + 16 * f3 - 3 * f4) / (12 * h)
    return f0, deriv


def junction_jumps(s: SmoothedCone, h_rel: float = 3e-5) -> dict:
    """Relative jumps of value and first derivative at ``delta/2`` and ``delta``."""
    d = s.delta
    h = h_rel * d
    tight = min(s.params.tolerance, 1e-13)

    def lam(r):
        rho = r / s.scale
        return s._factor_scale() * s._factor_scalar(rho, tol=tight)

    out = {}
    for name, x in (("half", d / 2), ("delta", d)):
        lv, ld = _one_sided(lam, x, h, -1)
        rv, rd = _one_sided(lam, x, h, +1)
        ref = abs(lam(x))
        out[f"value_jump_{name}"] = abs(lv - rv) / ref
        out[f"deriv_jump_{name}"] = abs(ld - rd) / (ref / d)
    return out


def key_inequality_margin(s: SmoothedCone, r: np.ndarray) -> float | None:
    """Smallest relative slack of the inequality the curvature bound reduces to on ``(delta/2, delta)``.

    Flat blend: ``lambda_delta - lambda * phi``. Hyperbolic blend with
    negative curvature: ``lambda * phi + lambda_bar * (1 - phi) - lambda_delta``.
    Evaluated in the normalised coordinate where the cutoff is defined.
    ``None`` for the spherical blend, which has no such reduction.
    """
    if s.mode == "spherical-cbb":
        return None
    rho = np.asarray(r, dtype=float) / s.scale
    rho = rho[(rho > s.ndelta / 2) & (rho < s.ndelta)]
    if rho.size == 0:
        return None
    mu = s._factor_profile(rho)
    raw = cone_factor(s.norm, rho)
    phi = cutoff(s.ndelta / 2, s.ndelta, rho)
    if s.mode == "hyperbolic" and s.norm.kappa < 0:
        slack = raw * phi + _bar_weight("hyperbolic", rho) * (1 - phi) - mu
    else:
        slack = mu - raw * phi
    return float(np.min(slack) / np.max(mu))


def certify(c: ConeMetric, p: SmoothingParams, grid_n: int = 10_000) -> Certificate:
    """Numerically check the curvature bound and the shape of the smoothed factor.

    Sampled on a log grid from ``1e-6 * delta`` to ``R``. For ``alpha > 1``
    the reported excess is ``max(K_delta - kappa)``; for ``alpha < 1`` it is
    ``max(kappa - K_delta)``.
    """
    s = SmoothedCone(c, p)
    direction = "above" if c.alpha >= 1 else "below"
    r = log_grid(p.delta, max(c.radius, p.delta), grid_n)
    if c.alpha == 1.0:
        return Certificate(c.alpha, c.kappa, p.mode, direction, p.delta, s.scale, len(r),
                           float(np.max(np.abs(cone_curvature(c, r) - c.kappa))), True, 0.0, 0.0, 0.0)
    lam = s.factor(r)
    K = s.curvature(r, factor=lam)
    excess = K - c.kappa if direction == "above" else c.kappa - K
    inside = r <= p.delta
    steps = np.diff(lam[inside])
    slack = 1e-13 * np.max(lam[inside])
    monotone = bool(np.all(steps >= -slack)) if direction == "above" else bool(np.all(steps <= slack))
    outer = r >= p.delta
    tail = float(np.max(np.abs(lam[outer] - cone_factor(c, r[outer])) / cone_factor(c, r[outer])))
    jumps = junction_jumps(s)
    margin = key_inequality_margin(s, r)
    return Certificate(
        alpha=c.alpha,
        kappa=c.kappa,
        mode=p.mode,
        direction=direction,
        delta=p.delta,
        rescale=s.scale,
        grid_n=len(r),
        max_excess_curvature=float(np.max(excess)),
        monotone_ok=monotone,
        tail_match=tail,
        junction_jump=float(max(jumps.values())),
        key_inequality_margin=margin,
        experimental=p.mode == "spherical-cbb",
        details=jumps,
    )


# ----------------------------------------------------------------------
# cap size


def cap_geometry(c: ConeMetric, p: SmoothingParams) -> dict:
    """Area ``2 pi int_0^delta lambda_delta r dr`` and radial diameter ``2 int_0^delta sqrt(lambda_delta)``."""
    s = SmoothedCone(c, p)
    d = p.delta
    tol = p.tolerance

    def lam(r):
        return s._factor_scale() * s._factor_cached(r / s.scale)

    area = 2 * math.pi * integrate(lambda r: lam(r) * r, 0.0, d, tol=tol, breakpoints=[d / 2])
    radial = integrate(lambda r: math.sqrt(lam(r)), 0.0, d, tol=tol, breakpoints=[d / 2])
    return {"cap_area": area, "cap_diameter": 2 * radial}


# ----------------------------------------------------------------------
# whole-surface plan

MODE_ALIASES = {"cbb": "flat", "spherical": "spherical-cbb"}


def resolve_mode(mode: str) -> str:
    mode = MODE_ALIASES.get(mode, mode)
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES + tuple(MODE_ALIASES)}")
    return mode


class MixedDefectError(SmoothingError):
    pass


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("CATSURF_THREADS", "1")))
    except ValueError:
        return 1


def _plan_vertex(job: dict) -> dict:
    i, eps, mode, grid_n = job["index"], job["epsilon"], job["mode"], job["grid_n"]
    alpha, kappa, sep = job["alpha"], job["kappa"], job["separation"]
    budget = eps * 2.0**-i
    r_i = min(budget, sep / 2) / 2
    # conformal radius whose circle sits at distance r_i from the vertex
    R = float(model_space(kappa).radius_of_distance(r_i)) ** (1 / alpha)
    cone = ConeMetric(alpha, kappa, R)
    delta = admissible_delta(cone, mode)
    halvings = 0
    while True:
        cap = cap_geometry(cone, SmoothingParams(delta, mode))
        if cap["cap_area"] <= budget and cap["cap_diameter"] <= budget:
            break
        delta /= 2
        halvings += 1
        if halvings > 200:
            raise SmoothingError(f"vertex {job['vertex']}: cap does not shrink below {budget:g}")
    cert = certify(cone, SmoothingParams(delta, mode), grid_n=grid_n)
    return {
        "vertex": job["vertex"],
        "index": i,
        "alpha": alpha,
        "kappa": kappa,
        "omega": 2 * math.pi * (1 - alpha),
        "separation": sep,
        "r_i": r_i,
        "R_i": R,
        "delta_i": delta,
        "halvings": halvings,
        "mode": mode,
        "budget": budget,
        **cap,
        "certificate": cert.to_dict(),
        "certified": cert.passed(),
    }


def plan_surface_smoothing(surface, epsilon: float, mode: str = "flat", grid_n: int = 2000,
                           workers: int | None = None) -> dict:
    """Smoothing radii, cap sizes and certificates for every cone vertex of ``surface``.

    Vertices are numbered ``i = 1, 2, ...`` in increasing id order and get
    budget ``epsilon * 2**-i``; ``r_i`` is half of the smaller of that budget
    and half the separation from other vertices, so ``sum r_i < epsilon / 2``.
    """
    from .polyhedral import SMOOTH_TOL, cone_angle, vertex_separation

    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    mode = resolve_mode(mode)
    jobs = []
    for v in surface.vertices:
        angle = cone_angle(surface, v)
        if abs(angle - 2 * math.pi) < SMOOTH_TOL:
            continue
        ks = {surface.faces[f].kappa for f in surface.vertex_faces[v]}
        if len(ks) != 1:
            raise SmoothingError(f"vertex {v}: incident faces have different curvatures {sorted(ks)}")
        jobs.append({"vertex": v, "alpha": angle / (2 * math.pi), "kappa": ks.pop(),
                     "separation": vertex_separation(surface, v)})
    sides = {j["alpha"] > 1 for j in jobs}
    if len(sides) > 1:
        above = [j["vertex"] for j in jobs if j["alpha"] > 1]
        below = [j["vertex"] for j in jobs if j["alpha"] < 1]
        raise MixedDefectError(
            f"cone angles on both sides of 2*pi (above: {above}, below: {below}); one mode cannot treat both"
        )
    for j in jobs:
        _check_mode(ConeMetric(j["alpha"], j["kappa"]), mode)
    for i, j in enumerate(jobs, start=1):
        j.update(index=i, epsilon=epsilon, mode=mode, grid_n=grid_n)
    workers = thread_count() if workers is None else workers
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            entries = list(pool.map(_plan_vertex, jobs))
    else:
        entries = [_plan_vertex(j) for j in jobs]
    return {
        "epsilon": epsilon,
        "mode": mode,
        "grid_n": grid_n,
        "vertices": entries,
        "sum_r": math.fsum(e["r_i"] for e in entries),
        "all_certified": all(e["certified"] for e in entries),
    }
