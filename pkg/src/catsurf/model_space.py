"""Closed-form geometry of the constant-curvature model surfaces.

Points are complex numbers in the conformal chart with length element
``ds^2 = 4 |dz|^2 / (1 + kappa |z|^2)^2``. For ``kappa > 0`` this is the
stereographic picture of a sphere of radius ``1/sqrt(kappa)``, for
``kappa < 0`` a Poincare disk of radius ``1/sqrt(-kappa)`` and for
``kappa = 0`` the plane with doubled lengths.

Every isometry needed here is a Moebius map ``z -> (z - p) / (1 + kappa
conj(p) z)`` that moves ``p`` to the origin, where geodesics are rays and
distances have a one-variable closed form. Trigonometry uses half-angle
forms that are stable for small and large triangles alike and continuous
in ``kappa``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Union

import numpy as np

PointLike = Union[complex, tuple, list, np.ndarray]

# |kappa| * scale^2 below this switches to Euclidean formulas
FLAT_SWITCH = 1e-12
# relative slack on the triangle inequality before a triangle counts as degenerate
DEGENERACY_RTOL = 1e-12


class InvalidChartPoint(ValueError):
    """A point outside the domain of the chart."""


class InadmissibleTriangle(ValueError):
    """Side lengths that do not bound a triangle in the model surface."""


def as_point(p: PointLike) -> complex:
    if isinstance(p, complex):
        return p
    if isinstance(p, (int, float)):
        return complex(p, 0.0)
    x, y = p
    return complex(float(x), float(y))


class TriangleData(NamedTuple):
    """Sides, opposite angles, excess and area of a model triangle."""

    a: float
    b: float
    c: float
    alpha: float
    beta: float
    gamma: float
    kappa: float
    excess: float
    area: float

    @property
    def sides(self) -> tuple[float, float, float]:
        return (self.a, self.b, self.c)

    @property
    def angles(self) -> tuple[float, float, float]:
        return (self.alpha, self.beta, self.gamma)

    @property
    def perimeter(self) -> float:
        return self.a + self.b + self.c


@dataclass(frozen=True)
class ModelSpace:
    """The simply connected surface of constant curvature ``kappa``."""

    kappa: float
    _root: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        k = float(self.kappa)
        if not math.isfinite(k):
            raise ValueError(f"curvature must be finite, got {self.kappa!r}")
        object.__setattr__(self, "kappa", k)
        object.__setattr__(self, "_root", math.sqrt(abs(k)))

    # ------------------------------------------------------------------
    # scalar building blocks

    @property
    def diameter(self) -> float:
        """``pi / sqrt(kappa)`` for positive curvature, infinite otherwise."""
        if self.kappa > 0:
            return math.pi / self._root
        return math.inf

    def is_flat_at(self, scale: float) -> bool:
        return self.kappa == 0.0 or abs(self.kappa) * scale * scale < FLAT_SWITCH

    def sn(self, x):
        """Generalised sine: ``sin(sqrt(k) x)/sqrt(k)``, ``x`` or ``sinh`` analogue."""
        s = self._root
        if self.kappa == 0.0:
            return x * 1.0
        if self.kappa > 0:
            return np.sin(s * x) / s
        return np.sinh(s * x) / s

    def _asn(self, y, flat: bool):
        s = self._root
        if flat:
            return y * 1.0
        if self.kappa > 0:
            return np.arcsin(np.clip(s * y, -1.0, 1.0)) / s
        return np.arcsinh(s * y) / s

    def radius_of_distance(self, d):
        """Chart radius of the point at distance ``d`` from the origin."""
        s = self._root
        if self.kappa == 0.0:
            return d / 2.0
        if self.kappa > 0:
            return np.tan(s * d / 2.0) / s
        return np.tanh(s * d / 2.0) / s

    def distance_of_radius(self, rho):
        """Distance from the origin to a point of chart radius ``rho``."""
        s = self._root
        if self.kappa == 0.0:
            return 2.0 * rho
        if self.kappa > 0:
            return 2.0 * np.arctan(s * rho) / s
        return 2.0 * np.arctanh(s * rho) / s

    # ------------------------------------------------------------------
    # chart points and isometries

    def check_point(self, p: PointLike) -> complex:
        z = as_point(p)
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise InvalidChartPoint(f"non-finite chart point {z!r}")
        if self.kappa < 0 and abs(self.kappa) * abs(z) ** 2 >= 1.0:
            raise InvalidChartPoint(
                f"{z!r} lies outside the disk of radius {1 / self._root:.6g}"
            )
        return z

    def move_to_origin(self, p: complex, z):
        """Apply the isometry sending ``p`` to 0."""
        return (z - p) / (1.0 + self.kappa * np.conj(p) * z)

    def move_from_origin(self, p: complex, w):
        """Inverse of :meth:`move_to_origin`."""
        return (w + p) / (1.0 - self.kappa * np.conj(p) * w)

    def distance(self, p, q):
        """Model distance between chart points (vectorised over numpy arrays)."""
        scalar = not isinstance(p, np.ndarray) and not isinstance(q, np.ndarray)
        if scalar:
            p, q = self.check_point(p), self.check_point(q)
        else:
            p = np.asarray(p, dtype=complex)
            q = np.asarray(q, dtype=complex)
        num = np.abs(q - p)
        den = np.abs(1.0 + self.kappa * np.conj(p) * q)
        s = self._root
        if self.kappa == 0.0:
            d = 2.0 * num
        elif self.kappa > 0:
            d = 2.0 * np.arctan2(s * num, den) / s
        else:
            with np.errstate(divide="ignore"):
                d = 2.0 * np.arctanh(np.minimum(s * num / den, 1.0)) / s
        return float(d) if scalar else d

    def geodesic_point(self, p: PointLike, q: PointLike, s: float) -> complex:
        """Point at arclength ``s`` from ``p`` on the geodesic ``[pq]``."""
        p, q = self.check_point(p), self.check_point(q)
        d = self.distance(p, q)
        if self.kappa > 0 and d >= self.diameter * (1 - 1e-14):
            raise ValueError("antipodal endpoints: the geodesic is not unique")
        if s < 0 or s > d * (1 + 1e-12) + 1e-300:
            raise ValueError(f"arclength {s} outside [0, {d}]")
        if s == 0:
            return p
        if p == q:
            raise ValueError("p == q admits no positive arclength")
        if s >= d:
            return q
        return complex(self.geodesic_points(p, q, np.array([s]))[0])

    def geodesic_points(self, p: complex, q: complex, s: np.ndarray) -> np.ndarray:
        """Vectorised :meth:`geodesic_point` without range checks."""
        w = self.move_to_origin(p, q)
        direction = w / abs(w)
        return self.move_from_origin(p, direction * self.radius_of_distance(np.asarray(s, float)))

    def angle_at(self, p: PointLike, q: PointLike, r: PointLike) -> float:
        """Angle at ``p`` between the geodesics to ``q`` and ``r`` (the chart is conformal)."""
        p, q, r = self.check_point(p), self.check_point(q), self.check_point(r)
        u = self.move_to_origin(p, q)
        v = self.move_to_origin(p, r)
        return abs(math.atan2((v * u.conjugate()).imag, (v * u.conjugate()).real))

    # ------------------------------------------------------------------
    # projective charts: gnomonic (kappa > 0), Beltrami-Klein (kappa < 0)

    def to_projective(self, p: PointLike) -> complex:
        z = self.check_point(p)
        if self.kappa == 0.0:
            return z
        den = 1.0 - self.kappa * abs(z) ** 2
        if den <= 0.0:
            raise InvalidChartPoint(f"{z!r} is not inside the chart hemisphere")
        return 2.0 * z / den

    def from_projective(self, u: PointLike) -> complex:
        w = as_point(u)
        if self.kappa == 0.0:
            return w
        arg = 1.0 + self.kappa * abs(w) ** 2
        if arg <= 0.0:
            raise InvalidChartPoint(f"{w!r} lies outside the Klein disk")
        return w / (1.0 + math.sqrt(arg))

    # ------------------------------------------------------------------
    # trigonometry

    def _check_sides(self, a: float, b: float, c: float) -> bool:
        """Validate side lengths; return True when the triangle is degenerate."""
        for x in (a, b, c):
            if not (math.isfinite(x) and x >= 0):
                raise InadmissibleTriangle(f"side lengths must be finite and >= 0: {(a, b, c)}")
        per = a + b + c
        tol = DEGENERACY_RTOL * max(per, 1e-300)
        if self.kappa > 0 and per > 2 * self.diameter + tol:
            raise InadmissibleTriangle(
                f"perimeter {per:.17g} exceeds 2*D_kappa = {2 * self.diameter:.17g}"
            )
        slack = min(b + c - a, a + c - b, a + b - c)
        if slack < -tol:
            raise InadmissibleTriangle(f"triangle inequality violated by {(a, b, c)}")
        degenerate = slack <= tol
        if self.kappa > 0 and per >= 2 * self.diameter - tol:
            degenerate = True
        return degenerate

    def side_from_angle(self, a: float, b: float, gamma: float) -> float:
        """Third side opposite the angle ``gamma`` enclosed by sides ``a`` and ``b``."""
        for x in (a, b):
            if not (0 <= x < self.diameter):
                raise ValueError(f"side {x} outside [0, D_kappa)")
        if not (0 <= gamma <= math.pi):
            raise ValueError(f"angle {gamma} outside [0, pi]")
        flat = self.is_flat_at(max(a, b))
        sn = (lambda x: x) if flat else self.sn
        h2 = sn((a - b) / 2.0) ** 2 + sn(a) * sn(b) * math.sin(gamma / 2.0) ** 2
        return float(2.0 * self._asn(math.sqrt(max(h2, 0.0)), flat))

    def angle_from_sides(self, a: float, b: float, c: float, with_flag: bool = False):
        """Angle opposite ``c`` in the triangle with sides ``a, b, c``.

        Half-angle form ``tan(g/2)^2 = sn(s-a) sn(s-b) / (sn(s) sn(s-c))``.
        Degenerate triangles give 0 or pi; ``with_flag`` also returns the
        degeneracy flag.
        """
        degenerate = self._check_sides(a, b, c)
        s = (a + b + c) / 2.0
        flat = self.is_flat_at(s)
        sn = (lambda x: x) if flat else self.sn
        num = max(sn(s - a) * sn(s - b), 0.0)
        den = max(sn(s) * sn(s - c), 0.0)
        if num == 0.0 and den == 0.0:
            raise InadmissibleTriangle(f"angle undefined for sides {(a, b, c)}")
        gamma = 2.0 * math.atan2(math.sqrt(num), math.sqrt(den))
        if degenerate:
            gamma = math.pi if gamma > math.pi / 2 else 0.0
        return (gamma, degenerate) if with_flag else gamma

    def area_from_sides(self, a: float, b: float, c: float) -> float:
        """Area by Heron (flat) or L'Huilier's formula (curved)."""
        self._check_sides(a, b, c)
        s = (a + b + c) / 2.0
        parts = [max(x, 0.0) for x in (s, s - a, s - b, s - c)]
        if self.is_flat_at(s):
            return math.sqrt(parts[0] * parts[1] * parts[2] * parts[3])
        r = self._root
        if self.kappa > 0:
            t = [math.tan(r * x / 2.0) / r for x in parts]
        else:
            t = [math.tanh(r * x / 2.0) / r for x in parts]
        prod = math.sqrt(t[0] * t[1] * t[2] * t[3])
        k = abs(self.kappa)
        return 4.0 * math.atan(k * prod) / k

    def triangle_data(self, a: float, b: float, c: float) -> TriangleData:
        alpha = self.angle_from_sides(b, c, a)
        beta = self.angle_from_sides(c, a, b)
        gamma = self.angle_from_sides(a, b, c)
        area = self.area_from_sides(a, b, c)
        excess = alpha + beta + gamma - math.pi
        return TriangleData(a, b, c, alpha, beta, gamma, self.kappa, excess, area)

    def place_triangle(self, pq: float, pr: float, qr: float) -> tuple[complex, complex, complex]:
        """Chart vertices ``(p, q, r)`` of a counter-clockwise triangle with the given sides.

        ``p`` sits at the origin and ``q`` on the positive real axis.
        """
        angle_p = self.angle_from_sides(pq, pr, qr)
        q = complex(self.radius_of_distance(pq), 0.0)
        r = self.radius_of_distance(pr) * complex(math.cos(angle_p), math.sin(angle_p))
        return 0j, q, r


def model_space(kappa: float) -> ModelSpace:
    return ModelSpace(kappa)
