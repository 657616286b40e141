"""Comparison triangles, model angles and sampled CAT(kappa) tests."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import planar
from .model_space import InadmissibleTriangle, ModelSpace, TriangleData, as_point, model_space

# boundary parameter: (side index, arclength from the side's first vertex)
BoundaryParam = tuple[int, float]
Oracle = Callable[[np.ndarray, np.ndarray, np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class AbstractTriangle:
    """A triangle known only through distances between its boundary points.

    Side ``k`` runs from vertex ``k`` to vertex ``k + 1 (mod 3)`` and has length
    ``sides[k]``. ``oracle(side_i, s_i, side_j, s_j)`` takes four equally
    shaped arrays and returns the ambient distances elementwise.
    """

    sides: tuple[float, float, float]
    oracle: Oracle
    labels: tuple[str, str, str] = ("p", "q", "r")

    @property
    def perimeter(self) -> float:
        return math.fsum(self.sides)

    def distance(self, x: BoundaryParam, y: BoundaryParam) -> float:
        arr = [np.array([v], dtype=float) for v in (x[0], x[1], y[0], y[1])]
        return float(self.oracle(*arr)[0])

    @classmethod
    def from_model(cls, space: ModelSpace, p, q, r) -> "AbstractTriangle":
        """Geodesic triangle with conformal-chart vertices ``p, q, r`` in ``space``."""
        verts = [as_point(x) for x in (p, q, r)]
        for v in verts:
            space.check_point(v)
        sides = tuple(float(space.distance(verts[k], verts[(k + 1) % 3])) for k in range(3))

        def locate(side: np.ndarray, s: np.ndarray) -> np.ndarray:
            out = np.empty(side.shape, dtype=complex)
            for k in range(3):
                m = side == k
                if np.any(m):
                    out[m] = space.geodesic_points(verts[k], verts[(k + 1) % 3], s[m])
                    # corners reached from either side must be the same point
                    out[m & (s <= 0)] = verts[k]
                    out[m & (s >= sides[k])] = verts[(k + 1) % 3]
            return out

        def oracle(si, s, sj, t):
            si, sj = np.asarray(si, dtype=int), np.asarray(sj, dtype=int)
            return space.distance(locate(si, np.asarray(s, float)), locate(sj, np.asarray(t, float)))

        return cls(sides, oracle)

    @classmethod
    def from_sides(cls, kappa: float, pq: float, qr: float, rp: float) -> "AbstractTriangle":
        """The geodesic triangle with these sides in the model plane of curvature ``kappa``."""
        space = model_space(kappa)
        p, q, r = space.place_triangle(pq, rp, qr)
        return cls.from_model(space, p, q, r)


class ViolationReport(NamedTuple):
    max_violation: float
    arg_pair: tuple[BoundaryParam, BoundaryParam]
    samples_used: int

    def to_dict(self) -> dict:
        return {"max_violation": self.max_violation, "arg_pair": [list(x) for x in self.arg_pair],
                "samples_used": self.samples_used}


class DistortionReport(NamedTuple):
    bilipschitz_estimate: float
    edge_ratio_max: float
    samples_used: int


def model_angle(kappa: float, d_pq: float, d_pr: float, d_qr: float) -> float:
    """Angle at ``p`` of the comparison triangle in the model plane of curvature ``kappa``."""
    return model_space(kappa).angle_from_sides(d_pq, d_pr, d_qr)


def upper_angle_estimate(space: ModelSpace, p, q, r, shrink: float = 0.5, steps: int = 40, tail: int = 10) -> float:
    """Limsup of Euclidean model angles at ``p`` along shrinking points of ``[pq]`` and ``[pr]``.

    Returns the largest of the last ``tail`` iterates. ``p`` is first moved to
    the chart origin, where geodesics from ``p`` are rays.
    """
    if not 0 < shrink < 1:
        raise ValueError("shrink must lie in (0, 1)")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    p, q, r = (space.check_point(x) for x in (p, q, r))
    if q == p or r == p:
        raise ValueError("q and r must differ from p")
    q0, r0 = space.move_to_origin(p, q), space.move_to_origin(p, r)
    dq, dr = float(space.distance(0j, q0)), float(space.distance(0j, r0))
    uq, ur = q0 / abs(q0), r0 / abs(r0)
    angles = []
    for k in range(1, steps + 1):
        t = shrink**k
        qk = space.radius_of_distance(t * dq) * uq
        rk = space.radius_of_distance(t * dr) * ur
        angles.append(model_angle(0.0, t * dq, t * dr, float(space.distance(qk, rk))))
    return max(angles[-tail:])


def excess(t: TriangleData) -> float:
    return t.excess


def family_excess(ts: Sequence[TriangleData]) -> float:
    return math.fsum(t.excess for t in ts)


def _boundary_samples(t: AbstractTriangle, grid_n: int) -> tuple[np.ndarray, np.ndarray]:
    side = np.repeat(np.arange(3), grid_n)
    s = np.concatenate([np.linspace(0.0, t.sides[k], grid_n) for k in range(3)])
    return side, s


def _comparison_oracle(kappa: float, t: AbstractTriangle) -> Oracle:
    space = model_space(kappa)
    a, b, c = t.sides
    p, q, r = space.place_triangle(a, c, b)
    return AbstractTriangle.from_model(space, p, q, r).oracle


def _cross_pairs(grid_n: int) -> tuple[np.ndarray, np.ndarray]:
    i, j = np.meshgrid(np.arange(3 * grid_n), np.arange(3 * grid_n), indexing="ij")
    i, j = i.ravel(), j.ravel()
    keep = (i // grid_n) < (j // grid_n)
    return i[keep], j[keep]


def _common_side(t: AbstractTriangle, side: np.ndarray, s: np.ndarray, i: np.ndarray, j: np.ndarray) -> np.ndarray:
    """Pairs lying on one side, counting a corner as a point of both its sides."""
    L = np.asarray(t.sides)
    at_end = s >= L[side]
    # a sample on side k may also sit on side k - 1 (at s = 0) or side k + 1 (at s = L_k)
    also = np.where(s <= 0, (side - 1) % 3, np.where(at_end, (side + 1) % 3, side))
    return (side[i] == side[j]) | (side[i] == also[j]) | (also[i] == side[j]) | (also[i] == also[j])


def cat_test(t: AbstractTriangle, kappa: float, grid_n: int = 64) -> ViolationReport:
    """Largest ``d(x, y) - d_kappa(x', y')`` over sampled pairs on different sides.

    Pairs through a shared corner lie on one geodesic side in both triangles,
    so their violation is exactly zero and is not left to rounding.
    """
    space = model_space(kappa)
    if kappa > 0 and t.perimeter >= 2 * space.diameter:
        raise InadmissibleTriangle(f"perimeter {t.perimeter} not below 2*D_kappa = {2 * space.diameter}")
    side, s = _boundary_samples(t, grid_n)
    i, j = _cross_pairs(grid_n)
    d = t.oracle(side[i], s[i], side[j], s[j])
    dbar = _comparison_oracle(kappa, t)(side[i], s[i], side[j], s[j])
    v = np.where(_common_side(t, side, s, i, j), 0.0, d - dbar)
    k = int(np.argmax(v))
    pair = ((int(side[i[k]]), float(s[i[k]])), (int(side[j[k]]), float(s[j[k]])))
    return ViolationReport(float(v[k]), pair, 3 * grid_n)


def canonical_distortion(t: AbstractTriangle, grid_n: int = 64, min_angle: float | None = None,
                         max_perimeter: float | None = None) -> DistortionReport:
    """Empirical bi-Lipschitz constant of the boundary map onto the Euclidean comparison triangle."""
    if max_perimeter is not None and t.perimeter > max_perimeter:
        raise ValueError(f"perimeter {t.perimeter} exceeds {max_perimeter}")
    a, b, c = t.sides
    flat = model_space(0.0)
    angles = flat.triangle_data(a, b, c).angles
    if min(angles) <= 0 or (min_angle is not None and min(angles) < min_angle):
        raise InadmissibleTriangle(f"comparison triangle has angles {angles}")
    side, s = _boundary_samples(t, grid_n)
    n = len(s)
    i, j = np.triu_indices(n, k=1)
    d = t.oracle(side[i], s[i], side[j], s[j])
    dbar = _comparison_oracle(0.0, t)(side[i], s[i], side[j], s[j])
    # corners are sampled twice; coincident pairs carry no information
    keep = (d > 1e-14 * t.perimeter) & (dbar > 1e-14 * t.perimeter)
    ratio = d[keep] / dbar[keep]
    L = float(max(np.max(ratio), np.max(1 / ratio)))
    return DistortionReport(max(L, 1.0), max(t.sides) / min(t.sides), n)


# ----------------------------------------------------------------------
# subdivision of a triangle by a segment from a vertex


class SubdivisionRecord(NamedTuple):
    excess_parent: float
    excess_children_sum: float
    model_area_parent_at_kappa: float
    model_area_children_sum_at_kappa: float


def _sides(space: ModelSpace, p, q, r) -> tuple[float, float, float]:
    return tuple(float(space.distance(x, y)) for x, y in ((q, r), (r, p), (p, q)))


def subdivision_check(space: ModelSpace, tri: Sequence, s, kappa: float) -> SubdivisionRecord:
    """Excess and comparison area before and after cutting ``(p, q, r)`` along ``[p s]``.

    ``s`` is a chart point on ``[q r]`` or a fraction in ``(0, 1)`` of the way from
    ``q`` to ``r``. Excesses use angles in ``space``; areas are those of the
    comparison triangles at ``kappa``.
    """
    p, q, r = (space.check_point(x) for x in tri)
    if isinstance(s, (int, float)) and not isinstance(s, bool):
        if not 0 < s < 1:
            raise ValueError("split fraction must lie in (0, 1)")
        s = space.geodesic_point(q, r, s * float(space.distance(q, r)))
    s = space.check_point(s)
    dqr = float(space.distance(q, r))
    if abs(float(space.distance(q, s)) + float(space.distance(s, r)) - dqr) > 1e-9 * max(dqr, 1e-300):
        raise ValueError("split point is not on [q r]")
    target = model_space(kappa)
    parent = _sides(space, p, q, r)
    kids = [_sides(space, p, q, s), _sides(space, p, s, r)]
    amb = [space.triangle_data(*x) for x in [parent, *kids]]
    cmp = [target.triangle_data(*x) for x in [parent, *kids]]
    return SubdivisionRecord(
        amb[0].excess,
        family_excess(amb[1:]),
        cmp[0].area,
        math.fsum(c.area for c in cmp[1:]),
    )


class FitRecord(NamedTuple):
    contained: bool
    overlap_area: float
    parent_area: float
    children: tuple[list[complex], list[complex]]
    parent: list[complex]


def fit_comparison_children(kappa: float, parent: Sequence[float], child1: Sequence[float],
                            child2: Sequence[float]) -> FitRecord:
    """Lay the comparison children inside the comparison parent.

    ``parent = (|pq|, |pr|, |qr|)``, ``child1 = (|pq|, |ps|, |qs|)`` and
    ``child2 = (|ps|, |pr|, |sr|)``. Child one is hinged on ``[p q]`` and child two
    on ``[p r]``; both are drawn in the projective chart, where they are
    straight triangles, and checked for containment and mutual overlap.
    """
    space = model_space(kappa)
    pq, pr, qr = parent
    p, q, r = space.place_triangle(pq, pr, qr)
    theta = math.atan2(r.imag, r.real)
    a1 = space.angle_from_sides(child1[0], child1[1], child1[2])
    a2 = space.angle_from_sides(child2[1], child2[0], child2[2])
    s1 = space.radius_of_distance(child1[1]) * complex(math.cos(a1), math.sin(a1))
    s2 = space.radius_of_distance(child2[0]) * complex(math.cos(theta - a2), math.sin(theta - a2))
    proj = space.to_projective
    P = [proj(x) for x in (p, q, r)]
    T1 = planar.ccw([proj(x) for x in (p, q, s1)])
    T2 = planar.ccw([proj(x) for x in (p, s2, r)])
    contained = all(planar.inside_convex(v, P, tol=1e-10) for v in T1 + T2)
    parent_area = space.area_from_sides(pq, qr, pr)
    overlap = planar.clip_convex(T1, T2)
    ov = planar.model_area(space, overlap) if len(overlap) >= 3 else 0.0
    return FitRecord(contained, ov, parent_area, (T1, T2), P)
