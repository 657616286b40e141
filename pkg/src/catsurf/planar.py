"""Straight-line polygon helpers used in projective charts.

Points are complex numbers. Polygons are sequences of vertices in
counter-clockwise order unless stated otherwise.
"""

from __future__ import annotations

import math
from typing import Sequence

from .model_space import ModelSpace

EPS = 1e-12


def cross(a: complex, b: complex) -> float:
    return a.real * b.imag - a.imag * b.real


def orient(a: complex, b: complex, c: complex) -> float:
    """Twice the signed area of ``abc``; positive when counter-clockwise."""
    return cross(b - a, c - a)


def signed_area(poly: Sequence[complex]) -> float:
    n = len(poly)
    return 0.5 * math.fsum(cross(poly[i], poly[(i + 1) % n]) for i in range(n))


def area(poly: Sequence[complex]) -> float:
    return abs(signed_area(poly)) if len(poly) >= 3 else 0.0


def centroid(poly: Sequence[complex]) -> complex:
    return sum(poly) / len(poly)


def ccw(poly: Sequence[complex]) -> list[complex]:
    poly = list(poly)
    return poly if signed_area(poly) >= 0 else poly[::-1]


def inside_convex(point: complex, poly: Sequence[complex], tol: float = EPS) -> bool:
    """Closed containment test for a counter-clockwise convex polygon.

    ``tol`` is relative to the polygon's scale.
    """
    scale = max(abs(v) for v in poly) or 1.0
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        if orient(a, b, point) < -tol * scale * max(abs(b - a), 1e-300):
            return False
    return True


def clip_convex(subject: Sequence[complex], clip: Sequence[complex]) -> list[complex]:
    """Sutherland-Hodgman clipping of ``subject`` by the convex ``clip``.

    Both polygons counter-clockwise. Returns the (possibly empty) intersection
    with consecutive duplicate vertices removed.
    """
    out = list(subject)
    n = len(clip)
    for i in range(n):
        if not out:
            break
        a, b = clip[i], clip[(i + 1) % n]
        edge = b - a
        inp, out = out, []
        m = len(inp)
        for j in range(m):
            cur, nxt = inp[j], inp[(j + 1) % m]
            c_in = cross(edge, cur - a)
            n_in = cross(edge, nxt - a)
            if c_in >= 0:
                out.append(cur)
            if (c_in >= 0) != (n_in >= 0):
                t = c_in / (c_in - n_in)
                out.append(cur + t * (nxt - cur))
    return dedupe(out)


def dedupe(poly: Sequence[complex], tol: float = 1e-15) -> list[complex]:
    out: list[complex] = []
    for v in poly:
        if not out or abs(v - out[-1]) > tol * max(1.0, abs(v)):
            out.append(v)
    while len(out) > 1 and abs(out[0] - out[-1]) <= tol * max(1.0, abs(out[0])):
        out.pop()
    return out


def segment_intersection(p: complex, q: complex, a: complex, b: complex) -> tuple[float, float] | None:
    """Parameters ``(t, u)`` with ``p + t(q-p) = a + u(b-a)``, or None for parallel lines."""
    d1, d2 = q - p, b - a
    den = cross(d1, d2)
    if den == 0:
        return None
    w = a - p
    return cross(w, d2) / den, cross(w, d1) / den


def model_area(space: ModelSpace, poly: Sequence[complex]) -> float:
    """Area in ``space`` of a convex polygon given by projective-chart vertices."""
    if len(poly) < 3:
        return 0.0
    pts = [space.from_projective(u) for u in poly]
    total = []
    for i in range(1, len(pts) - 1):
        a = float(space.distance(pts[0], pts[i]))
        b = float(space.distance(pts[i], pts[i + 1]))
        c = float(space.distance(pts[i + 1], pts[0]))
        try:
            total.append(space.area_from_sides(a, b, c))
        except ValueError:
            # slivers can fail the triangle inequality by rounding; they have no area
            total.append(0.0)
    return math.fsum(total)
