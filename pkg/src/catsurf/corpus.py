"""Generators for the bundled test surfaces."""

from __future__ import annotations

import math

import numpy as np
from scipy.spatial import ConvexHull

from .model_space import model_space
from .polyhedral import Face, PolySurface, validate


def _hull_faces(points: np.ndarray) -> list[tuple[int, int, int]]:
    hull = ConvexHull(points)
    out = []
    for tri in hull.simplices:
        a, b, c = (int(x) for x in tri)
        # orient outward so the face list is consistently oriented
        n = np.cross(points[b] - points[a], points[c] - points[a])
        if np.dot(n, points[a] - points.mean(axis=0)) < 0:
            b, c = c, b
        out.append((a, b, c))
    return sorted(out)


def flat_hull_surface(points, provenance: str = "hull") -> PolySurface:
    """Boundary of the convex hull of ``points`` with its induced flat metric."""
    pts = np.asarray(points, dtype=float)
    faces = []
    for a, b, c in _hull_faces(pts):
        ln = tuple(float(np.linalg.norm(pts[x] - pts[y])) for x, y in ((a, b), (b, c), (c, a)))
        faces.append(Face((a, b, c), ln, 0.0))
    return validate(faces, provenance=provenance)


def _uniform(combinatorics, side: float, kappa: float, provenance: str) -> PolySurface:
    return validate([Face(t, (side, side, side), kappa) for t in combinatorics], provenance=provenance)


def _icosahedron_points() -> np.ndarray:
    g = (1 + math.sqrt(5)) / 2
    pts = []
    for s1 in (-1, 1):
        for s2 in (-1, 1):
            pts += [(0, s1, s2 * g), (s1, s2 * g, 0), (s2 * g, 0, s1)]
    return np.array(pts, dtype=float)


def tetrahedron(side: float = 1.0) -> PolySurface:
    """Regular flat tetrahedron: four cone points of angle pi."""
    combo = [(0, 1, 2), (0, 3, 1), (0, 2, 3), (1, 3, 2)]
    return _uniform(combo, side, 0.0, "tetrahedron")


def octant_octahedron() -> PolySurface:
    """The unit sphere cut along the coordinate planes into eight octants."""
    pts = np.array([(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)], dtype=float)
    return _uniform(_hull_faces(pts), math.pi / 2, 1.0, "octant-octahedron")


def flat_icosahedron(side: float = 1.0) -> PolySurface:
    return _uniform(_hull_faces(_icosahedron_points()), side, 0.0, "icosahedron")


def cube_surface(side: float = 1.0) -> PolySurface:
    """Surface of a cube, each square split along a diagonal; corners of angle 3*pi/2."""
    pts = side * np.array([(x, y, z) for x in (0, 1) for y in (0, 1) for z in (0, 1)], dtype=float)
    return flat_hull_surface(pts, provenance="cube")


def random_convex_polyhedron(n: int = 12, seed: int = 0, jitter: float = 0.2) -> PolySurface:
    """Flat metric on the hull of ``n`` jittered points of the unit sphere."""
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, 3))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    x *= 1 + jitter * rng.uniform(-1, 1, size=(n, 1))
    return flat_hull_surface(x, provenance=f"random-convex(n={n},seed={seed})")


def spherical_torus(n: int = 4, m: int = 4, side: float = 0.3, kappa: float = 1.0) -> PolySurface:
    """Torus of ``2nm`` equilateral triangles of curvature ``kappa``, six at each vertex.

    With ``kappa > 0`` every corner exceeds pi/3, so every cone angle exceeds 2*pi.
    """
    if n < 3 or m < 3:
        raise ValueError("need n, m >= 3 for a simplicial torus")

    def vid(i, j):
        return (i % n) * m + (j % m)

    combo = []
    for i in range(n):
        for j in range(m):
            combo.append((vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)))
            combo.append((vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)))
    return _uniform(combo, side, kappa, f"torus(n={n},m={m},kappa={kappa})")


def embedded_surface(points, triangles, provenance: str = "embedded") -> PolySurface:
    """Flat metric induced by a triangulated surface in R^3."""
    pts = np.asarray(points, dtype=float)
    faces = []
    for a, b, c in triangles:
        ln = tuple(float(np.linalg.norm(pts[x] - pts[y])) for x, y in ((a, b), (b, c), (c, a)))
        faces.append(Face((int(a), int(b), int(c)), ln, 0.0))
    return validate(faces, provenance=provenance)


def picture_frame(outer: float = 3.0, inner: float = 1.0, height: float = 1.0) -> PolySurface:
    """Flat torus: a square frame with a square hole.

    Outer corners are cone points below 2*pi and inner corners above it, so
    the defects have both signs.
    """
    if not 0 < inner < outer:
        raise ValueError("need 0 < inner < outer")
    o, i = outer / 2, inner / 2
    square = [(-1, -1), (1, -1), (1, 1), (-1, 1)]
    pts = []
    for half in (o, i):
        for z in (0.0, height):
            pts += [(half * x, half * y, z) for x, y in square]
    ob, ot, ib, it = (list(range(k, k + 4)) for k in (0, 4, 8, 12))
    quads = []
    for k in range(4):
        n = (k + 1) % 4
        quads += [
            (ob[k], ob[n], ot[n], ot[k]),  # outer wall
            (ib[n], ib[k], it[k], it[n]),  # inner wall
            (ot[k], ot[n], it[n], it[k]),  # top
            (ob[n], ob[k], ib[k], ib[n]),  # bottom
        ]
    tris = []
    for a, b, c, d in quads:
        tris += [(a, b, c), (a, c, d)]
    return embedded_surface(pts, tris, provenance="picture-frame")


CORPUS = {
    "tetrahedron": tetrahedron,
    "octant-octahedron": octant_octahedron,
    "icosahedron": flat_icosahedron,
    "cube": cube_surface,
    "random-convex": random_convex_polyhedron,
    "spherical-torus": spherical_torus,
    "picture-frame": picture_frame,
}


def corpus_surface(name: str, **kwargs) -> PolySurface:
    try:
        return CORPUS[name](**kwargs)
    except KeyError:
        raise KeyError(f"unknown surface {name!r}; choose from {sorted(CORPUS)}") from None


def equilateral_angle(side: float, kappa: float) -> float:
    return model_space(kappa).angle_from_sides(side, side, side)
