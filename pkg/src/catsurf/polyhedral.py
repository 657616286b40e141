"""Closed surfaces glued from model triangles.

A face is a triple of vertex ids, the three side lengths and the curvature
of the model plane it is cut from. ``lengths[0]`` is the side ``v0 v1``,
``lengths[1]`` is ``v1 v2`` and ``lengths[2]`` is ``v2 v0``.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra

from .model_space import InadmissibleTriangle, model_space

SMOOTH_TOL = 1e-9
LENGTH_RTOL = 1e-12
DEFAULT_MAX_FACES = 2_000_000

Edge = tuple[int, int]


class SurfaceError(ValueError):
    """Raised by :func:`validate`; ``violations`` lists every problem found."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        head = "; ".join(self.violations[:5])
        more = f" (+{len(self.violations) - 5} more)" if len(self.violations) > 5 else ""
        super().__init__(f"invalid surface: {head}{more}")


class ResourceError(RuntimeError):
    pass


def edge_key(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Face:
    v: tuple[int, int, int]
    lengths: tuple[float, float, float]
    kappa: float = 0.0

    def edges(self) -> list[tuple[Edge, float]]:
        a, b, c = self.v
        return [(edge_key(a, b), self.lengths[0]), (edge_key(b, c), self.lengths[1]), (edge_key(c, a), self.lengths[2])]

    def length(self, u: int, w: int) -> float:
        for e, ln in self.edges():
            if e == edge_key(u, w):
                return ln
        raise KeyError((u, w))

    def corner(self, vertex: int) -> tuple[int, int, float, float, float]:
        """``(p, q, |vp|, |vq|, |pq|)`` for the two other vertices of the face."""
        i = self.v.index(vertex)
        p, q = self.v[(i + 1) % 3], self.v[(i + 2) % 3]
        return p, q, self.length(vertex, p), self.length(vertex, q), self.length(p, q)

    def corner_angle(self, vertex: int) -> float:
        _, _, a, b, c = self.corner(vertex)
        return model_space(self.kappa).angle_from_sides(a, b, c)

    def area(self) -> float:
        return model_space(self.kappa).area_from_sides(*self.lengths)

    def to_dict(self) -> dict:
        return {"v": list(self.v), "len": list(self.lengths), "kappa": self.kappa}


def _as_face(raw) -> Face:
    if isinstance(raw, Face):
        return raw
    if isinstance(raw, Mapping):
        v, ln, k = raw["v"], raw["len"], raw.get("kappa", 0.0)
    else:
        v, ln, k = raw
    return Face(tuple(int(x) for x in v), tuple(float(x) for x in ln), float(k))


@dataclass(frozen=True, eq=False)
class PolySurface:
    """A validated closed surface. Build it with :func:`validate`."""

    faces: tuple[Face, ...]
    vertices: tuple[int, ...]
    edges: Mapping[Edge, tuple[float, tuple[int, int]]]
    chi: int
    orientable: bool
    provenance: str = "validate"
    warnings: tuple[str, ...] = ()
    midpoints: Mapping[Edge, int] = field(default_factory=dict)

    @cached_property
    def vertex_faces(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = defaultdict(list)
        for i, f in enumerate(self.faces):
            for v in f.v:
                out[v].append(i)
        return dict(out)

    @cached_property
    def _index(self) -> dict[int, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def graph(self) -> csr_matrix:
        n = len(self.vertices)
        idx = self._index
        rows, cols, w = [], [], []
        for (u, v), (ln, _) in self.edges.items():
            rows += [idx[u], idx[v]]
            cols += [idx[v], idx[u]]
            w += [ln, ln]
        return csr_matrix((w, (rows, cols)), shape=(n, n))

    @property
    def kappa_max(self) -> float:
        return max(f.kappa for f in self.faces)

    def check_vertex(self, v: int) -> None:
        if v not in self._index:
            raise KeyError(f"unknown vertex {v}")

    def to_dict(self, derived: bool = False) -> dict:
        out: dict = {"faces": [f.to_dict() for f in self.faces]}
        if derived:
            out["chi"] = self.chi
            out["omega"] = {str(v): w for v, w in curvature_report(self).omega.items()}
        return out


def _link_is_cycle(v: int, faces: Sequence[Face]) -> bool:
    """True when the faces around ``v`` close up into a single disk."""
    nbrs: dict[int, list[int]] = defaultdict(list)
    for f in faces:
        p, q, *_ = f.corner(v)
        nbrs[p].append(q)
        nbrs[q].append(p)
    if any(len(x) != 2 for x in nbrs.values()):
        return False
    start = next(iter(nbrs))
    prev, cur, steps = None, start, 0
    while True:
        a, b = nbrs[cur]
        nxt = b if a == prev else a
        prev, cur = cur, nxt
        steps += 1
        if cur == start:
            break
    return steps == len(nbrs)


def _orientable(faces: Sequence[Face]) -> bool:
    """Two-colour the directed edges by propagating orientations across shared edges."""
    n = len(faces)
    sign = [0] * n
    by_edge: dict[Edge, list[int]] = defaultdict(list)
    for i, f in enumerate(faces):
        for e, _ in f.edges():
            by_edge[e].append(i)

    def direction(f: Face, e: Edge) -> int:
        a, b, c = f.v
        for s, t in ((a, b), (b, c), (c, a)):
            if edge_key(s, t) == e:
                return 1 if (s, t) == e else -1
        raise KeyError(e)

    for seed in range(n):
        if sign[seed]:
            continue
        sign[seed] = 1
        stack = [seed]
        while stack:
            i = stack.pop()
            for e, _ in faces[i].edges():
                for j in by_edge[e]:
                    if j == i:
                        continue
                    # glued faces must traverse a shared edge in opposite directions
                    want = -sign[i] * direction(faces[i], e) * direction(faces[j], e)
                    if sign[j] == 0:
                        sign[j] = want
                        stack.append(j)
                    elif sign[j] != want:
                        return False
    return True


def validate(raw: Iterable, provenance: str = "validate") -> PolySurface:
    """Check a face list and return a :class:`PolySurface`.

    Every problem is collected and reported together in a
    :class:`SurfaceError`.
    """
    faces = [_as_face(r) for r in raw]
    problems: list[str] = []
    if not faces:
        raise SurfaceError(["no faces"])
    for i, f in enumerate(faces):
        if len(set(f.v)) != 3:
            problems.append(f"face {i}: repeated vertex in {f.v}")
            continue
        try:
            degenerate = model_space(f.kappa)._check_sides(*f.lengths)
        except InadmissibleTriangle as exc:
            problems.append(f"face {i}: {exc}")
            continue
        if degenerate or min(f.lengths) <= 0:
            problems.append(f"face {i}: degenerate triangle {f.lengths}")
    if problems:
        raise SurfaceError(problems)

    edges: dict[Edge, list[tuple[float, int]]] = defaultdict(list)
    for i, f in enumerate(faces):
        for e, ln in f.edges():
            edges[e].append((ln, i))
    table = {}
    for e, uses in sorted(edges.items()):
        if len(uses) == 1:
            problems.append(f"edge {e}: open edge (only in face {uses[0][1]})")
            continue
        if len(uses) > 2:
            problems.append(f"edge {e}: shared by {len(uses)} faces {[u[1] for u in uses]}")
            continue
        (l1, f1), (l2, f2) = uses
        if abs(l1 - l2) > LENGTH_RTOL * max(l1, l2):
            problems.append(f"edge {e}: gluing length mismatch {l1!r} (face {f1}) vs {l2!r} (face {f2})")
            continue
        table[e] = (0.5 * (l1 + l2), (f1, f2))
    if problems:
        raise SurfaceError(problems)

    vertices = tuple(sorted({v for f in faces for v in f.v}))
    around: dict[int, list[Face]] = defaultdict(list)
    for f in faces:
        for v in f.v:
            around[v].append(f)
    for v in vertices:
        if not _link_is_cycle(v, around[v]):
            problems.append(f"vertex {v}: neighbourhood is not a disk")
    idx = {v: i for i, v in enumerate(vertices)}
    n = len(vertices)
    rows = [idx[u] for u, _ in table] + [idx[w] for _, w in table]
    cols = [idx[w] for _, w in table] + [idx[u] for u, _ in table]
    ncomp, _ = connected_components(csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n)))
    if ncomp != 1:
        problems.append(f"surface has {ncomp} connected components")
    if problems:
        raise SurfaceError(problems)

    chi = len(vertices) - len(table) + len(faces)
    orientable = _orientable(faces)
    if chi > 2 or (orientable and chi % 2):
        raise SurfaceError([f"Euler characteristic {chi} impossible for a closed {'orientable' if orientable else 'non-orientable'} surface"])
    warnings = []
    if len({f.kappa for f in faces}) > 1:
        warnings.append("faces carry different curvatures")
    return PolySurface(tuple(faces), vertices, table, chi, orientable, provenance, tuple(warnings))


def glue_from_edge_graph(faces: Iterable) -> PolySurface:
    """Glue one model triangle per face onto the edge graph (same checks as :func:`validate`)."""
    return validate(faces, provenance="glue_from_edge_graph")


# ----------------------------------------------------------------------
# curvature


def cone_angle(surface: PolySurface, v: int) -> float:
    surface.check_vertex(v)
    return math.fsum(surface.faces[i].corner_angle(v) for i in surface.vertex_faces[v])


class CurvatureReport(NamedTuple):
    cone_angle: dict[int, float]
    omega: dict[int, float]
    omega_plus: float
    omega_minus: float
    face_curvature: float
    chi: int

    @property
    def total_omega(self) -> float:
        return math.fsum(self.omega.values())

    @property
    def gauss_bonnet_defect(self) -> float:
        return self.total_omega + self.face_curvature - 2 * math.pi * self.chi

    def conical(self, tol: float = SMOOTH_TOL) -> list[int]:
        return [v for v, w in self.omega.items() if abs(w) >= tol]

    def to_dict(self) -> dict:
        return {
            "chi": self.chi,
            "omega_total": self.total_omega,
            "omega_plus": self.omega_plus,
            "omega_minus": self.omega_minus,
            "face_curvature": self.face_curvature,
            "gauss_bonnet_defect": self.gauss_bonnet_defect,
            "cone_angle": {str(v): a for v, a in self.cone_angle.items()},
            "omega": {str(v): w for v, w in self.omega.items()},
        }


def curvature_report(surface: PolySurface) -> CurvatureReport:
    angles = {v: cone_angle(surface, v) for v in surface.vertices}
    omega = {v: 2 * math.pi - a for v, a in angles.items()}
    plus = math.fsum(w for w in omega.values() if w > 0)
    minus = math.fsum(-w for w in omega.values() if w < 0)
    fc = math.fsum(f.kappa * f.area() for f in surface.faces if f.kappa != 0)
    return CurvatureReport(angles, omega, plus, minus, fc, surface.chi)


# ----------------------------------------------------------------------
# regions


@dataclass(frozen=True)
class PolygonRegion:
    """A disk made of whole faces, with its boundary walk and inner corner angles."""

    faces: frozenset[int]
    boundary: tuple[int, ...]
    corner_angles: dict[int, float]
    interior_vertices: tuple[int, ...]

    @classmethod
    def from_faces(cls, surface: PolySurface, faces: Iterable[int]) -> "PolygonRegion":
        fs = frozenset(faces)
        if not fs:
            raise ValueError("empty region")
        count: dict[Edge, int] = defaultdict(int)
        for i in fs:
            for e, _ in surface.faces[i].edges():
                count[e] += 1
        bnd = [e for e, k in count.items() if k == 1]
        if not bnd:
            raise ValueError("region has no boundary (it is the whole surface)")
        nbrs: dict[int, list[int]] = defaultdict(list)
        for u, v in bnd:
            nbrs[u].append(v)
            nbrs[v].append(u)
        if any(len(x) != 2 for x in nbrs.values()):
            raise ValueError("boundary is not a simple closed curve")
        start = min(nbrs)
        walk = [start]
        prev, cur = None, start
        while True:
            a, b = sorted(nbrs[cur])
            nxt = a if a != prev else b
            if nxt == start:
                break
            walk.append(nxt)
            prev, cur = cur, nxt
        if len(walk) != len(nbrs):
            raise ValueError("boundary has several components")
        verts = {v for i in fs for v in surface.faces[i].v}
        chi = len(verts) - len(count) + len(fs)
        if chi != 1:
            raise ValueError(f"region is not a disk (Euler characteristic {chi})")
        corners = {
            v: math.fsum(surface.faces[i].corner_angle(v) for i in fs if v in surface.faces[i].v)
            for v in walk
        }
        interior = tuple(sorted(verts - set(walk)))
        return cls(fs, tuple(walk), corners, interior)


def gauss_bonnet_region(surface: PolySurface, region: PolygonRegion) -> dict:
    tau = math.fsum(math.pi - phi for phi in region.corner_angles.values())
    inner = [2 * math.pi - cone_angle(surface, v) for v in region.interior_vertices]
    inner += [surface.faces[i].kappa * surface.faces[i].area() for i in sorted(region.faces)]
    omega = math.fsum(inner)
    return {"tau": tau, "omega_interior": omega, "defect": tau + omega - 2 * math.pi}


# ----------------------------------------------------------------------
# distances


def edge_graph_distances(surface: PolySurface, sources: Sequence[int]) -> np.ndarray:
    """Rows of shortest edge-path distances, one per source, columns in ``surface.vertices`` order."""
    for s in sources:
        surface.check_vertex(s)
    idx = [surface._index[s] for s in sources]
    return np.atleast_2d(dijkstra(surface.graph, directed=False, indices=idx))


def edge_graph_distance(surface: PolySurface, u: int, v: int) -> float:
    surface.check_vertex(v)
    d = edge_graph_distances(surface, [u])[0, surface._index[v]]
    if not math.isfinite(d):
        raise ValueError(f"vertices {u} and {v} are not connected")
    return float(d)


def refine_midpoint(surface: PolySurface, max_faces: int = DEFAULT_MAX_FACES) -> PolySurface:
    """Split every face into four through its edge midpoints.

    Half edges keep half the length; the three inner chords are computed in
    the face's own model plane from the corner angle. Original vertex ids are
    kept and the midpoint of edge ``e`` gets id ``surface.vertices[-1] + 1 + k``
    where ``k`` is the position of ``e`` in sorted order.
    """
    if 4 * len(surface.faces) > max_faces:
        raise ResourceError(f"refinement would produce {4 * len(surface.faces)} faces (cap {max_faces})")
    base = surface.vertices[-1] + 1
    mid = {e: base + k for k, e in enumerate(sorted(surface.edges))}
    out = []
    for f in surface.faces:
        space = model_space(f.kappa)
        if space.kappa > 0 and sum(f.lengths) / 2 >= space.diameter:
            raise InadmissibleTriangle(f"face {f.v} too large for midpoint refinement")
        a, b, c = f.v
        lab, lbc, lca = f.lengths
        mab, mbc, mca = mid[edge_key(a, b)], mid[edge_key(b, c)], mid[edge_key(c, a)]
        # chord between the midpoints on the two sides at each corner
        chord_a = space.side_from_angle(lab / 2, lca / 2, f.corner_angle(a))
        chord_b = space.side_from_angle(lab / 2, lbc / 2, f.corner_angle(b))
        chord_c = space.side_from_angle(lbc / 2, lca / 2, f.corner_angle(c))
        k = f.kappa
        out += [
            Face((a, mab, mca), (lab / 2, chord_a, lca / 2), k),
            Face((b, mbc, mab), (lbc / 2, chord_b, lab / 2), k),
            Face((c, mca, mbc), (lca / 2, chord_c, lbc / 2), k),
            Face((mab, mbc, mca), (chord_b, chord_c, chord_a), k),
        ]
    refined = validate(out, provenance=f"{surface.provenance}+midpoint")
    object.__setattr__(refined, "midpoints", mid)
    return refined


class DistanceSequence(NamedTuple):
    distances: list[float]
    gaps: list[float]


def refined_distance_sequence(surface: PolySurface, u: int, v: int, level: int,
                              max_faces: int = DEFAULT_MAX_FACES) -> DistanceSequence:
    """Edge-graph distance after 0, 1, ..., ``level`` midpoint refinements."""
    if level < 0:
        raise ValueError("level must be >= 0")
    dists = [edge_graph_distance(surface, u, v)]
    s = surface
    for _ in range(level):
        s = refine_midpoint(s, max_faces=max_faces)
        dists.append(edge_graph_distance(s, u, v))
    gaps = [abs(x - y) for x, y in zip(dists[:-1], dists[1:])]
    return DistanceSequence(dists, gaps)


def refined_distance(surface: PolySurface, u: int, v: int, level: int,
                     max_faces: int = DEFAULT_MAX_FACES) -> float:
    return refined_distance_sequence(surface, u, v, level, max_faces).distances[-1]


# ----------------------------------------------------------------------
# vertex separation


def apex_height(f: Face, vertex: int) -> float:
    """Distance inside ``f`` from ``vertex`` to the opposite side."""
    space = model_space(f.kappa)
    p, q, b, c, a = f.corner(vertex)
    angle_p = f.corner_angle(p)
    angle_q = f.corner_angle(q)
    if angle_p >= math.pi / 2 or angle_q >= math.pi / 2:
        return min(b, c)
    # right triangle with hypotenuse b: sn(h) = sn(b) sin(angle at p)
    return float(space._asn(space.sn(b) * math.sin(angle_p), space.kappa == 0))


def vertex_separation(surface: PolySurface, v: int) -> float:
    """Lower bound for the distance from ``v`` to any other vertex.

    Any path leaving ``v`` has to cross the link of ``v``, which in each
    incident face sits at least ``apex_height`` away.
    """
    surface.check_vertex(v)
    return min(apex_height(surface.faces[i], v) for i in surface.vertex_faces[v])
