"""Vertex-edge refinements of a model triangle relative to a family of convex polygons.

Everything here lives in the projective chart of a model plane (gnomonic
for kappa > 0, Klein for kappa < 0, the plane itself for kappa = 0), where
geodesics are straight segments. Points are complex numbers.

A *step* ``(v, w)`` cuts the piece that has ``v`` as a corner along the
segment from ``v`` to the boundary point ``w``. A list of steps is a
certificate: replaying it from the starting polygon must reproduce the
triangles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.spatial import ConvexHull

from . import planar
from .model_space import model_space

MERGE_RTOL = 1e-11
ON_LINE_RTOL = 1e-12
AREA_RTOL = 1e-9

Step = tuple[int, int]


class TriangulationError(ValueError):
    pass


class ReplayError(TriangulationError):
    pass


# ----------------------------------------------------------------------
# polygons


@dataclass(frozen=True)
class ChartPolygon:
    """Convex polygon in a projective chart, counter-clockwise."""

    vertices: tuple[complex, ...]
    kappa: float = 0.0

    def __post_init__(self):
        vs = tuple(complex(v) for v in self.vertices)
        object.__setattr__(self, "vertices", vs)
        if len(vs) < 3:
            raise TriangulationError("a polygon needs at least three vertices")
        if not all(math.isfinite(v.real) and math.isfinite(v.imag) for v in vs):
            raise TriangulationError("non-finite vertex")
        if self.kappa < 0:
            bound = 1 / math.sqrt(-self.kappa)
            if any(abs(v) >= bound for v in vs):
                raise TriangulationError("vertex outside the Klein disk")
        if planar.signed_area(vs) <= 0:
            raise TriangulationError("polygon must be counter-clockwise with positive area")
        scale = max(abs(v) for v in vs) + max(abs(a - b) for a in vs for b in vs)
        n = len(vs)
        for i in range(n):
            if planar.orient(vs[i - 1], vs[i], vs[(i + 1) % n]) < -ON_LINE_RTOL * scale * scale:
                raise TriangulationError("polygon is not convex")

    @classmethod
    def from_points(cls, points: Sequence, kappa: float = 0.0) -> "ChartPolygon":
        """Counter-clockwise polygon; the first point stays first."""
        pts = [complex(p) for p in points]
        if planar.signed_area(pts) < 0:
            pts = pts[:1] + pts[:0:-1]
        return cls(tuple(pts), kappa)

    @classmethod
    def from_conformal(cls, points: Sequence, kappa: float = 0.0) -> "ChartPolygon":
        """Polygon whose vertices are given in the conformal chart."""
        space = model_space(kappa)
        return cls.from_points([space.to_projective(p) for p in points], kappa)

    @property
    def area(self) -> float:
        return planar.area(self.vertices)

    def model_area(self) -> float:
        return planar.model_area(model_space(self.kappa), self.vertices)

    def contains(self, z: complex, tol: float = 1e-10) -> bool:
        return planar.inside_convex(complex(z), self.vertices, tol)

    def side_lengths(self) -> list[float]:
        space = model_space(self.kappa)
        pts = [space.from_projective(v) for v in self.vertices]
        return [float(space.distance(pts[i], pts[(i + 1) % len(pts)])) for i in range(len(pts))]

    def to_list(self) -> list[list[float]]:
        return [[v.real, v.imag] for v in self.vertices]


class ClipResult(NamedTuple):
    polygon: ChartPolygon | None
    kind: str  # "polygon", "segment", "point" or "empty"
    vertices: list[complex]


def intersect_convex(a: ChartPolygon, b: ChartPolygon) -> ClipResult:
    """Intersection of two convex polygons in the same chart."""
    if a.kappa != b.kappa:
        raise TriangulationError(f"chart mismatch: kappa {a.kappa} vs {b.kappa}")
    pts = planar.clip_convex(a.vertices, b.vertices)
    scale = max(max(abs(v) for v in a.vertices), 1.0)
    if not pts:
        return ClipResult(None, "empty", [])
    if len(pts) == 1:
        return ClipResult(None, "point", pts)
    if planar.area(pts) <= 1e-14 * scale * scale:
        return ClipResult(None, "segment" if len(pts) >= 2 else "point", pts)
    return ClipResult(ChartPolygon(tuple(planar.ccw(pts)), a.kappa), "polygon", pts)


def _on_segment(z: complex, a: complex, b: complex, tol: float) -> bool:
    """``z`` on the closed segment ``[a, b]`` up to ``tol`` (relative to its length)."""
    d = b - a
    L = abs(d)
    if L == 0:
        return abs(z - a) <= tol
    if abs(planar.cross(d, z - a)) > tol * L * L:
        return False
    s = ((z - a) * d.conjugate()).real / (L * L)
    return -tol <= s <= 1 + tol


def extend_geodesic_to_side(parent: ChartPolygon, v: complex) -> tuple[complex, bool]:
    """Where the ray from the first vertex ``p`` through ``v`` meets the side ``[q r]``.

    Returns ``(foot, on_side)``; ``on_side`` is True when ``v`` already lies on
    ``[q r]`` (then the foot is ``v`` itself).
    """
    if len(parent.vertices) != 3:
        raise TriangulationError("parent must be a triangle")
    p, q, r = parent.vertices
    v = complex(v)
    scale = max(abs(q - p), abs(r - p), abs(r - q))
    if abs(v - p) <= ON_LINE_RTOL * scale:
        raise TriangulationError("v coincides with p")
    if _on_segment(v, q, r, ON_LINE_RTOL):
        return v, True
    if not parent.contains(v, tol=0.0) or _on_segment(v, p, q, ON_LINE_RTOL) or _on_segment(v, p, r, ON_LINE_RTOL):
        raise TriangulationError(f"{v} is not interior to the parent triangle")
    t, u = planar.segment_intersection(p, v, q, r)
    u = min(max(u, 0.0), 1.0)
    return q + u * (r - q), False


# ----------------------------------------------------------------------
# point bookkeeping


class PointTable:
    """Points merged within a relative tolerance; ids are insertion order."""

    def __init__(self, scale: float):
        self.points: list[complex] = []
        self.tol = MERGE_RTOL * max(scale, 1e-300)
        self._grid: dict[tuple[int, int], list[int]] = {}
        self._cell = max(self.tol * 8, 1e-300)

    def _key(self, z: complex) -> tuple[int, int]:
        return (math.floor(z.real / self._cell), math.floor(z.imag / self._cell))

    def find(self, z: complex) -> int | None:
        kx, ky = self._key(z)
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for i in self._grid.get((kx + dx, ky + dy), ()):
                    if abs(self.points[i] - z) <= self.tol:
                        return i
        return None

    def add(self, z: complex) -> int:
        z = complex(z)
        i = self.find(z)
        if i is not None:
            return i
        self.points.append(z)
        self._grid.setdefault(self._key(z), []).append(len(self.points) - 1)
        return len(self.points) - 1


# ----------------------------------------------------------------------
# replay


def _split(piece: list[int], v: int, w: int, pts: list[complex], tol: float) -> tuple[list[int], list[int]] | None:
    """Cut ``piece`` (corner ids, ccw) along ``v -> w``; None if that is not a valid cut."""
    n = len(piece)
    if v not in piece or v == w:
        return None
    ring = list(piece)
    if w not in ring:
        for i in range(n):
            a, b = ring[i], ring[(i + 1) % n]
            if v in (a, b):
                continue
            if _on_segment(pts[w], pts[a], pts[b], tol):
                ring.insert(i + 1, w)
                break
        else:
            return None
    i, j = ring.index(v), ring.index(w)
    m = len(ring)
    if (j - i) % m in (1, m - 1):
        return None  # already an edge
    first = [ring[(i + k) % m] for k in range((j - i) % m + 1)]
    second = [ring[(j + k) % m] for k in range((i - j) % m + 1)]
    mid = (pts[v] + pts[w]) / 2
    if not planar.inside_convex(mid, [pts[x] for x in piece], tol=tol):
        return None
    return first, second


def replay(start: Sequence[int], steps: Sequence[Step], points: Sequence[complex],
           skip_noop: bool = False, tol: float = 1e-9) -> tuple[list[list[int]], list[Step]]:
    """Apply ``steps`` to the polygon with corner ids ``start``.

    Returns the final pieces and the steps actually applied. With
    ``skip_noop`` steps that cut along an existing edge are dropped instead
    of raising :class:`ReplayError`.
    """
    pts = list(points)
    pieces = [list(start)]
    applied = []
    for step in steps:
        done = False
        # in construction mode a cut may be recorded from either end
        for v, w in [step, step[::-1]] if skip_noop else [step]:
            for idx, piece in enumerate(pieces):
                if v not in piece:
                    continue
                cut = _split(piece, v, w, pts, tol)
                if cut is None:
                    continue
                pieces[idx:idx + 1] = list(cut)
                applied.append((v, w))
                done = True
                break
            if done:
                break
        v, w = step
        if not done:
            if skip_noop and (v == w or any(_along_boundary(p, v, w, pts, tol) or _along_boundary(p, w, v, pts, tol)
                                            for p in pieces)):
                continue
            raise ReplayError(f"step {(v, w)} does not cut any piece")
    return pieces, applied


def _is_edge(piece: list[int], v: int, w: int) -> bool:
    n = len(piece)
    return any({piece[i], piece[(i + 1) % n]} == {v, w} for i in range(n))


def _along_boundary(piece: list[int], v: int, w: int, pts: list[complex], tol: float) -> bool:
    """``v -> w`` runs along an edge of ``piece`` incident to ``v``."""
    if v not in piece:
        return False
    n = len(piece)
    i = piece.index(v)
    d = pts[w] - pts[v]
    for x in (piece[i - 1], piece[(i + 1) % n]):
        e = pts[x] - pts[v]
        L = abs(d) * abs(e)
        if L and abs(planar.cross(d, e)) <= tol * L and (d * e.conjugate()).real > 0:
            return True
    return False


def _same_pieces(pieces: list[list[int]], triangles: Sequence[Sequence[int]]) -> bool:
    a = sorted(tuple(sorted(p)) for p in pieces)
    b = sorted(tuple(sorted(t)) for t in triangles)
    return a == b


# ----------------------------------------------------------------------
# refinement


@dataclass
class RefinementOutput:
    parent: ChartPolygon
    family: list[ChartPolygon]
    points: list[complex]
    triangles: list[tuple[int, int, int]]
    owner: list[int | None]
    certificate: dict = field(default_factory=dict)
    parent_ids: list[int] = field(default_factory=list)
    family_ids: list[list[int]] = field(default_factory=list)

    def triangle_points(self, i: int) -> tuple[complex, complex, complex]:
        a, b, c = self.triangles[i]
        return self.points[a], self.points[b], self.points[c]

    def triangle_polygons(self) -> list[ChartPolygon]:
        return [ChartPolygon(self.triangle_points(i), self.parent.kappa) for i in range(len(self.triangles))]

    def owned(self, m: int) -> list[int]:
        return [i for i, o in enumerate(self.owner) if o == m]

    def replay_parent(self) -> bool:
        pieces, _ = replay(self.parent_ids, self.certificate["parent"], self.points)
        return _same_pieces(pieces, self.triangles)

    def replay_family(self, m: int) -> bool:
        pieces, _ = replay(self.family_ids[m], self.certificate["family"][m], self.points)
        return _same_pieces(pieces, [self.triangles[i] for i in self.owned(m)])

    def to_dict(self) -> dict:
        return {
            "kappa": self.parent.kappa,
            "parent": self.parent.to_list(),
            "family": [f.to_list() for f in self.family],
            "points": [[z.real, z.imag] for z in self.points],
            "triangles": [list(t) for t in self.triangles],
            "owner": ["background" if o is None else o for o in self.owner],
            "certificate": {
                "parent_start": self.parent_ids,
                "parent": [list(s) for s in self.certificate["parent"]],
                "family_start": self.family_ids,
                "family": [[list(s) for s in steps] for steps in self.certificate["family"]],
            },
        }


def _check_family(parent: ChartPolygon, family: Sequence[ChartPolygon]) -> None:
    area = parent.area
    for m, a in enumerate(family):
        if a.kappa != parent.kappa:
            raise TriangulationError(f"family polygon {m} lives in a different chart")
        if not all(parent.contains(v, tol=1e-10) for v in a.vertices):
            raise TriangulationError(f"family polygon {m} is not contained in the parent")
    for i in range(len(family)):
        for j in range(i + 1, len(family)):
            ov = planar.area(planar.clip_convex(family[i].vertices, family[j].vertices))
            if ov > 1e-12 * area:
                raise TriangulationError(f"family polygons {i} and {j} overlap (area {ov:.3g})")


def _parent_admissible(parent: ChartPolygon) -> None:
    space = model_space(parent.kappa)
    if parent.kappa > 0 and sum(parent.side_lengths()) >= 2 * space.diameter:
        raise TriangulationError("parent perimeter is not below 2*D_kappa")


def ve_refine(parent: ChartPolygon, family: Sequence[ChartPolygon] = ()) -> RefinementOutput:
    """Refine ``parent`` so that it and every family polygon are vertex-edge triangulated.

    Geodesics from the first parent vertex ``p`` through every family vertex
    cut the parent into sectors; inside each sector the pieces of family
    edges are stacked from the far side towards ``p`` and every strip between
    consecutive pieces is split by a diagonal.
    """
    if len(parent.vertices) != 3:
        raise TriangulationError("parent must be a triangle")
    family = list(family)
    _check_family(parent, family)
    _parent_admissible(parent)
    p, q, r = parent.vertices
    scale = max(abs(q - p), abs(r - p), abs(r - q))
    table = PointTable(scale)
    pid, qid, rid = table.add(p), table.add(q), table.add(r)
    fam_ids = [[table.add(v) for v in a.vertices] for a in family]

    # fan feet on [q r], by parameter u from q
    tol_u = ON_LINE_RTOL * 10
    us = [0.0, 1.0]
    for ids in fam_ids:
        for i in ids:
            v = table.points[i]
            if i == pid:
                continue
            t, u = planar.segment_intersection(p, v, q, r)
            us.append(min(max(u, 0.0), 1.0))
    us.sort()
    feet = [0.0]
    for u in us[1:]:
        if u - feet[-1] > tol_u:
            feet.append(u)
    feet[-1] = 1.0
    K = len(feet) - 1
    foot_ids = [qid] + [table.add(q + u * (r - q)) for u in feet[1:-1]] + [rid]

    def line_of(z: complex) -> int:
        t, u = planar.segment_intersection(p, z, q, r)
        return int(np.argmin([abs(u - f) for f in feet]))

    def t_on(k: int, z: complex) -> float:
        d = table.points[foot_ids[k]] - p
        return ((z - p) * d.conjugate()).real / abs(d) ** 2

    # per-line registered family points: line -> {polygon: [(t, id)]}
    on_line: list[dict[int, list[tuple[float, int]]]] = [dict() for _ in range(K + 1)]
    chords: list[dict[tuple[int, int], tuple[float, float]]] = [dict() for _ in range(K)]
    ranges = []

    def register(m: int, k: int, t: float, i: int):
        on_line[k].setdefault(m, []).append((t, i))

    for m, ids in enumerate(fam_ids):
        lines = {}
        for i in ids:
            if i != pid:
                lines[i] = line_of(table.points[i])
        ranges.append((min(lines.values()), max(lines.values())))
        n = len(ids)
        for e in range(n):
            a, b = ids[e], ids[(e + 1) % n]
            if pid in (a, b):
                other = b if a == pid else a
                k = lines[other]
                register(m, k, 0.0, pid)
                register(m, k, t_on(k, table.points[other]), other)
                continue
            ka, kb = lines[a], lines[b]
            if ka > kb:
                a, b, ka, kb = b, a, kb, ka
            pa, pb = table.points[a], table.points[b]
            seq = [(ka, t_on(ka, pa), a)]
            for k in range(ka + 1, kb):
                fk = table.points[foot_ids[k]]
                s, _ = planar.segment_intersection(pa, pb, p, fk)
                z = pa + s * (pb - pa)
                seq.append((k, t_on(k, z), table.add(z)))
            if kb != ka:
                seq.append((kb, t_on(kb, pb), b))
            else:
                seq.append((ka, t_on(ka, pb), b))
            for k, t, i in seq:
                register(m, k, t, i)
            for (k1, t1, i1), (k2, t2, i2) in zip(seq[:-1], seq[1:]):
                if k1 == k2:
                    continue
                if t1 >= 1 - tol_u and t2 >= 1 - tol_u:
                    continue  # lies on [q r]
                chords[k1][(i1, i2)] = (t1, t2)

    triangles: list[tuple[int, int, int]] = []
    parent_steps: list[Step] = [(pid, foot_ids[k]) for k in range(1, K)]
    for k in range(K):
        base = (foot_ids[k], foot_ids[k + 1])
        stack = dict(chords[k])
        stack[base] = (1.0, 1.0)
        order = sorted(stack.items(), key=lambda kv: (-kv[1][0], -kv[1][1], kv[0]))
        seq = [ids for ids, _ in order]
        for (a0, b0), (a1, b1) in zip(seq[:-1], seq[1:]):
            if b0 != b1:
                triangles.append((a0, b0, b1))
            if a0 != a1:
                triangles.append((a0, b1, a1))
            parent_steps += [(a0, b1), (b1, a1)]
        am, bm = seq[-1]
        if pid not in (am, bm):
            triangles.append((am, bm, pid))

    pts = table.points
    triangles = [t if planar.orient(*(pts[i] for i in t)) > 0 else (t[0], t[2], t[1]) for t in triangles]
    owner: list[int | None] = []
    for t in triangles:
        c = planar.centroid([pts[i] for i in t])
        hit = [m for m, a in enumerate(family) if a.contains(c, tol=0.0)]
        owner.append(hit[0] if hit else None)

    parent_ids = [pid, qid, rid]
    _, parent_applied = replay(parent_ids, parent_steps, pts, skip_noop=True)

    family_steps = []
    for m, ids in enumerate(fam_ids):
        k0, k1 = ranges[m]
        has_p = pid in ids
        lo, hi = {}, {}
        for k in range(k0, k1 + 1):
            regs = on_line[k].get(m, [])
            lo[k] = max(regs)[1]
            hi[k] = pid if has_p else min(regs)[1]
        # first the lines through vertices of the polygon, then each slab
        # between two such lines, zigzagging away from whichever end is wide
        vlines = sorted({line_of(table.points[i]) for i in ids if i != pid} | {k0, k1})
        steps = [(hi[k], lo[k]) for k in vlines[1:-1]]
        for ka, kb in zip(vlines[:-1], vlines[1:]):
            slab = []
            for k in range(ka, kb):
                slab.append((lo[k], hi[k + 1]))
                if k + 1 < kb:
                    slab.append((hi[k + 1], lo[k + 1]))
            steps += slab if lo[ka] != hi[ka] else slab[::-1]
        _, applied = replay(ids, steps, pts, skip_noop=True)
        family_steps.append(applied)

    return RefinementOutput(
        parent, family, pts, triangles, owner,
        {"parent": parent_applied, "family": family_steps}, parent_ids, fam_ids,
    )


# ----------------------------------------------------------------------
# recognition


class VertexEdgeResult(NamedTuple):
    result: bool | None  # None: search budget exhausted
    trace: list[tuple[complex, complex]]
    nodes: int


def _tiling_check(parent: ChartPolygon, tris: list[tuple[complex, complex, complex]]) -> None:
    total = math.fsum(planar.area(t) for t in tris)
    if abs(total - parent.area) > AREA_RTOL * parent.area:
        raise TriangulationError(f"triangles cover area {total} but the polygon has area {parent.area}")
    for t in tris:
        if not all(parent.contains(z, tol=1e-9) for z in t):
            raise TriangulationError("a triangle sticks out of the polygon")


def is_vertex_edge(parent: ChartPolygon, triangles: Sequence, budget: int | None = None) -> VertexEdgeResult:
    """Search for a sequence of vertex-to-edge cuts producing ``triangles`` from ``parent``.

    At each stage a cut must run from a corner of the current piece, along
    triangle edges, to a boundary point of the piece, with every triangle on
    one side. The search backtracks; it gives up with ``result=None`` after
    ``budget`` nodes (default four per triangle).
    """
    tris = [tuple(complex(z) for z in (t.vertices if isinstance(t, ChartPolygon) else t)) for t in triangles]
    if not tris:
        raise TriangulationError("no triangles")
    _tiling_check(parent, tris)
    scale = max(abs(a - b) for a in parent.vertices for b in parent.vertices)
    table = PointTable(scale)
    start = [table.add(v) for v in parent.vertices]
    tid = [tuple(table.add(z) for z in t) for t in tris]
    pts = table.points
    P = np.array(pts)
    T = np.array(tid)
    budget = 4 * len(tris) if budget is None else budget
    nodes = 0
    tol = 1e-9

    class Exhausted(Exception):
        pass

    def corners(piece: list[int]) -> list[int]:
        n = len(piece)
        out = []
        for i in range(n):
            a, b, c = pts[piece[i - 1]], pts[piece[i]], pts[piece[(i + 1) % n]]
            if planar.orient(a, b, c) > tol * abs(c - a) * max(abs(b - a), abs(c - b)):
                out.append(piece[i])
        return out

    def exit_point(piece: list[int], v: int, w: int) -> int | None:
        pv, d = pts[v], pts[w] - pts[v]
        best = None
        n = len(piece)
        for i in range(n):
            a, b = piece[i], piece[(i + 1) % n]
            if v in (a, b):
                continue
            hit = planar.segment_intersection(pv, pv + d, pts[a], pts[b])
            if hit is None:
                continue
            s, u = hit
            if s > tol and -tol <= u <= 1 + tol and (best is None or s < best[0]):
                best = (s, pts[a] + u * (pts[b] - pts[a]))
        if best is None:
            return None
        return table.find(best[1])

    def search(piece: list[int], idx: np.ndarray) -> list | None:
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise Exhausted
        cs = corners(piece)
        if len(idx) == 1:
            return [] if sorted(cs) == sorted(T[idx[0]]) else None
        sub = T[idx]
        A, B, C = P[sub[:, 0]], P[sub[:, 1]], P[sub[:, 2]]
        cands = []
        for v in cs:
            mine = idx[np.any(T[idx] == v, axis=1)]
            for t in mine:
                for w in T[t]:
                    if w == v:
                        continue
                    e = exit_point(piece, v, int(w))
                    if e is not None and e != v and (v, e) not in cands:
                        cands.append((v, e))
        for v, e in cands:
            a, d = pts[v], pts[e] - pts[v]
            L = abs(d)
            sides = np.stack([np.imag(np.conj(d) * (X - a)) for X in (A, B, C)], axis=1) / L
            lim = tol * scale
            pos = np.all(sides >= -lim, axis=1)
            neg = np.all(sides <= lim, axis=1)
            if not np.all(pos | neg):
                continue
            cut = _split(piece, v, e, pts, 1e-9)
            if cut is None:
                continue
            left = idx[pos & ~neg]
            right = idx[neg & ~pos]
            if len(left) + len(right) != len(idx) or not len(left) or not len(right):
                continue
            first, second = cut
            # the first piece runs ccw from v to e, i.e. on the right of v->e
            r1 = search(first, right)
            if r1 is None:
                continue
            r2 = search(second, left)
            if r2 is None:
                continue
            return [(v, e)] + r1 + r2
        return None

    try:
        steps = search(start, np.arange(len(tris)))
    except Exhausted:
        return VertexEdgeResult(None, [], nodes)
    if steps is None:
        return VertexEdgeResult(False, [], nodes)
    pieces, _ = replay(start, steps, pts)
    if not _same_pieces(pieces, tid):
        raise ReplayError("recognised cut sequence does not replay")
    return VertexEdgeResult(True, [(pts[v], pts[w]) for v, w in steps], nodes)


def replay_trace(parent: ChartPolygon, trace: Sequence[tuple[complex, complex]], triangles: Sequence) -> bool:
    """Replay a coordinate trace from ``parent`` and compare with ``triangles``."""
    tris = [tuple(complex(z) for z in (t.vertices if isinstance(t, ChartPolygon) else t)) for t in triangles]
    scale = max(abs(a - b) for a in parent.vertices for b in parent.vertices)
    table = PointTable(scale)
    start = [table.add(v) for v in parent.vertices]
    tid = [tuple(table.add(z) for z in t) for t in tris]
    steps = [(table.add(a), table.add(b)) for a, b in trace]
    pieces, _ = replay(start, steps, table.points)
    return _same_pieces(pieces, tid)


# ----------------------------------------------------------------------
# excess bookkeeping


def polygon_excess(poly: ChartPolygon) -> float:
    """Angle sum minus ``(n - 2) pi``, from a fan of model triangles."""
    space = model_space(poly.kappa)
    pts = [space.from_projective(v) for v in poly.vertices]
    total = []
    for i in range(1, len(pts) - 1):
        tri = (pts[0], pts[i], pts[i + 1])
        a, b, c = (float(space.distance(tri[j], tri[(j + 1) % 3])) for j in range(3))
        total.append(space.triangle_data(a, b, c).excess)
    return math.fsum(total)


def family_excess_bound_demo(parent: ChartPolygon, family: Sequence[ChartPolygon], target_kappa: float) -> dict:
    """Total excess of the family next to ``target_kappa`` times the parent's comparison area."""
    if parent.kappa > target_kappa:
        raise ValueError("ambient curvature must not exceed the target")
    _check_family(parent, family)
    sides = parent.side_lengths()
    area = model_space(target_kappa).triangle_data(*sides).area
    return {
        "family_excess": math.fsum(polygon_excess(a) for a in family),
        "parent_model_area_scaled": target_kappa * area,
    }


# ----------------------------------------------------------------------
# random scenes


def random_scene(rng: np.random.Generator, kappa: float = 0.0, max_polygons: int = 4,
                 max_vertices: int = 6, tries: int = 200) -> tuple[ChartPolygon, list[ChartPolygon]]:
    """A random parent triangle with up to ``max_polygons`` disjoint convex polygons inside."""
    reach = 0.8 if kappa >= 0 else 0.8 / math.sqrt(-kappa)
    while True:
        ang = np.sort(rng.uniform(0, 2 * np.pi, 3))
        rad = rng.uniform(0.3, 1.0, 3) * reach
        tri = [complex(x * np.cos(a), x * np.sin(a)) for x, a in zip(rad, ang)]
        if planar.area(tri) > 0.05 * reach * reach:
            break
    if kappa < 0:
        tri = [z * min(1.0, 0.9 / (abs(z) * math.sqrt(-kappa))) for z in tri]
    parent = ChartPolygon.from_points(tri, kappa)
    family: list[ChartPolygon] = []
    want = int(rng.integers(0, max_polygons + 1))
    for _ in range(tries):
        if len(family) >= want:
            break
        w = rng.dirichlet(np.ones(3))
        c = w[0] * tri[0] + w[1] * tri[1] + w[2] * tri[2]
        size = rng.uniform(0.05, 0.3) * reach
        n = int(rng.integers(3, max_vertices + 1))
        ang = np.sort(rng.uniform(0, 2 * np.pi, n))
        pts = [c + size * rng.uniform(0.3, 1.0) * complex(np.cos(a), np.sin(a)) for a in ang]
        if not all(parent.contains(z, tol=0.0) for z in pts):
            continue
        try:
            hull = ConvexHull(np.array([[z.real, z.imag] for z in pts]))
            cand = ChartPolygon.from_points([pts[i] for i in hull.vertices], kappa)
        except Exception:
            continue
        if any(planar.area(planar.clip_convex(cand.vertices, f.vertices)) > 0 for f in family):
            continue
        family.append(cand)
    return parent, family
