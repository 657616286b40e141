import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial import ConvexHull
from shapely.geometry import Polygon

from catsurf import comparison, planar
from catsurf import triangulation as tr
from catsurf.model_space import model_space

UNIT = tr.ChartPolygon.from_points([0, 1, 1j])
SQUARE = tr.ChartPolygon.from_points([0, 1, 1 + 1j, 1j])


def big_parent(kappa=0.0):
    s = 0.6 if kappa >= 0 else 0.6 / math.sqrt(-kappa)
    return tr.ChartPolygon.from_points([0, s, s * 1j], kappa)


def barycentric(parent):
    p, q, r = parent.vertices
    c = (p + q + r) / 3
    mpq, mqr, mrp = (p + q) / 2, (q + r) / 2, (r + p) / 2
    return [(p, mpq, c), (mpq, q, c), (q, mqr, c), (mqr, r, c), (r, mrp, c), (mrp, p, c)]


def star(parent):
    p, q, r = parent.vertices
    c = (p + q + r) / 3
    return [(p, q, c), (q, r, c), (r, p, c)]


def convex_from(rng, centre, size, n):
    ang = rng.uniform(0, 2 * np.pi, n)
    pts = centre + size * rng.uniform(0.2, 1.0, n) * np.exp(1j * ang)
    hull = ConvexHull(np.c_[pts.real, pts.imag])
    return tr.ChartPolygon.from_points(pts[hull.vertices])


def shapely(poly):
    return Polygon([(z.real, z.imag) for z in poly.vertices])


# ---------------------------------------------------------------- polygons


def test_polygon_validation():
    with pytest.raises(tr.TriangulationError):
        tr.ChartPolygon((0, 1))
    with pytest.raises(tr.TriangulationError):
        tr.ChartPolygon((0, 1j, 1))  # clockwise
    with pytest.raises(tr.TriangulationError):
        tr.ChartPolygon((0, 2, 1 + 0.1j, 2 + 2j, 2j))  # reflex vertex
    with pytest.raises(tr.TriangulationError):
        tr.ChartPolygon((0, 0.5, 2j), kappa=-1.0)  # leaves the Klein disk
    with pytest.raises(tr.TriangulationError):
        tr.ChartPolygon((0, complex(math.nan, 0), 1j))
    assert tr.ChartPolygon.from_points([0, 1j, 1]).vertices == (0, 1, 1j)
    assert tr.ChartPolygon.from_points([5, 1j, 1]).vertices[0] == 5


def test_polygon_from_conformal_and_lengths():
    space = model_space(1.0)
    poly = tr.ChartPolygon.from_conformal([0, 0.5, 0.5j], 1.0)
    sides = poly.side_lengths()
    assert sides[0] == pytest.approx(float(space.distance(0, 0.5)), rel=1e-13)
    assert sides[2] == pytest.approx(float(space.distance(0.5j, 0)), rel=1e-13)


def test_intersect_idempotent():
    res = tr.intersect_convex(SQUARE, SQUARE)
    assert res.kind == "polygon" and res.polygon.area == pytest.approx(1.0)


def test_intersect_disjoint():
    far = tr.ChartPolygon.from_points([3, 4, 4 + 1j, 3 + 1j])
    assert tr.intersect_convex(SQUARE, far).kind == "empty"


def test_intersect_offset_squares():
    moved = tr.ChartPolygon.from_points([v + (0.5 + 0.5j) for v in SQUARE.vertices])
    res = tr.intersect_convex(SQUARE, moved)
    assert res.kind == "polygon"
    assert planar.area(res.vertices) == pytest.approx(0.25, abs=1e-15)


def test_intersect_lower_dimensional():
    right = tr.ChartPolygon.from_points([1, 2, 2 + 1j, 1 + 1j])
    assert tr.intersect_convex(SQUARE, right).kind == "segment"
    corner = tr.ChartPolygon.from_points([1 + 1j, 2 + 1j, 2 + 2j])
    assert tr.intersect_convex(SQUARE, corner).kind in ("point", "segment")


def test_intersect_chart_mismatch():
    with pytest.raises(tr.TriangulationError, match="chart"):
        tr.intersect_convex(UNIT, tr.ChartPolygon(UNIT.vertices, 1.0))


@given(seed=st.integers(0, 2**31))
def test_intersect_matches_shapely(seed):
    rng = np.random.default_rng(seed)
    a = convex_from(rng, complex(*rng.uniform(-1, 1, 2)), 1.0, int(rng.integers(3, 9)))
    b = convex_from(rng, complex(*rng.uniform(-1, 1, 2)), 1.0, int(rng.integers(3, 9)))
    res = tr.intersect_convex(a, b)
    expect = shapely(a).intersection(shapely(b)).area
    got = res.polygon.area if res.polygon is not None else 0.0
    assert got == pytest.approx(expect, abs=1e-12)


# ---------------------------------------------------------------- geodesic extension


def test_extend_median_midpoint():
    p, q, r = UNIT.vertices
    m = (q + r) / 2
    foot, on_side = tr.extend_geodesic_to_side(UNIT, (p + m) / 2)
    assert not on_side and abs(foot - m) <= 1e-15


def test_extend_on_side_returns_point():
    foot, on_side = tr.extend_geodesic_to_side(UNIT, 0.3 + 0.7j)
    assert on_side and foot == 0.3 + 0.7j


def test_extend_errors():
    with pytest.raises(tr.TriangulationError):
        tr.extend_geodesic_to_side(UNIT, 0)
    with pytest.raises(tr.TriangulationError):
        tr.extend_geodesic_to_side(UNIT, 2 + 2j)
    with pytest.raises(tr.TriangulationError):
        tr.extend_geodesic_to_side(UNIT, 0.5)  # on [p q]
    with pytest.raises(tr.TriangulationError):
        tr.extend_geodesic_to_side(SQUARE, 0.5 + 0.5j)


@given(w=st.tuples(st.floats(0.01, 1), st.floats(0.01, 1), st.floats(0.01, 1)),
       kappa=st.sampled_from([-1.0, 0.0, 1.0]))
def test_extend_predicates(w, kappa):
    parent = big_parent(kappa)
    p, q, r = parent.vertices
    s = sum(w)
    v = (w[0] * p + w[1] * q + w[2] * r) / s
    foot, on_side = tr.extend_geodesic_to_side(parent, v)
    scale = abs(q - r)
    assert not on_side
    assert abs(planar.orient(p, v, foot)) <= 1e-12 * scale * scale
    assert abs(planar.orient(q, r, foot)) <= 1e-12 * scale * scale
    u = ((foot - q) * (r - q).conjugate()).real / abs(r - q) ** 2
    assert -1e-12 <= u <= 1 + 1e-12
    # v lies between p and the foot
    assert ((v - p) * (foot - p).conjugate()).real > 0 and abs(v - p) <= abs(foot - p) * (1 + 1e-12)


# ---------------------------------------------------------------- refinement


def check_output(out, area_rtol=1e-9):
    parent = out.parent
    tris = out.triangle_polygons()
    total = math.fsum(t.area for t in tris)
    assert abs(total - parent.area) <= area_rtol * parent.area
    boxes = [(min(z.real for z in t.vertices), max(z.real for z in t.vertices),
              min(z.imag for z in t.vertices), max(z.imag for z in t.vertices)) for t in tris]
    for i in range(len(tris)):
        for j in range(i + 1, len(tris)):
            a, b = boxes[i], boxes[j]
            if a[1] < b[0] or b[1] < a[0] or a[3] < b[2] or b[3] < a[2]:
                continue
            ov = planar.area(planar.clip_convex(tris[i].vertices, tris[j].vertices))
            assert ov <= 1e-12, (i, j, ov)
    for m, A in enumerate(out.family):
        owned = math.fsum(tris[i].area for i in out.owned(m))
        assert owned == pytest.approx(A.area, rel=1e-9, abs=1e-15)
    assert out.replay_parent()
    for m in range(len(out.family)):
        assert out.replay_family(m)


def two_triangle_family():
    a = tr.ChartPolygon.from_points([0.05 + 0.05j, 0.25 + 0.08j, 0.1 + 0.2j])
    b = tr.ChartPolygon.from_points([0.3 + 0.1j, 0.45 + 0.05j, 0.35 + 0.2j])
    return [a, b]


def test_refine_empty_family():
    out = tr.ve_refine(big_parent())
    assert len(out.triangles) == 1 and out.owner == [None]
    assert set(out.triangle_points(0)) == set(big_parent().vertices)
    assert out.certificate["parent"] == []


def test_refine_one_triangle():
    parent = big_parent()
    A = tr.ChartPolygon.from_points([0.1 + 0.1j, 0.3 + 0.1j, 0.15 + 0.25j])
    out = tr.ve_refine(parent, [A])
    check_output(out)
    owned = [out.triangle_polygons()[i] for i in out.owned(0)]
    assert tr.is_vertex_edge(A, owned).result is True
    assert tr.is_vertex_edge(parent, out.triangle_polygons()).result is True


@pytest.mark.parametrize("kappa", [-1.0, 0.0, 1.0])
def test_refine_two_triangles(kappa):
    fam = [tr.ChartPolygon(f.vertices, kappa) for f in two_triangle_family()]
    out = tr.ve_refine(big_parent(kappa), fam)
    check_output(out)
    assert all(tr.is_vertex_edge(f, [out.triangle_polygons()[i] for i in out.owned(m)]).result
               for m, f in enumerate(fam))


def test_refine_degenerate_configurations():
    parent = big_parent()
    p, q, r = parent.vertices
    cases = {
        "vertex at p": [tr.ChartPolygon.from_points([p, 0.1, 0.1j])],
        "edge on the base": [tr.ChartPolygon.from_points([q, (q + r) / 2, 0.2 + 0.1j])],
        "whole parent": [parent],
        "two halves": [tr.ChartPolygon.from_points([p, q, (q + r) / 2]),
                       tr.ChartPolygon.from_points([p, (q + r) / 2, r])],
        "shared edge": [tr.ChartPolygon.from_points([0.1 + 0.1j, 0.2 + 0.1j, 0.1 + 0.2j]),
                        tr.ChartPolygon.from_points([0.2 + 0.1j, 0.2 + 0.2j, 0.1 + 0.2j])],
    }
    for name, fam in cases.items():
        out = tr.ve_refine(parent, fam)
        check_output(out)


def test_refine_errors():
    parent = big_parent()
    outside = tr.ChartPolygon.from_points([0.5, 0.7, 0.6 + 0.3j])
    with pytest.raises(tr.TriangulationError, match="not contained"):
        tr.ve_refine(parent, [outside])
    a = tr.ChartPolygon.from_points([0.1 + 0.1j, 0.3 + 0.1j, 0.1 + 0.3j])
    b = tr.ChartPolygon.from_points([0.15 + 0.15j, 0.35 + 0.15j, 0.15 + 0.35j])
    with pytest.raises(tr.TriangulationError, match="overlap"):
        tr.ve_refine(parent, [a, b])
    with pytest.raises(tr.TriangulationError):
        tr.ve_refine(SQUARE, [])
    # a chart triangle for kappa > 0 sits in an open hemisphere, so its perimeter stays below 2*pi
    huge = tr.ChartPolygon.from_conformal([-0.99, 0.99 * np.exp(2.1j), 0.99 * np.exp(-2.1j)], 1.0)
    assert sum(huge.side_lengths()) < 2 * math.pi
    assert len(tr.ve_refine(huge, []).triangles) == 1


def test_collinear_fan_geodesics_are_merged():
    parent = big_parent()
    # two family vertices on the same ray from p
    A = tr.ChartPolygon.from_points([0.1 + 0.1j, 0.15 + 0.1j, 0.1 + 0.15j])
    B = tr.ChartPolygon.from_points([0.2 + 0.2j, 0.3 + 0.2j, 0.2 + 0.3j])
    out = tr.ve_refine(parent, [A, B])
    check_output(out)
    p, q, r = parent.vertices
    on_base = [z for z in out.points if abs(planar.orient(q, r, z)) <= 1e-12]
    assert len(on_base) == len({round(z.real, 9) for z in on_base})


@settings(max_examples=40)
@given(seed=st.integers(0, 2**31), kappa=st.sampled_from([-1.0, 0.0, 1.0]))
def test_refine_invariants(seed, kappa):
    parent, fam = tr.random_scene(np.random.default_rng(seed), kappa)
    out = tr.ve_refine(parent, fam)
    check_output(out)


@settings(max_examples=15)
@given(seed=st.integers(0, 2**31))
def test_recogniser_round_trip(seed):
    parent, fam = tr.random_scene(np.random.default_rng(seed), 0.0, max_polygons=3, max_vertices=5)
    out = tr.ve_refine(parent, fam)
    tris = out.triangle_polygons()
    res = tr.is_vertex_edge(parent, tris)
    assert res.result is True
    assert tr.replay_trace(parent, res.trace, tris)
    for m, A in enumerate(fam):
        assert tr.is_vertex_edge(A, [tris[i] for i in out.owned(m)]).result is True


def _step_pieces(out):
    """Yield (piece before, two pieces after) for every parent certificate step."""
    pieces = [list(out.parent_ids)]
    for k, step in enumerate(out.certificate["parent"]):
        after, _ = tr.replay(out.parent_ids, out.certificate["parent"][:k + 1], out.points)
        old = [p for p in pieces if sorted(p) not in [sorted(a) for a in after]]
        new = [a for a in after if sorted(a) not in [sorted(p) for p in pieces]]
        assert len(old) == 1 and len(new) == 2
        yield old[0], new, step
        pieces = after


@settings(max_examples=15)
@given(seed=st.integers(0, 2**31), kappa=st.sampled_from([-1.0, 0.0, 0.5]))
def test_excess_and_area_monotone_along_certificate(seed, kappa):
    parent, fam = tr.random_scene(np.random.default_rng(seed), kappa, max_polygons=2)
    out = tr.ve_refine(parent, fam)
    space = model_space(kappa)
    target = 1.0
    for before, after, (v, w) in _step_pieces(out):
        if len(before) == 3:
            i = before.index(v)
            apex = out.points[v]
            q, r = out.points[before[(i + 1) % 3]], out.points[before[(i + 2) % 3]]
            tri = [space.from_projective(z) for z in (apex, q, r)]
            rec = comparison.subdivision_check(space, tri, space.from_projective(out.points[w]), target)
            assert rec.excess_children_sum >= rec.excess_parent - 1e-10
            assert rec.model_area_children_sum_at_kappa <= rec.model_area_parent_at_kappa + 1e-10
        else:
            polys = [tr.ChartPolygon.from_points([out.points[i] for i in pc], kappa) for pc in [before, *after]]
            ex = [tr.polygon_excess(pc) for pc in polys]
            assert ex[1] + ex[2] >= ex[0] - 1e-10


def test_to_dict_is_json():
    out = tr.ve_refine(big_parent(), two_triangle_family())
    d = json.loads(json.dumps(out.to_dict()))
    assert len(d["triangles"]) == len(out.triangles)
    assert "background" in d["owner"] and {0, 1} <= set(d["owner"])


# ---------------------------------------------------------------- recognition


def test_recognise_single_triangle():
    assert tr.is_vertex_edge(UNIT, [UNIT]).result is True


def test_recognise_median_split():
    p, q, r = UNIT.vertices
    m = (q + r) / 2
    res = tr.is_vertex_edge(UNIT, [(p, q, m), (p, m, r)])
    assert res.result is True and len(res.trace) == 1
    assert {res.trace[0][0], res.trace[0][1]} == {p, m}


def test_recognise_star_is_not_vertex_edge():
    """Coning from an interior point: no cut from a corner avoids crossing a triangle."""
    assert tr.is_vertex_edge(UNIT, star(UNIT)).result is False


def test_barycentric_subdivision_is_vertex_edge():
    """Median from p, then q to the centroid and on to the midpoint of [p q]."""
    res = tr.is_vertex_edge(UNIT, barycentric(UNIT))
    assert res.result is True
    assert len(res.trace) == 5
    assert tr.replay_trace(UNIT, res.trace, barycentric(UNIT))


def test_recognise_budget_exhaustion():
    p, q, r = UNIT.vertices
    m = (q + r) / 2
    res = tr.is_vertex_edge(UNIT, [(p, q, m), (p, m, r)], budget=1)
    assert res.result is None


def test_recognise_rejects_non_tiling():
    p, q, r = UNIT.vertices
    with pytest.raises(tr.TriangulationError):
        tr.is_vertex_edge(UNIT, [(p, q, (q + r) / 2)])


# ---------------------------------------------------------------- excess bound


def test_bound_empty_family():
    rec = tr.family_excess_bound_demo(big_parent(1.0), [], 1.0)
    assert rec["family_excess"] == 0.0 and rec["parent_model_area_scaled"] > 0


def test_bound_same_curvature_is_girard():
    parent = big_parent(1.0)
    A = tr.ChartPolygon.from_points([0.1 + 0.1j, 0.3 + 0.1j, 0.15 + 0.25j], 1.0)
    rec = tr.family_excess_bound_demo(parent, [A], 1.0)
    assert rec["family_excess"] == pytest.approx(A.model_area(), rel=1e-10)
    assert rec["parent_model_area_scaled"] == pytest.approx(parent.model_area(), rel=1e-10)
    assert rec["family_excess"] <= rec["parent_model_area_scaled"]


def test_bound_flat_ambient():
    fam = two_triangle_family()
    rec = tr.family_excess_bound_demo(big_parent(), fam, 1.0)
    assert abs(rec["family_excess"]) <= 1e-13 and rec["parent_model_area_scaled"] > 0


def test_bound_requires_ambient_below_target():
    with pytest.raises(ValueError):
        tr.family_excess_bound_demo(big_parent(1.0), [], 0.5)


@settings(max_examples=20)
@given(seed=st.integers(0, 2**31), kappa=st.sampled_from([-1.0, 0.0, 0.5, 1.0]))
def test_bound_holds_on_random_scenes(seed, kappa):
    parent, fam = tr.random_scene(np.random.default_rng(seed), kappa)
    rec = tr.family_excess_bound_demo(parent, fam, 1.0)
    assert rec["family_excess"] <= rec["parent_model_area_scaled"] + 1e-12
