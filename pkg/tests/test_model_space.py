import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy import integrate, optimize

from catsurf.model_space import InadmissibleTriangle, InvalidChartPoint, model_space

KAPPAS = [-2.0, -1.0, 0.0, 0.5, 1.0, 4.0]


def chart_point(kappa, radius_frac, angle):
    """Point at a fraction of the allowed chart radius."""
    limit = 1 / math.sqrt(-kappa) if kappa < 0 else 1.0
    return radius_frac * limit * complex(math.cos(angle), math.sin(angle))


points = st.tuples(st.floats(0, 0.9), st.floats(0, 2 * math.pi))


# ---------------------------------------------------------------- distance


def test_diameter():
    assert model_space(4.0).diameter == pytest.approx(math.pi / 2)
    assert model_space(0.0).diameter == math.inf
    assert model_space(-1.0).diameter == math.inf


def test_distance_sphere_equator():
    assert model_space(1.0).distance(0j, 1 + 0j) == pytest.approx(math.pi / 2, abs=1e-15)


def test_distance_plane_doubles():
    assert model_space(0.0).distance(0j, 1 + 0j) == 2.0


def test_distance_hyperbolic_against_line_integral():
    # length of the radial segment under ds = 2|dz|/(1 - |z|^2)
    oracle, _ = integrate.quad(lambda t: 2 / (1 - t * t), 0, 0.5, epsabs=1e-14)
    d = model_space(-1.0).distance(0j, 0.5 + 0j)
    assert d == pytest.approx(oracle, abs=1e-12)
    assert d == pytest.approx(math.log(3), abs=1e-14)


def test_invalid_point_outside_disk():
    with pytest.raises(InvalidChartPoint):
        model_space(-1.0).distance(0j, 1.0 + 0j)
    with pytest.raises(InvalidChartPoint):
        model_space(-4.0).distance(0j, 0.6j)


def test_sphere_distance_capped_at_diameter():
    sp = model_space(1.0)
    assert sp.distance(0j, 1e9 + 0j) <= sp.diameter


@pytest.mark.parametrize("kappa", KAPPAS)
@given(a=points, b=points, c=points)
def test_symmetry_and_triangle_inequality(kappa, a, b, c):
    sp = model_space(kappa)
    p, q, r = (chart_point(kappa, *x) for x in (a, b, c))
    assert sp.distance(p, q) == sp.distance(q, p)
    assert sp.distance(p, r) <= sp.distance(p, q) + sp.distance(q, r) + 1e-12


@pytest.mark.parametrize("kappa", [-3.0, -0.25, 0.25, 2.0])
@given(a=points, b=points)
def test_scaling_covariance(kappa, a, b):
    unit = model_space(math.copysign(1.0, kappa))
    sp = model_space(kappa)
    s = math.sqrt(abs(kappa))
    p, q = chart_point(-1.0 if kappa < 0 else 1.0, *a), chart_point(-1.0 if kappa < 0 else 1.0, *b)
    # ds_kappa at z/s equals ds_unit at z divided by s
    assert sp.distance(p / s, q / s) == pytest.approx(unit.distance(p, q) / s, rel=1e-10, abs=1e-14)


# ---------------------------------------------------------------- trigonometry


def test_side_from_angle_examples():
    assert model_space(1.0).side_from_angle(math.pi / 2, math.pi / 2, math.pi / 2) == pytest.approx(math.pi / 2)
    assert model_space(0.0).side_from_angle(3, 4, math.pi / 2) == pytest.approx(5.0, abs=1e-14)


def test_side_from_angle_hyperbolic_by_construction():
    sp = model_space(-1.0)
    rho = sp.radius_of_distance(1.0)
    built = sp.distance(complex(rho, 0), complex(0, rho))
    value = sp.side_from_angle(1.0, 1.0, math.pi / 2)
    assert value == pytest.approx(built, abs=1e-13)
    assert value == pytest.approx(math.acosh(math.cosh(1.0) ** 2), abs=1e-13)


def test_side_from_angle_domain():
    with pytest.raises(ValueError):
        model_space(1.0).side_from_angle(math.pi, 0.5, 1.0)
    with pytest.raises(ValueError):
        model_space(0.0).side_from_angle(1.0, 1.0, 4.0)


def test_angle_from_sides_examples():
    assert model_space(1.0).angle_from_sides(math.pi / 2, math.pi / 2, math.pi / 2) == pytest.approx(math.pi / 2)
    assert model_space(0.0).angle_from_sides(3, 4, 5) == pytest.approx(math.pi / 2, abs=1e-15)


def test_spherical_angle_by_root_finding():
    sp = model_space(1.0)
    q = complex(sp.radius_of_distance(0.3), 0)
    rr = sp.radius_of_distance(0.4)

    def gap(theta):
        return sp.distance(q, rr * complex(math.cos(theta), math.sin(theta))) - 0.5

    oracle = optimize.brentq(gap, 0.1, 3.0, xtol=1e-15)
    value = sp.angle_from_sides(0.3, 0.4, 0.5)
    assert value == pytest.approx(oracle, abs=1e-12)
    assert math.pi / 2 < value < math.pi / 2 + 0.1


def test_degenerate_and_invalid_triangles():
    sp = model_space(0.0)
    g, flag = sp.angle_from_sides(1.0, 1.0, 2.0, with_flag=True)
    assert flag and g == math.pi
    g, flag = sp.angle_from_sides(1.0, 2.0, 1.0, with_flag=True)
    assert flag and g == 0.0
    with pytest.raises(InadmissibleTriangle):
        sp.angle_from_sides(1.0, 1.0, 3.0)
    with pytest.raises(InadmissibleTriangle):
        model_space(1.0).angle_from_sides(3.0, 3.0, 3.0)


@pytest.mark.parametrize("kappa", KAPPAS)
@given(a=st.floats(0.01, 1.0), b=st.floats(0.01, 1.0), gamma=st.floats(0.01, math.pi - 0.01))
def test_law_of_cosines_round_trip(kappa, a, b, gamma):
    sp = model_space(kappa)
    scale = 0.7 * sp.diameter / 2 if kappa > 0 else 1.0
    a, b = a * scale, b * scale
    c = sp.side_from_angle(a, b, gamma)
    assume(min(b + c - a, a + c - b, a + b - c) > 1e-9 * (a + b + c))
    assert sp.angle_from_sides(a, b, c) == pytest.approx(gamma, abs=1e-10)


@given(a=st.floats(0.001, 0.03), b=st.floats(0.001, 0.03), gamma=st.floats(0.05, math.pi - 0.05))
def test_small_triangles_nearly_euclidean(a, b, gamma):
    sp = model_space(1.0)
    c = sp.side_from_angle(a, b, gamma)
    assume(a + b + c < 0.1)
    flat = a * a + b * b - 2 * a * b * math.cos(gamma)
    assert 0.5 * flat <= c * c <= 1.5 * flat


@given(a=st.floats(0.1, 1.0), b=st.floats(0.1, 1.0), t=st.floats(0.05, 0.95))
def test_angle_increases_with_curvature(a, b, t):
    c = abs(a - b) + t * (a + b - abs(a - b))
    assume(min(b + c - a, a + c - b, a + b - c) > 1e-6)
    ks = [-2.0, -1.0, 0.0, 0.5, 1.0]
    angles = [model_space(k).angle_from_sides(a, b, c) for k in ks]
    assert all(x < y for x, y in zip(angles[:-1], angles[1:]))


# ---------------------------------------------------------------- areas


def test_triangle_data_octant():
    t = model_space(1.0).triangle_data(math.pi / 2, math.pi / 2, math.pi / 2)
    assert t.excess == pytest.approx(math.pi / 2, abs=1e-12)
    assert t.area == pytest.approx(math.pi / 2, abs=1e-12)


def test_triangle_data_heron():
    t = model_space(0.0).triangle_data(3, 4, 5)
    assert t.excess == pytest.approx(0.0, abs=1e-14)
    assert t.area == pytest.approx(6.0, abs=1e-13)


def test_hyperbolic_area_by_quadrature():
    """Area element of the Klein chart integrated over the straight triangle."""
    sp = model_space(-1.0)
    t = sp.triangle_data(1.0, 1.0, 1.0)
    assert t.excess < 0
    p, q, r = (sp.to_projective(z) for z in sp.place_triangle(1.0, 1.0, 1.0))
    # parametrise the triangle as p + u (q - p) + v (r - p) with u + v <= 1
    jac = abs((q - p).real * (r - p).imag - (q - p).imag * (r - p).real)

    def density(v, u):
        w = p + u * (q - p) + v * (r - p)
        return jac / (1 - abs(w) ** 2) ** 1.5

    oracle, _ = integrate.dblquad(density, 0, 1, 0, lambda u: 1 - u, epsabs=1e-13, epsrel=1e-12)
    assert t.area == pytest.approx(-t.excess, abs=1e-12)
    assert t.area == pytest.approx(oracle, rel=1e-9)


@pytest.mark.parametrize("kappa", [-1.0, 0.5, 1.0, 4.0])
@given(a=st.floats(0.05, 1.0), b=st.floats(0.05, 1.0), t=st.floats(0.05, 0.95))
def test_area_equals_excess_over_kappa(kappa, a, b, t):
    sp = model_space(kappa)
    scale = 0.6 * sp.diameter / 2 if kappa > 0 else 1.0
    a, b = a * scale, b * scale
    c = abs(a - b) + t * (a + b - abs(a - b))
    assume(min(b + c - a, a + c - b, a + b - c) > 1e-6 * scale)
    d = sp.triangle_data(a, b, c)
    assert d.area == pytest.approx(d.excess / kappa, rel=1e-8, abs=1e-12)


# ---------------------------------------------------------------- charts and geodesics


def test_projective_chart_examples():
    assert model_space(0.0).to_projective(0.3 + 0.2j) == 0.3 + 0.2j
    assert model_space(1.0).to_projective(0j) == 0j
    sp = model_space(1.0)
    z = sp.radius_of_distance(math.pi / 4)
    u = sp.to_projective(complex(z, 0))
    assert abs(u) == pytest.approx(1.0, abs=1e-15)
    assert sp.distance(0j, sp.from_projective(u)) == pytest.approx(math.pi / 4, abs=1e-15)


def test_projective_chart_rejects_hemisphere_boundary():
    with pytest.raises(InvalidChartPoint):
        model_space(1.0).to_projective(1.0 + 0j)


@pytest.mark.parametrize("kappa", KAPPAS)
@given(a=points)
def test_projective_round_trip(kappa, a):
    sp = model_space(kappa)
    z = chart_point(kappa, *a)
    if kappa > 0:
        z = z * 0.9 / math.sqrt(kappa)
    assert abs(sp.from_projective(sp.to_projective(z)) - z) <= 1e-12 * max(1.0, abs(z))


@pytest.mark.parametrize("kappa", [-1.0, 1.0])
@given(a=points, b=points, s=st.floats(0.05, 0.95))
def test_geodesics_are_straight_in_projective_chart(kappa, a, b, s):
    sp = model_space(kappa)
    p, q = chart_point(kappa, *a) * 0.8, chart_point(kappa, *b) * 0.8
    d = sp.distance(p, q)
    assume(d > 1e-3)
    m = sp.geodesic_point(p, q, s * d)
    P, Q, M = (sp.to_projective(x) for x in (p, q, m))
    cross = ((Q - P).conjugate() * (M - P)).imag
    assert abs(cross) <= 1e-12 * max(1.0, abs(Q - P)) ** 2


def test_geodesic_point_examples():
    sp = model_space(1.0)
    p, q = 0.1 + 0.2j, -0.3 + 0.05j
    assert sp.geodesic_point(p, q, 0.0) == p
    assert sp.geodesic_point(p, q, sp.distance(p, q)) == q
    m = sp.geodesic_point(0j, 1 + 0j, math.pi / 4)
    assert abs(m) == pytest.approx(math.tan(math.pi / 8), abs=1e-15)


@pytest.mark.parametrize("kappa", KAPPAS)
@given(a=points, b=points, s=st.floats(0, 1))
def test_geodesic_point_arclength(kappa, a, b, s):
    sp = model_space(kappa)
    p, q = chart_point(kappa, *a) * 0.8, chart_point(kappa, *b) * 0.8
    d = sp.distance(p, q)
    assume(d > 1e-9)
    m = sp.geodesic_point(p, q, s * d)
    assert sp.distance(p, m) == pytest.approx(s * d, abs=1e-11)


def test_geodesic_point_errors():
    sp = model_space(1.0)
    with pytest.raises(ValueError):
        sp.geodesic_point(0j, 0.5 + 0j, 5.0)
    with pytest.raises(ValueError):
        sp.geodesic_point(0.3j, 0.3j, 0.1)


def test_distance_vectorised_matches_scalar():
    sp = model_space(-1.0)
    rng = np.random.default_rng(0)
    p = 0.6 * (rng.uniform(-1, 1, 50) + 1j * rng.uniform(-1, 1, 50)) / math.sqrt(2)
    q = 0.6 * (rng.uniform(-1, 1, 50) + 1j * rng.uniform(-1, 1, 50)) / math.sqrt(2)
    vec = sp.distance(p, q)
    assert np.allclose(vec, [sp.distance(complex(a), complex(b)) for a, b in zip(p, q)], rtol=0, atol=1e-15)
