import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tgfield.errors import DerivativeUnavailableError, DomainError, SingularParallelError, ValidationError
from tgfield.frame_field import UnitField
from tgfield.warped_metric import (Point2, Tangent2, WarpedMetric, christoffel,
                                   covariant_derivative, gauss_curvature,
                                   geodesic_integrate_2d)

from conftest import generic_christoffel


def test_christoffel_sphere_equator():
    g_uvv, g_vuv, g_vvu = christoffel(WarpedMetric.sphere(), math.pi / 2)
    assert abs(g_uvv) < 1e-15 and abs(g_vuv) < 1e-15 and g_vuv == g_vvu


def test_christoffel_flat():
    assert christoffel(WarpedMetric.flat(), 0.7) == pytest.approx((0.0, 0.0, 0.0))


def test_christoffel_sphere_quarter():
    g_uvv, g_vuv, _ = christoffel(WarpedMetric.sphere(), math.pi / 4)
    assert g_uvv == pytest.approx(-0.5, abs=1e-15)
    assert g_vuv == pytest.approx(1.0, abs=1e-15)


@given(st.floats(0.2, 2.9))
def test_christoffel_matches_generic_formula(u):
    m = WarpedMetric(lambda t: np.sin(t) + 0.3 * np.sin(t) ** 2)
    gam = generic_christoffel(lambda x: np.diag([1.0, float(m.warp(x[0])) ** 2]), [u, 0.4])
    g_uvv, g_vuv, g_vvu = christoffel(m, u)
    assert g_uvv == pytest.approx(gam[0, 1, 1], abs=1e-7)
    assert g_vuv == pytest.approx(gam[1, 0, 1], abs=1e-7)
    assert g_vvu == pytest.approx(gam[1, 1, 0], abs=1e-7)
    assert abs(gam[0, 0, 0]) + abs(gam[0, 0, 1]) + abs(gam[1, 0, 0]) + abs(gam[1, 1, 1]) < 1e-7


def test_christoffel_singular_parallel():
    with pytest.raises(SingularParallelError):
        christoffel(WarpedMetric(lambda u: u), 0.0)


@given(st.floats(0.05, 3.09))
def test_sphere_curvature_is_one(u):
    assert gauss_curvature(WarpedMetric.sphere(), u) == pytest.approx(1.0, abs=1e-12)


def test_flat_curvature_zero():
    assert gauss_curvature(WarpedMetric.flat(), 1.3) == 0.0


def test_profile_curvature_matches_rhs(profiles):
    from tgfield.alpha_profile import FieldParams, solve_alpha
    prof = solve_alpha(FieldParams(-0.5, 0.0), 0.0, 1.0, (-0.5, 0.5))
    u = np.linspace(-0.45, 0.45, 41)
    assert np.max(np.abs(gauss_curvature(prof.metric(), u) - prof.dalpha(u))) <= 1e-8


def test_fd_fallback_matches_analytic():
    m_fd = WarpedMetric(np.sin, domain=(0.0, math.pi))
    u = np.linspace(0.3, 2.8, 9)
    assert np.allclose(m_fd.dwarp(u), np.cos(u), atol=1e-9)
    assert np.allclose(m_fd.d2warp(u), -np.sin(u), atol=1e-5)
    assert np.allclose(gauss_curvature(m_fd, u), 1.0, atol=1e-5)


def test_fd_stencil_leaving_domain():
    m = WarpedMetric(np.sin, domain=(0.0, math.pi))
    with pytest.raises(DerivativeUnavailableError):
        m.dwarp(1e-7)


def test_domain_check():
    with pytest.raises(DomainError):
        WarpedMetric.sphere().check(4.0)


def test_parallel_field_on_flat():
    d = covariant_derivative(WarpedMetric.flat(), UnitField.constant(0.4),
                             Tangent2(0.3, -1.2), Point2(0.1, 2.0))
    assert d.a_u == 0.0 and d.a_v == 0.0


def test_sphere_field_along_meridian_is_parallel():
    d = covariant_derivative(WarpedMetric.sphere(), UnitField.linear(-1.0, 0.7),
                             Tangent2(1.0, 0.0), Point2(1.1, 0.4))
    assert abs(d.a_u) < 1e-15 and abs(d.a_v) < 1e-15


@given(st.floats(0.2, 2.9), st.floats(-3.0, 3.0), st.floats(-3.0, 3.0))
def test_sphere_field_rate_along_e1(u, v, w0):
    # e1 is the unit vector along d/dv; the rate of turning there is tan(u/2)
    m = WarpedMetric.sphere()
    d = covariant_derivative(m, UnitField.linear(-1.0, w0),
                             Tangent2(0.0, 1.0 / math.sin(u)), Point2(u, v))
    assert float(m.norm(Point2(u, v), d)) == pytest.approx(math.tan(u / 2), rel=1e-12)


@given(st.floats(0.3, 2.8), st.floats(-3.0, 3.0), st.floats(-2.0, 2.0),
       st.floats(-1.0, 1.0), st.floats(-1.0, 1.0))
@settings(max_examples=50)
def test_covariant_derivative_generic_formula(u, v, a, x_u, x_v):
    m = WarpedMetric(lambda t: np.sin(t) + 0.3 * np.sin(t) ** 2)
    field = UnitField.linear(a, 0.2).plus_sin_v(0.3)
    p = Point2(u, v)
    d = covariant_derivative(m, field, Tangent2(x_u, x_v), p)
    gam = generic_christoffel(lambda x: np.diag([1.0, float(m.warp(x[0])) ** 2]), [u, v])

    def comps(x):
        c = field.components(m, Point2(x[0], x[1]))
        return np.array([float(c.a_u), float(c.a_v)])

    h = 1e-6
    X = np.array([x_u, x_v])
    dxi = (comps(np.array([u, v]) + h * X) - comps(np.array([u, v]) - h * X)) / (2 * h)
    ref = dxi + np.einsum("kij,i,j->k", gam, X, comps(np.array([u, v])))
    assert np.allclose([d.a_u, d.a_v], ref, atol=1e-6)
    # metric compatibility: the derivative of a unit field is orthogonal to it
    assert abs(float(m.inner(p, d, field.components(m, p)))) < 1e-10


def test_flat_geodesic_straight_line():
    path = geodesic_integrate_2d(WarpedMetric.flat(), Point2(0.0, 0.0), Tangent2(1.0, 0.0), 1.0)
    assert path.end.u == pytest.approx(1.0, abs=1e-12)
    assert path.end.v == pytest.approx(0.0, abs=1e-12)


def test_sphere_meridian():
    path = geodesic_integrate_2d(WarpedMetric.sphere(), Point2(math.pi / 2, 0.0),
                                 Tangent2(1.0, 0.0), 1.0)
    assert path.end.u == pytest.approx(math.pi / 2 + 1.0, abs=1e-12)
    assert np.all(path.v == 0.0)


def test_sphere_equator_against_halved_step():
    args = (WarpedMetric.sphere(), Point2(math.pi / 2, 0.0), Tangent2(0.0, 1.0), math.pi)
    coarse = geodesic_integrate_2d(*args, step=1e-3)
    fine = geodesic_integrate_2d(*args, step=5e-4)
    assert coarse.end.u == pytest.approx(math.pi / 2, abs=1e-10)
    assert coarse.end.v == pytest.approx(math.pi, abs=1e-10)
    assert abs(coarse.end.v - fine.end.v) < 1e-10


@given(st.floats(1.2, 1.9), st.floats(0.0, 2 * math.pi))
@settings(max_examples=20, deadline=None)
def test_sphere_geodesics_are_great_circles(u0, phi):
    # starts at least 0.2 away from the poles, where the chart degenerates
    m = WarpedMetric.sphere()
    x = Tangent2(math.cos(phi), math.sin(phi) / math.sin(u0))
    path = geodesic_integrate_2d(m, Point2(u0, 0.3), x, 1.0)
    emb = lambda u, v: np.stack([np.sin(u) * np.cos(v), np.sin(u) * np.sin(v), np.cos(u)], -1)
    pts = emb(path.u, path.v)
    # exact plane: spanned by the start point and the initial velocity
    h = 1e-7
    vel = (emb(u0 + h * x.a_u, 0.3 + h * x.a_v) - emb(u0 - h * x.a_u, 0.3 - h * x.a_v)) / (2 * h)
    n = np.cross(pts[0], vel)
    n /= np.linalg.norm(n)
    assert np.max(np.abs(pts @ n)) < 1e-8


def test_geodesic_rejects_non_unit():
    with pytest.raises(ValidationError):
        geodesic_integrate_2d(WarpedMetric.flat(), Point2(0.0, 0.0), Tangent2(2.0, 0.0), 1.0)


def test_geodesic_truncates_at_domain_edge():
    path = geodesic_integrate_2d(WarpedMetric.sphere(), Point2(3.0, 0.0), Tangent2(1.0, 0.0), 1.0)
    assert path.truncated and path.u[-1] < math.pi


def test_point_tangent_arithmetic():
    t = Tangent2(1.0, 2.0) + Tangent2(0.5, -1.0) * 2.0
    assert (t.a_u, t.a_v) == (2.0, 0.0)
