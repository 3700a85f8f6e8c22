import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from heisenberg_simons import dsl
from heisenberg_simons.extrinsic import SurfaceGeometry, horizontal_normal
from heisenberg_simons.surface_defs import (
    GALLERY_IDS,
    DomainError,
    Region,
    SurfaceDef,
    catenoid_height,
    catenoid_neck,
    eval_jet,
    gallery,
    horizontal_gradient,
    is_characteristic,
    sample_points,
)

# -- DSL ----------------------------------------------------------------------

_leaf = st.one_of(st.sampled_from(["x1", "x2", "y1", "y2", "t"]), st.floats(-5, 5, allow_nan=False, allow_infinity=False))


def _nodes(children):
    return st.one_of(
        st.tuples(st.sampled_from(["+", "*"]), st.lists(children, min_size=2, max_size=3)).map(lambda a: dsl.Node(a[0], tuple(a[1]))),
        st.tuples(st.sampled_from(["sin", "cos", "exp"]), children).map(lambda a: dsl.Node(a[0], (a[1],))),
        st.tuples(children, children).map(lambda a: dsl.Node("-", a)),
    )


@settings(max_examples=60, deadline=None)
@given(st.recursive(_leaf, _nodes, max_leaves=8))
def test_dsl_round_trip(expr):
    assert dsl.parse(dsl.to_text(expr)) == expr


@pytest.mark.parametrize("bad", ["(+ x1", "(frobnicate x1)", ")", "(pow x1 y1)", ""])
def test_dsl_rejects_malformed(bad):
    with pytest.raises(dsl.DSLError):
        dsl.parse(bad)


def test_unknown_symbol_for_dimension():
    with pytest.raises(dsl.DSLError):
        SurfaceDef.from_text("(+ x2 t)", n=1)


# -- jets of level-set functions ----------------------------------------------


def test_linear_and_quadratic_jets():
    s = SurfaceDef.from_text("t", n=1)
    j = eval_jet(s, np.array([0.3, -0.2, 0.9]))
    np.testing.assert_allclose(j.partials(1)[..., 0], [0, 0, 1])
    assert not np.any(j.partials(2))
    s = SurfaceDef.from_text("(- t (* x1 y1))", n=1)
    j = eval_jet(s, np.array([1.0, 1.0, 1.0]))
    g, H = j.partials(1)[..., 0], j.partials(2)[..., 0]
    assert g[2] == 1.0 and g[0] == -1.0 and H[0, 1] == -1.0


def test_jet_against_finite_differences():
    rng = np.random.default_rng(0)
    s = SurfaceDef.from_text("(+ (* x1 x1 y2) (* -2.5 y1 t t) (* x2 y1 x1) (sin (* x2 t)))", n=2)
    p = rng.normal(size=5)
    j = eval_jet(s, p, 2)
    f = lambda q: float(s.value(q)[0])  # noqa: E731
    h = 1e-4
    grad = np.array([(f(p + h * e) - f(p - h * e)) / (2 * h) for e in np.eye(5)])
    np.testing.assert_allclose(j.partials(1)[..., 0], grad, rtol=1e-6)
    hess = np.array([[(f(p + h * a + h * b) - f(p + h * a - h * b) - f(p - h * a + h * b) + f(p - h * a - h * b)) / (4 * h * h) for b in np.eye(5)] for a in np.eye(5)])
    np.testing.assert_allclose(j.partials(2)[..., 0], hess, rtol=1e-6, atol=1e-6)


def test_jet_order_limits():
    s = gallery("vertical_hyperplane", 1).surface
    with pytest.raises(ValueError):
        eval_jet(s, np.zeros(3), 5)
    with pytest.raises(ValueError):
        eval_jet(s, np.zeros(5), 2)


# -- gallery -----------------------------------------------------------------


def test_catenoid_profile_matches_quadrature():
    for n, E in ((2, 1.0), (2, 0.5), (3, 2.0)):
        s0 = catenoid_neck(E, n)
        for s in (1.2 * s0, 2.0 * s0):
            want = quad(lambda tau: E * tau / np.sqrt(tau ** (4 * n - 2) - E * E), s0, s, limit=200)[0]
            assert catenoid_height(np.array([s]), E, n)[0] == pytest.approx(want, rel=1e-9)
    with pytest.raises(DomainError):
        catenoid_height(np.array([0.5]), 1.0, 2)


def test_catenoid_axis_point_lies_on_surface():
    s = gallery("catenoid", 2, {"E": 1.0}).surface
    for r in (1.1, 1.7, 3.0):
        p = np.array([r, 0, 0, 0, catenoid_height(np.array([r]), 1.0, 2)[0]])
        assert abs(s.value(p)[0]) < 1e-12


def test_gallery_validation():
    with pytest.raises(ValueError):
        gallery("torus")
    with pytest.raises(ValueError):
        gallery("catenoid", 2, {"E": -1.0})
    assert set(GALLERY_IDS) == {"vertical_hyperplane", "horizontal_plane", "hyperbolic_paraboloid", "catenoid", "helicoid"}


def test_characteristic_points():
    hp = gallery("horizontal_plane", 2).surface
    assert is_characteristic(hp, np.zeros(5))
    assert not is_characteristic(gallery("vertical_hyperplane", 2).surface, np.array([0.0, 3, -1, 2, 5]))
    par = gallery("hyperbolic_paraboloid", 2).surface
    assert is_characteristic(par, np.array([0.0, 0.0, 1.3, -0.4, 0.0]))
    assert not is_characteristic(par, np.array([1.0, 0, 0, 0, 0]))


# -- sampling ----------------------------------------------------------------


def test_sampling_projects_and_is_deterministic():
    e = gallery("vertical_hyperplane", 2)
    a = sample_points(e.surface, e.region, 25, seed=11)
    b = sample_points(e.surface, e.region, 25, seed=11)
    assert np.array_equal(a, b)
    assert np.all(a[:, 0] == 0.0)
    c = sample_points(e.surface, e.region, 25, seed=12)
    assert not np.array_equal(a, c)


def test_catenoid_samples_on_profile():
    e = gallery("catenoid", 2, {"E": 1.0})
    pts = sample_points(e.surface, e.region, 20, seed=3)
    r = np.linalg.norm(pts[:, :4], axis=1)
    np.testing.assert_allclose(pts[:, -1], catenoid_height(r, 1.0, 2), atol=1e-12)


def test_samples_avoid_characteristic_set():
    e = gallery("hyperbolic_paraboloid", 2)
    pts = sample_points(e.surface, e.region, 30, seed=5)
    _, gh, _ = horizontal_gradient(e.surface, pts)
    assert np.all(np.linalg.norm(gh, axis=1) > 1e-6)


def test_user_region_annulus():
    s = SurfaceDef.from_text("(- x1 (* 0.25 t))", n=1)
    pts = sample_points(s, Region("annulus", r_in=0.5, r_out=2.0), 10, seed=0)
    assert np.all(np.abs(s.value(pts)) < 1e-10)


# -- closed-form values ------------------------------------------------------


def test_helicoid_p3_at_unit_radius():
    """At s = 1 (x1 = cos t, y1 = sin t) with the other coordinates zero the value is 1/4."""
    e = gallery("helicoid", 2)
    t = 0.7
    p = np.array([np.cos(t), 0.0, np.sin(t), 0.0, t])
    assert abs(e.surface.value(p)[0]) < 1e-14
    g = SurfaceGeometry(e.surface, p[None])
    assert g.p3_value()[0] == pytest.approx(0.25, abs=1e-12)


def test_horizontal_plane_alpha():
    """u = t: Tu = 1 and |grad_H u| = |z|, so |alpha| = 1/|z|."""
    s = gallery("horizontal_plane", 1).surface
    p = np.array([0.6, 0.8, 0.0])
    nu, nh, alpha, _ = horizontal_normal(s, p)
    assert abs(alpha) == pytest.approx(1.0, rel=1e-12)
    p = np.array([1.5, -2.0, 0.0])
    assert abs(horizontal_normal(s, p)[2]) == pytest.approx(1 / 2.5, rel=1e-12)


@pytest.mark.parametrize("gid,params", [("vertical_hyperplane", {}), ("horizontal_plane", {}), ("hyperbolic_paraboloid", {}), ("catenoid", {"E": 1.0}), ("helicoid", {})])
def test_known_values(gid, params):
    e = gallery(gid, 2, params)
    pts = sample_points(e.surface, e.region, 12, seed=4)
    measured = SurfaceGeometry(e.surface, pts).values()
    for kv in e.known:
        want = kv.formula(pts)
        np.testing.assert_allclose(measured[kv.quantity], want, rtol=1e-8, atol=1e-8, err_msg=kv.quantity)
