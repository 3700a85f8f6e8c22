import math

import numpy as np
import pytest
from scipy.integrate import quad

from heisenberg_simons import quadrature as qd
from heisenberg_simons.extrinsic import SurfaceGeometry
from heisenberg_simons.heis_core import frame_at, koranyi_gauge
from heisenberg_simons.surface_defs import gallery


def _charts():
    return [
        (gallery("vertical_hyperplane", 2).surface, qd.VerticalChart(2, (-1.0,) * 4, (1.0,) * 4)),
        (gallery("hyperbolic_paraboloid", 2).surface, qd.ParaboloidChart(2, (0.5, 0.5, -1, -1), (1.5, 1.5, 1, 1))),
        (gallery("catenoid", 2, {"E": 1.0}).surface, qd.CatenoidChart(2, (0.0,) * 4, (1.0,) * 4, E=1.0).around(1.5, 0.25, 0.25)),
        (gallery("helicoid", 2).surface, qd.HelicoidChart(2, (0.5, -1, -0.5, -0.5), (1.5, 1, 0.5, 0.5))),
    ]


def _interior(chart, count, seed):
    rng = np.random.default_rng(seed)
    lo, hi = np.array(chart.lo), np.array(chart.hi)
    return lo + (hi - lo) * rng.uniform(0.1, 0.9, size=(count, len(lo)))


@pytest.mark.parametrize("idx", range(4))
def test_chart_maps_onto_surface_with_consistent_jacobian(idx):
    s, chart = _charts()[idx]
    params = _interior(chart, 6, idx)
    assert np.abs(s.value(chart.map(params))).max() < 1e-12
    h = 1e-6
    jac = chart.jacobian(params)
    for k in range(params.shape[1]):
        e = np.zeros(params.shape[1])
        e[k] = h
        fd = (chart.map(params + e) - chart.map(params - e)) / (2 * h)
        np.testing.assert_allclose(jac[:, :, k], fd, atol=1e-8)


@pytest.mark.parametrize("idx", range(4))
def test_density_equals_horizontal_normal_times_area(idx):
    """|N^H| dA: the Riemannian area element times the horizontal part of the unit normal."""
    s, chart = _charts()[idx]
    params = _interior(chart, 5, idx + 10)
    pts, jac = chart.map(params), chart.jacobian(params)
    geom = SurfaceGeometry(s, pts, order=2)
    for i in range(len(pts)):
        F = frame_at(pts[i])
        frame_jac = np.linalg.solve(F.T, jac[i])  # left-invariant coordinates of the tangent vectors
        area = math.sqrt(np.linalg.det(frame_jac.T @ frame_jac))
        nh = geom.nH_sq.value[i] ** 0.5
        full = (geom.nH_sq.value[i] + geom.calc.frame_derivatives(s.jet_on(geom.calc)).value[-1, i] ** 2) ** 0.5
        assert chart.density(params[i : i + 1])[0] == pytest.approx(area * nh / full, rel=1e-10)


def test_unit_patch_and_zero_integrand():
    chart = qd.VerticalChart(2, (0.0,) * 4, (1.0,) * 4)
    assert qd.integrate_sigmaH(chart, 1.0).value == pytest.approx(1.0, abs=1e-14)
    assert qd.integrate_sigmaH(chart, 0.0).value == 0.0


def test_gauss_rule_exact_on_polynomials_and_error_estimate():
    f = lambda x: x[:, 0] ** 5 * x[:, 1] ** 3 + x[:, 1] ** 2  # noqa: E731
    r = qd.integrate_box(f, (0, 0), (1, 2), cells=2, order=4)
    assert r.value == pytest.approx(2**4 / 24 + 8 / 3, rel=1e-14)
    g = lambda x: np.exp(np.sin(3 * x[:, 0]))  # noqa: E731
    want = quad(lambda t: np.exp(np.sin(3 * t)), 0, 2)[0]
    coarse = qd.integrate_box(g, (0,), (2,), cells=2, order=3)
    fine = qd.integrate_box(g, (0,), (2,), cells=4, order=3)
    assert abs(fine.value - want) <= coarse.error
    with pytest.raises(ValueError):
        qd.integrate_box(g, (0,), (1,), cells=3)


class _FoldedChart(qd.PatchChart):
    """(a, b) -> (a, a, 0): both tangent columns coincide."""

    def map(self, params):
        params = np.atleast_2d(params)
        return np.stack([params[:, 0], params[:, 0], np.zeros(len(params))], axis=1)

    def jacobian(self, params):
        jac = np.zeros((len(np.atleast_2d(params)), 3, 2))
        jac[:, 0, 0] = jac[:, 1, 0] = 1.0
        return jac


def test_degenerate_chart_rejected():
    with pytest.raises(qd.ChartError):
        _FoldedChart(1, (0.0, 0.0), (1.0, 1.0)).density(np.array([[0.5, 0.5]]))


def test_gauge_gradient_against_finite_differences():
    rng = np.random.default_rng(2)
    pts = rng.normal(size=(10, 5))
    grad = qd.gauge_horizontal_gradient(pts)
    h = 1e-6
    for i, p in enumerate(pts):
        F = frame_at(p)
        fd = [(koranyi_gauge(p + h * F[k]) - koranyi_gauge(p - h * F[k])) / (2 * h) for k in range(4)]
        np.testing.assert_allclose(grad[i], fd, atol=1e-7)
    assert np.all(np.linalg.norm(grad, axis=1) <= 1 + 1e-12)


@pytest.mark.parametrize("R", [1.0, 2.0, 4.0, 8.0])
def test_cutoff_contract(R):
    rng = np.random.default_rng(int(R))
    center = rng.normal(size=5)
    fam = qd.CutoffFamily(center)
    pts = center + rng.uniform(-2.5, 2.5, size=(4000, 5)) * np.array([R] * 4 + [R * R])
    val = fam.value(pts, R)
    rho = koranyi_gauge(fam._relative(pts))
    assert np.all(val[rho <= R] == 1) and np.all(val[rho >= 2 * R] == 0)
    assert np.max(np.linalg.norm(fam.horizontal_gradient(pts, R), axis=1)) * R <= fam.bound + 1e-12
    # gradient against differences of the cutoff itself
    p = pts[np.argmin(np.abs(rho - 1.5 * R))]
    F = frame_at(p)
    h = 1e-6 * R
    fd = [(fam.value(p + h * F[k], R)[0] - fam.value(p - h * F[k], R)[0]) / (2 * h) for k in range(4)]
    np.testing.assert_allclose(fam.horizontal_gradient(p, R)[0], fd, atol=1e-6 / R)


def test_support_check():
    chart = qd.VerticalChart(2, (-2.0,) * 3 + (-4.0,), (2.0,) * 3 + (4.0,))
    qd.check_support(chart, qd.CutoffFamily(np.zeros(5)), 1.0)
    with pytest.raises(qd.SupportError):
        qd.check_support(chart, qd.CutoffFamily(np.zeros(5)), 2.0)


def test_stability_sides():
    s = gallery("vertical_hyperplane", 2).surface
    chart = qd.VerticalChart(2, (-2.0,) * 3 + (-4.0,), (2.0,) * 3 + (4.0,))
    res = qd.stability_ratio(s, chart, qd.cutoff_bump(qd.CutoffFamily(np.zeros(5)), 1.0))
    assert res.lhs == 0.0 and res.rhs > 0 and res.rhs_error < 0.2 * res.rhs
    zero = qd.stability_ratio(s, chart, None)
    assert (zero.lhs, zero.rhs) == (0.0, 0.0)


@pytest.mark.parametrize("n,expected", [(1, 3.0), (2, 5.0)])
def test_vertical_volume_growth(n, expected):
    s = gallery("vertical_hyperplane", n).surface
    vg = qd.volume_growth_fit(s, np.zeros(2 * n + 1), (1.0, 2.0, 4.0, 8.0, 16.0))
    assert vg.exponent == pytest.approx(expected, abs=0.2)
    doubled = qd.volume_growth_fit(s, np.zeros(2 * n + 1), (2.0, 4.0, 8.0, 16.0, 32.0))
    assert doubled.exponent == pytest.approx(vg.exponent, abs=1e-6)
    with pytest.raises(ValueError):
        qd.volume_growth_fit(s, np.zeros(2 * n + 1), (1.0, 2.0))


def test_vertical_ball_measure_against_indicator_integral():
    """Closed t-extent kernel against a brute indicator integral over the chart."""
    s = gallery("vertical_hyperplane", 1).surface
    chart = qd.VerticalChart(1, (-1.0, -1.0), (1.0, 1.0))

    def inside(pts):
        return (koranyi_gauge(pts) < 1.0).astype(float)

    brute = qd.integrate_sigmaH(chart, inside, cells=64, order=4).value
    closed = qd.vertical_ball_measure(1, np.zeros(3), 1.0).value
    one_d = quad(lambda w: 2 * math.sqrt(1 - w**4), -1, 1)[0]
    assert closed == pytest.approx(one_d, rel=1e-4)
    assert brute == pytest.approx(closed, rel=5e-3)
    assert qd.ball_measure(s, np.zeros(3), 1.0).value == closed


def test_beta_window_examples():
    lo, hi = qd.beta_window(1.0, 2)
    assert lo == pytest.approx(2 / 3) and hi == pytest.approx(1 + math.sqrt(1 / 3))
    qd.validate_exponents(1.0, 1.0)
    with pytest.raises(ValueError):
        qd.validate_exponents(1.6, 0.7)
    with pytest.raises(ValueError):
        qd.validate_exponents(1.0, 1.5)
    assert math.isinf(qd.estimate_constant(1.6, 0.7))
    assert math.isfinite(qd.estimate_constant(1.2, 1.0))


def test_curvature_estimate_vertical_zero():
    s = gallery("vertical_hyperplane", 2).surface
    table = qd.curvature_estimate_experiment(s, np.zeros(5), 1.0, 1.0, (1.0, 2.0))
    assert all(r.lhs == 0.0 and r.rhs > 0 for r in table.rows)
