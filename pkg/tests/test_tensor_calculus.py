import numpy as np
import pytest

from heisenberg_simons.extrinsic import SurfaceGeometry
from heisenberg_simons.jets import Jet, stack
from heisenberg_simons.surface_defs import SurfaceDef, gallery, newton_project, sample_points
from heisenberg_simons.tensor_calculus import (
    cov_deriv_tensor,
    curvature_RS,
    gradient_scalar,
    hess_scalar,
    hess_tensor,
    laplacian_frame,
    laplacian_hat_scalar,
    laplacian_scalar,
    laplacian_tensor,
    nabla_S,
    tangent_torsion_residual,
    tensor_norm_sq,
)

SURFACES = [
    ("catenoid", {"E": 1.0}),
    ("hyperbolic_paraboloid", {}),
    ("helicoid", {}),
    ("horizontal_plane", {}),
]


def _geom(gid, params, count=6, seed=1, **kw):
    e = gallery(gid, 2, params)
    return SurfaceGeometry(e.surface, sample_points(e.surface, e.region, count, seed), **kw)


def _gauge_sphere():
    s = SurfaceDef.from_text("(- (+ (* x1 x1 x1 x1) (* t t) (* 0.3 x1 t) (* x2 x2 y1 y1)) 1)", n=2)
    pts = np.array([[0.8, 0.1, 0.2, -0.3, 0.0], [0.5, -0.4, 0.6, 0.1, 0.0], [0.2, 0.3, 0.1, 0.5, 0.0]])
    proj, ok = newton_project(s, pts)
    assert ok.all()
    return SurfaceGeometry(s, proj)


def test_metric_is_parallel():
    g = _geom("catenoid", {"E": 0.5})
    eye = Jet.constant(g.calc.space, np.broadcast_to(np.eye(3)[..., None], (3, 3, 6)).copy())
    assert np.abs(cov_deriv_tensor(g, eye).value).max() < 1e-13


def test_zero_tensor_and_constant_function():
    g = _geom("helicoid", {})
    z = Jet.constant(g.calc.space, np.zeros((3, 3, 6)))
    assert not np.any(hess_tensor(g, z).value)
    c = Jet.constant(g.calc.space, np.full(6, 2.5))
    assert not np.any(laplacian_scalar(g, c).value)
    assert not np.any(laplacian_hat_scalar(g, c).value)


@pytest.mark.parametrize("gid,params", SURFACES)
def test_tangent_torsion(gid, params):
    assert tangent_torsion_residual(_geom(gid, params)).max() < 1e-12


@pytest.mark.parametrize("gid,params", SURFACES)
def test_nabla_S_is_tangent_and_metric(gid, params):
    g = _geom(gid, params)
    rng = np.random.default_rng(0)
    c = rng.normal(size=(3, 2))
    Y = stack([sum(c[a, 0] * g.frame[a] for a in range(3))[k] for k in range(4)])
    Z = stack([sum(c[a, 1] * g.frame[a] for a in range(3))[k] for k in range(4)])
    X = g.dirs[:3]
    dY, dZ = nabla_S(g, X, Y), nabla_S(g, X, Z)
    assert np.abs(np.einsum("rlz,lz->rz", dY.value, g.nu.value)).max() < 1e-12
    lhs = g.calc.along((Y * Z).sum(0), X).value
    rhs = (np.einsum("rlz,lz->rz", dY.value, Z.value) + np.einsum("lz,rlz->rz", Y.value, dZ.value))
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


@pytest.mark.parametrize("gid,params", SURFACES)
def test_curvature_antisymmetric_and_gauss(gid, params):
    g = _geom(gid, params)
    R = curvature_RS(g).value
    np.testing.assert_allclose(R, -np.swapaxes(R, 0, 1), atol=1e-12)
    h = g.h.value
    np.testing.assert_allclose(R, np.einsum("bcz,adz->abcdz", h, h) - np.einsum("acz,bdz->abcdz", h, h), atol=1e-11)


def test_vertical_hyperplane_is_flat():
    g = _geom("vertical_hyperplane", {})
    assert np.abs(curvature_RS(g).value).max() < 1e-14


def test_gauss_on_non_minimal_surface():
    g = _gauge_sphere()
    assert np.abs(g.H.value).min() > 1e-3
    R = curvature_RS(g).value
    h = g.h.value
    np.testing.assert_allclose(R, np.einsum("bcz,adz->abcdz", h, h) - np.einsum("acz,bdz->abcdz", h, h), atol=1e-10)


@pytest.mark.parametrize("which", ["gallery", "sphere"])
def test_trace_identities(which):
    geoms = [_geom(g, p) for g, p in SURFACES] if which == "gallery" else [_gauge_sphere()]
    for g in geoms:
        Dh = cov_deriv_tensor(g, g.h).value
        dH = gradient_scalar(g, g.H).value
        np.testing.assert_allclose(np.einsum("raaz->rz", Dh)[: g.m], dH, atol=1e-10)
        Hs = hess_tensor(g, g.h, g.m).value
        np.testing.assert_allclose(np.einsum("xyaaz->xyz", Hs), hess_scalar(g, g.H, g.m).value, atol=1e-10)


def _test_function(g):
    c = g.calc.coords
    z2 = sum(c[k] * c[k] for k in range(4))
    return z2 * z2 + c[4] * c[4]


@pytest.mark.parametrize("gid,params", SURFACES + [("vertical_hyperplane", {})])
def test_laplacian_forms_and_chain_rule(gid, params):
    g = _geom(gid, params)
    f = _test_function(g)
    np.testing.assert_allclose(laplacian_frame(g, f).value, laplacian_scalar(g, f).value, rtol=1e-11, atol=1e-10)
    lhs = laplacian_hat_scalar(g, f * f).value
    rhs = 2 * tensor_norm_sq(gradient_scalar(g, f)).value + 2 * f.value * laplacian_hat_scalar(g, f).value
    np.testing.assert_allclose(lhs, rhs, rtol=1e-11)


@pytest.mark.parametrize("gid,params", SURFACES)
def test_laplacian_of_squared_norm(gid, params):
    g = _geom(gid, params)
    lhs = 0.5 * laplacian_scalar(g, g.htilde_sq).value
    grad = tensor_norm_sq(cov_deriv_tensor(g, g.htilde, g.m)).value
    rhs = grad + np.sum(g.htilde.value * laplacian_tensor(g, g.htilde).value, axis=(0, 1))
    np.testing.assert_allclose(lhs, rhs, atol=1e-10 * (1 + np.abs(lhs).max()))


def test_hessian_skew_part_is_torsion():
    """Hess f(E_a, E_b) - Hess f(E_b, E_a) = -2 C(E_a, E_b) Sf."""
    g = _geom("catenoid", {"E": 2.0})
    f = _test_function(g)
    Hs = hess_scalar(g, f, g.m).value
    Sf = g.calc.along(f, g.s_dir[None])[0].value
    np.testing.assert_allclose(Hs - np.swapaxes(Hs, 0, 1), -2 * g.C.value * Sf, atol=1e-10)
