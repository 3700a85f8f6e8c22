import numpy as np
import pytest
import sympy as sp

from heisenberg_simons import jets
from heisenberg_simons.jets import Jet, einsum, jet_space, stack


def _vars(points, order=4):
    points = np.atleast_2d(points)
    return Jet.variables(jet_space(points.shape[1], order), points)


def test_polynomial_partials_match_sympy():
    x, y, z = sp.symbols("x y z")
    expr = x**3 * y - 2 * x * y * z**2 + z**4
    p = np.array([[0.3, -1.2, 0.7]])
    v = _vars(p)
    f = v[0] ** 3 * v[1] - 2.0 * v[0] * v[1] * v[2] ** 2 + v[2] ** 4
    subs = dict(zip((x, y, z), p[0]))
    syms = (x, y, z)
    for k in range(5):
        got = f.partials(k)[..., 0]
        for idx in np.ndindex(*(3,) * k):
            want = float(sp.diff(expr, *[syms[i] for i in idx]).subs(subs)) if k else float(expr.subs(subs))
            assert got[idx] == pytest.approx(want, abs=1e-12)


@pytest.mark.parametrize("name", ["sin", "cos", "exp", "log", "sqrt", "arctan"])
def test_elementary_functions_against_sympy(name):
    x, y = sp.symbols("x y")
    sym = {"sin": sp.sin, "cos": sp.cos, "exp": sp.exp, "log": sp.log, "sqrt": sp.sqrt, "arctan": sp.atan}[name]
    inner = x**2 + 0.5 * y + 1.3
    p = np.array([[0.4, 0.9]])
    v = _vars(p)
    f = getattr(v[0] ** 2 + 0.5 * v[1] + 1.3, name)()
    expr = sym(inner)
    subs = {x: p[0, 0], y: p[0, 1]}
    for k in range(5):
        got = f.partials(k)[..., 0]
        for idx in np.ndindex(*(2,) * k):
            want = float(sp.diff(expr, *[(x, y)[i] for i in idx]).subs(subs)) if k else float(expr.subs(subs))
            assert got[idx] == pytest.approx(want, rel=1e-11, abs=1e-11)


def test_partials_are_symmetric():
    rng = np.random.default_rng(0)
    p = rng.normal(size=(3, 3))
    v = _vars(p)
    f = (v[0] * v[1]).sin() * (v[2] + 2.0).power(1.5) + v[0].exp() * v[2]
    for k in (2, 3, 4):
        t = f.partials(k)
        for perm in [(1, 0) + tuple(range(2, k)), tuple(range(k))[::-1]]:
            np.testing.assert_allclose(t, np.transpose(t, perm + (k,)), atol=1e-12)


def test_division_and_arctan2_against_finite_differences():
    rng = np.random.default_rng(1)
    p = rng.uniform(0.5, 1.5, size=(4, 2))
    v = _vars(p, 2)
    f = jets.arctan2(v[1], v[0]) + v[0] / (v[1] + 2.0)

    def g(q):
        return np.arctan2(q[:, 1], q[:, 0]) + q[:, 0] / (q[:, 1] + 2.0)

    h = 1e-6
    for i in range(2):
        e = np.zeros(2)
        e[i] = h
        fd = (g(p + e) - g(p - e)) / (2 * h)
        np.testing.assert_allclose(f.deriv(i).value, fd, rtol=1e-7)


def test_deriv_lowers_order_and_order_zero_rejects():
    v = _vars([[1.0, 2.0]], 2)
    d = v[0].deriv(0)
    assert d.order == 1
    with pytest.raises(ValueError):
        d.deriv(0).deriv(0)


def test_einsum_and_stack_keep_batch_last():
    rng = np.random.default_rng(2)
    p = rng.normal(size=(5, 2))
    v = _vars(p, 3)
    A = stack([stack([v[0], v[1]]), stack([v[1] * v[1], 1.0 + v[0] * 0.0])])
    b = stack([v[0], v[1]])
    out = einsum("ijz,jz->iz", A, b)
    want0 = v[0] * v[0] + v[1] * v[1]
    np.testing.assert_allclose(out[0].c, want0.c, atol=1e-14)
    assert out.shape == (2, 5)


def test_power_matches_repeated_product():
    v = _vars([[0.7, -0.3]], 4)
    f = v[0] + 2.0 * v[1] + 3.0
    np.testing.assert_allclose((f**3).c, (f * f * f).c, atol=1e-12)
    np.testing.assert_allclose(f.power(-1.0).c, f.reciprocal().c, atol=1e-12)
