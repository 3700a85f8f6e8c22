"""Covariant calculus of the tangent connection on horizontal tensor fields.

Tensors are jets of frame components with shape ``(m, ..., m, batch)`` where
``m = 2n - 1`` indexes the horizontal tangent frame of a
:class:`~heisenberg_simons.extrinsic.SurfaceGeometry`.  Derivative directions
are the frame fields followed by ``S = T - alpha nu`` (index ``m``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .extrinsic import SurfaceGeometry
from .jets import Jet, einsum, stack

_LETTERS = "abcdefgh"


@dataclass(frozen=True)
class TensorField:
    """Frame components of a horizontal tangent tensor field."""

    components: Jet
    name: str = ""
    symmetric: bool = False

    @property
    def rank(self) -> int:
        return len(self.components.shape) - 1


def _comps(T) -> Jet:
    return T.components if isinstance(T, TensorField) else T


def directional(geom: SurfaceGeometry, f: Jet, rows: int | None = None) -> Jet:
    """Derivatives of f along the frame (and S when ``rows`` includes it)."""
    rows = geom.m + 1 if rows is None else rows
    return geom.calc.along(f, geom.dirs[:rows])


def cov_deriv_tensor(geom: SurfaceGeometry, T, rows: int | None = None) -> Jet:
    """(grad_X T)(E_a, ...) for X running over the first ``rows`` directions."""
    T = _comps(T)
    rows = geom.m + 1 if rows is None else rows
    rank = len(T.shape) - 1
    gamma = geom.Gamma[:rows]
    out = directional(geom, T, rows)
    idx = _LETTERS[:rank]
    for s in range(rank):
        sub = idx[:s] + "k" + idx[s + 1 :]
        out = out - einsum(f"r{idx[s]}kz,{sub}z->r{idx}z", gamma, T)
    return out


def hess_tensor(geom: SurfaceGeometry, T, rows: int | None = None) -> Jet:
    """Hess T(X, Y, ...) = grad_X grad_Y T - grad_{grad_X Y} T, Y in the frame."""
    first = cov_deriv_tensor(geom, T)[: geom.m]
    return cov_deriv_tensor(geom, first, rows)


def laplacian_tensor(geom: SurfaceGeometry, T) -> Jet:
    H = hess_tensor(geom, T, rows=geom.m)
    return sum(H[i, i] for i in range(geom.m))


def gradient_scalar(geom: SurfaceGeometry, f: Jet) -> Jet:
    """Frame components of the horizontal tangential gradient."""
    return directional(geom, f, geom.m)


def hess_scalar(geom: SurfaceGeometry, f: Jet, rows: int | None = None) -> Jet:
    return cov_deriv_tensor(geom, gradient_scalar(geom, f), rows)


def laplacian_frame(geom: SurfaceGeometry, f: Jet) -> Jet:
    """Frame trace of the horizontal tangential Hessian."""
    H = hess_scalar(geom, f, geom.m)
    return sum(H[i, i] for i in range(geom.m))


def laplacian_scalar(geom: SurfaceGeometry, f: Jet) -> Jet:
    """Frame-free form: sum (delta_ij - nu_i nu_j) Z_i Z_j f - H <grad_H f, nu>."""
    n2 = 2 * geom.n
    calc = geom.calc
    zf = calc.frame_derivatives(f)[:n2]
    zzf = calc.frame_derivatives(zf)[:n2]  # zzf[i, j] = Z_i Z_j f
    nu = geom.nu
    trace = sum(zzf[i, i] for i in range(n2))
    normal = einsum("iz,ijz->jz", nu, zzf)
    normal = (normal * nu).sum(0)
    return trace - normal - geom.div_nu * (zf * nu).sum(0)


def laplacian_hat_scalar(geom: SurfaceGeometry, f: Jet, frame_based: bool = False) -> Jet:
    """Modified Laplacian: Laplacian plus 2 alpha <grad_H f, J nu>."""
    lap = laplacian_frame(geom, f) if frame_based else laplacian_scalar(geom, f)
    jf = geom.calc.along(f, geom.jnu_dir[None])[0]
    return lap + 2.0 * geom.alpha * jf


def nabla_S(geom: SurfaceGeometry, X, Y: Jet) -> Jet:
    """Tangential projection of the flat derivative of the horizontal field Y along X.

    ``X`` has shape (r, 2n+1, batch), ``Y`` shape (2n, batch).
    """
    d = geom.calc.connection(X, Y)
    normal = einsum("rlz,lz->rz", d, geom.nu)
    return d - einsum("rz,lz->rlz", normal, geom.nu)


def frame_vectors(geom: SurfaceGeometry, coeffs) -> Jet:
    """Horizontal vectors sum_a coeffs[a] E_a, coefficients of shape (m, ..., batch)."""
    return einsum("a...z,alz->l...z", coeffs, geom.frame)


def bracket_decomposition(geom: SurfaceGeometry, a: int, b: int) -> tuple[Jet, Jet, Jet]:
    """Lie bracket [E_a, E_b] split as frame part, S part, and normal leakage."""
    w = geom.calc.lie_bracket(geom.dirs[a], geom.dirs[b])
    wh = stack([w[k] for k in range(2 * geom.n)])
    wt = w[2 * geom.n]
    frame_part = einsum("lz,klz->kz", wh, geom.frame)
    leak = (wh * geom.nu).sum(0) + geom.alpha * wt
    return frame_part, wt, leak


def curvature_RS(geom: SurfaceGeometry) -> Jet:
    """R(E_a, E_b, E_c, E_d) = <R(E_a, E_b) E_c, E_d> for the tangent connection."""
    m = geom.m
    gamma = geom.Gamma
    # grad_{E_b} E_c as horizontal vectors
    V = einsum("bckz,klz->bclz", gamma[:m], geom.frame)
    dV = geom.calc.along(V, geom.dirs[:m])  # (a, b, c, l)
    second = einsum("abclz,dlz->abcdz", dV, geom.frame)
    rows = []
    for a in range(m):
        cols = []
        for b in range(m):
            fp, wt, _ = bracket_decomposition(geom, a, b)
            br = einsum("kz,kcdz->cdz", fp, gamma[:m]) + wt * gamma[m]
            cols.append(second[a, b] - second[b, a] - br)
        rows.append(stack(cols))
    return stack(rows)


def tangent_torsion_residual(geom: SurfaceGeometry) -> np.ndarray:
    """|grad_X Y - grad_Y X - [X, Y] - 2<JX, Y> S| over frame pairs, per point."""
    m, n = geom.m, geom.n
    worst = np.zeros(len(geom.points))
    for a in range(m):
        for b in range(m):
            w = geom.calc.lie_bracket(geom.dirs[a], geom.dirs[b])
            ga = geom.Gamma[a, b] - geom.Gamma[b, a]  # frame components of the difference
            hor = frame_vectors(geom, ga) - stack([w[k] for k in range(2 * n)])
            hor = hor + 2.0 * geom.C[a, b] * geom.alpha * geom.nu
            tcomp = -w[2 * n] - 2.0 * geom.C[a, b]
            res = np.sqrt(np.sum(hor.value**2, axis=0) + tcomp.value**2)
            worst = np.maximum(worst, res)
    return worst


def tensor_norm_sq(T: Jet) -> Jet:
    axes = tuple(range(len(T.shape) - 1))
    return (T * T).sum(axes)
