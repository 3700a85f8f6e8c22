"""Extrinsic invariants of a non-characteristic level set, as jets around sample points.

:class:`SurfaceGeometry` builds, for a batch of points, the horizontal normal,
the fundamental function alpha, an orthonormal frame of the horizontal tangent
space, the connection coefficients of the tangent connection along the frame
and along the transverse field ``T - alpha nu``, and the shape tensors.  Every
field is extended off the surface by the level-set formulas, and every
derivative used downstream is taken along directions tangent to all level
sets, so the results are intrinsic on the surface.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .heis_core import LocalCalculus, apply_J_jet
from .jets import Jet, einsum, stack
from .surface_defs import SurfaceDef, horizontal_gradient


class CharacteristicPointError(ValueError):
    pass


def orthogonal_candidates(dim: int, seed: int | None) -> np.ndarray:
    """Candidate directions for Gram-Schmidt; identity or a seeded rotation."""
    if seed is None:
        return np.eye(dim)
    q, r = np.linalg.qr(np.random.default_rng(seed).normal(size=(dim, dim)))
    return q * np.sign(np.diag(r))


def _J_on_axis(v: Jet, axis: int) -> Jet:
    return apply_J_jet(v.moveaxis(axis, 0)).moveaxis(0, axis)


def pivot_order(nu: np.ndarray, fixed: list[np.ndarray], candidates: np.ndarray, count: int) -> np.ndarray:
    """Greedy Gram-Schmidt pivots (largest projected norm) at each batch point.

    ``nu`` and ``fixed`` entries have shape (2n, B); returns indices (count, B).
    """
    basis = [nu, *fixed]
    batch = nu.shape[1]
    used = np.zeros((len(candidates), batch), dtype=bool)
    picks = []
    for _ in range(count):
        resid = np.repeat(candidates[:, :, None], batch, axis=2)
        for b in basis:
            resid = resid - np.einsum("ckz,kz->cz", resid, b)[:, None, :] * b[None]
        norms = np.linalg.norm(resid, axis=1)
        norms[used] = -1.0
        k = np.argmax(norms, axis=0)
        if np.any(norms[k, np.arange(batch)] < 1e-6):
            raise ArithmeticError("Gram-Schmidt degeneracy off the characteristic set")
        used[k, np.arange(batch)] = True
        v = resid[k, :, np.arange(batch)].T
        basis.append(v / np.linalg.norm(v, axis=0))
        picks.append(k)
    return np.array(picks)


class SurfaceGeometry:
    """Jets of every extrinsic field around a batch of surface points."""

    def __init__(
        self,
        surface: SurfaceDef,
        points,
        order: int = 4,
        adapt_to_p1: bool = True,
        pivot_seed: int | None = None,
        slot_mix: np.ndarray | None = None,
        char_tol: float = 1e-8,
    ):
        if order < 2:
            raise ValueError("the shape operator needs jets of order >= 2")
        points = np.atleast_2d(np.asarray(points, dtype=float))
        n = surface.n
        self.surface = surface
        self.points = points
        self.n = n
        self.m = 2 * n - 1
        self.adapted = adapt_to_p1
        _, gh, grad = horizontal_gradient(surface, points)
        if np.any(np.linalg.norm(gh, axis=1) <= char_tol * np.linalg.norm(grad, axis=1)):
            raise CharacteristicPointError("characteristic point in batch")

        calc = LocalCalculus(n, points, order)
        self.calc = calc
        self.order = order
        batch = calc.batch
        zero = Jet.constant(calc.space, np.zeros(batch))
        self.zero = zero

        u = surface.jet_on(calc)
        du = calc.frame_derivatives(u)
        grad_h = du[: 2 * n]
        self.nH_sq = (grad_h * grad_h).sum(0)
        norm_h = self.nH_sq.sqrt()
        self.grad_norm_h = norm_h
        self.nu = grad_h / norm_h
        self.alpha = du[2 * n] / norm_h
        self.Jnu = apply_J_jet(self.nu)

        self.frame = self._build_frame(pivot_seed, slot_mix)
        E = self.frame
        m = self.m
        self.JE = _J_on_axis(E, 1)

        # directions: frame fields followed by S = T - alpha nu
        frame_dirs = stack([*(E[:, k] for k in range(2 * n)), Jet.constant(calc.space, np.zeros((m, batch)))], axis=1)
        s_dir = stack([*(-self.alpha * self.nu[k] for k in range(2 * n)), zero + 1.0])
        self.dirs = stack([*(frame_dirs[a] for a in range(m)), s_dir])
        self.s_dir = s_dir
        jnu_dir = stack([*(self.Jnu[k] for k in range(2 * n)), zero])
        self.jnu_dir = jnu_dir

        dE = calc.along(E, self.dirs)
        self.Gamma = einsum("rjlz,klz->rjkz", dE, E)
        self.Dnu = calc.along(self.nu, self.dirs)
        h_full = einsum("rlz,blz->rbz", self.Dnu, E)
        self.h = h_full[:m]
        self.h_S = h_full[m]
        self.C = einsum("alz,blz->abz", self.JE, E)
        self.htilde = self.h + self.alpha * self.C
        self.H = sum(self.h[a, a] for a in range(m))
        self.j = einsum("lz,alz->az", self.Jnu, E)
        self.nu_dot_frame = einsum("lz,alz->az", self.nu, E)

        self.Zalpha = calc.frame_derivatives(self.alpha)
        self.Dalpha = calc.along(self.alpha, self.dirs)
        self.Ealpha = self.Dalpha[:m]
        self.Jnu_alpha = (self.Jnu * self.Zalpha[: 2 * n]).sum(0)
        self.htilde_sq = (self.htilde * self.htilde).sum((0, 1))
        self.h_sq = (self.h * self.h).sum((0, 1))
        self.q = self.htilde_sq + 4.0 * self.Jnu_alpha + 2.0 * (n + 1) * self.alpha * self.alpha
        self.q_alt = self.h_sq + 4.0 * self.Jnu_alpha + 4.0 * self.alpha * self.alpha
        self.W = calc.along(self.nu, jnu_dir[None])[0]  # grad_{J nu} nu
        self.ell = (self.W * self.Jnu).sum(0)
        self.Xdev = self.W - self.ell * self.Jnu
        self.gradHS_alpha = einsum("az,alz->lz", self.Ealpha, E)
        self.div_nu = sum(calc.frame_derivatives(self.nu[k])[k] for k in range(2 * n))

    # -- frame ------------------------------------------------------------
    def _build_frame(self, pivot_seed, slot_mix) -> Jet:
        n, m = self.n, self.m
        nu, Jnu = self.nu, self.Jnu
        cand = orthogonal_candidates(2 * n, pivot_seed)
        fixed = [Jnu.value] if self.adapted else []
        count = m - len(fixed)
        picks = pivot_order(nu.value, fixed, cand, count) if count else np.zeros((0, self.calc.batch), int)
        basis = [nu, *([Jnu] if self.adapted else [])]
        made = []
        for step in range(count):
            c = cand[picks[step]].T  # (2n, B)
            v = Jet.constant(self.calc.space, c)
            for b in basis:
                v = v - (v * b).sum(0) * b
            e = v / (v * v).sum(0).sqrt()
            basis.append(e)
            made.append(e)
        if self.adapted:
            slots = made[: n - 1] + [Jnu] + made[n - 1 :]
            free = [i for i in range(m) if i != n - 1]
        else:
            slots = made
            free = list(range(m))
        frame = stack(slots)
        if slot_mix is not None:
            mix = np.eye(m)
            mix[np.ix_(free, free)] = slot_mix
            frame = einsum("ab,blz->alz", mix, frame)
        return frame

    # -- pointwise values ---------------------------------------------------
    def state(self, i: int) -> "GeometryState":
        v = lambda j: j.value[..., i]  # noqa: E731
        alpha = float(v(self.alpha))
        nu = v(self.nu)
        norm_n = np.sqrt(1.0 + alpha * alpha)
        N = np.concatenate([nu, [alpha]]) / norm_n
        return GeometryState(
            point=self.points[i],
            nu=nu,
            alpha=alpha,
            N=N,
            nH_norm=1.0 / norm_n,
            Jnu=v(self.Jnu),
            Svec=np.concatenate([-alpha * nu, [1.0]]),
            frame=v(self.frame),
            h=v(self.h),
            htilde=v(self.htilde),
            C=v(self.C),
            Hmean=float(v(self.H)),
            ell=float(v(self.ell)),
            Xdev=v(self.Xdev),
            q=float(v(self.q)),
            gradHS_alpha=v(self.gradHS_alpha),
            Jnu_alpha=float(v(self.Jnu_alpha)),
        )

    def values(self) -> dict[str, np.ndarray]:
        """Named scalar invariants over the batch."""
        W = self.W.value
        return {
            "alpha": self.alpha.value,
            "htilde_sq": self.htilde_sq.value,
            "h_sq": self.h_sq.value,
            "H": self.H.value,
            "ell": self.ell.value,
            "ell_sq": self.ell.value ** 2,
            "q": self.q.value,
            "p3": self.Jnu_alpha.value + self.alpha.value ** 2,
            "jnu_nu_norm": np.linalg.norm(W, axis=0),
            "jnu_nu_coeff": np.sum(W * self.Jnu.value, axis=0),
            "Xdev_norm": np.linalg.norm(self.Xdev.value, axis=0),
        }

    # -- property detectors ---------------------------------------------------
    def p1_residuals(self) -> tuple[np.ndarray, np.ndarray]:
        """(|X|, |htilde(J nu, .) - ell J nu|), computed independently."""
        xdev = np.linalg.norm(self.Xdev.value, axis=0)
        ht, j, E = self.htilde.value, self.j.value, self.frame.value
        row = np.einsum("az,abz,blz->lz", j, ht, E)
        eig = np.linalg.norm(row - self.ell.value * self.Jnu.value, axis=0)
        return xdev, eig

    def p2_residual(self) -> np.ndarray:
        g = self.gradHS_alpha.value
        return np.linalg.norm(g - self.Jnu_alpha.value * self.Jnu.value, axis=0)

    def p3_value(self) -> np.ndarray:
        return self.Jnu_alpha.value + self.alpha.value ** 2


@dataclass
class GeometryState:
    point: np.ndarray
    nu: np.ndarray
    alpha: float
    N: np.ndarray
    nH_norm: float
    Jnu: np.ndarray
    Svec: np.ndarray
    frame: np.ndarray
    h: np.ndarray
    htilde: np.ndarray
    C: np.ndarray
    Hmean: float
    ell: float
    Xdev: np.ndarray
    q: float
    gradHS_alpha: np.ndarray
    Jnu_alpha: float


# ---------------------------------------------------------------------------
# Point-level API
# ---------------------------------------------------------------------------


def _geometry(s: SurfaceDef, p, order: int, **kw) -> SurfaceGeometry:
    return SurfaceGeometry(s, np.atleast_2d(p), order=order, **kw)


def horizontal_normal(s: SurfaceDef, p):
    """(nu, |N^H|, alpha, N) at a point."""
    st = _geometry(s, p, 2).state(0)
    return st.nu, st.nH_norm, st.alpha, st.N


def tangent_frame(s: SurfaceDef, p, adapt_to_p1: bool = True, pivot_seed: int | None = None) -> np.ndarray:
    """Orthonormal frame (rows) of the horizontal tangent space."""
    return _geometry(s, p, 2, adapt_to_p1=adapt_to_p1, pivot_seed=pivot_seed).state(0).frame


def shape_tensors(s: SurfaceDef, p, adapt_to_p1: bool = True):
    """(h, htilde, H, ell, X, C) over the frame at a point."""
    st = _geometry(s, p, 2, adapt_to_p1=adapt_to_p1).state(0)
    return st.h, st.htilde, st.Hmean, st.ell, st.Xdev, st.C


def stability_q(s: SurfaceDef, p) -> float:
    g = _geometry(s, p, 2)
    q, q_alt = float(g.q.value[0]), float(g.q_alt.value[0])
    if not np.isclose(q, q_alt, rtol=1e-10, atol=1e-10):
        raise ArithmeticError(f"the two forms of q disagree: {q} vs {q_alt}")
    return q


def s_evolution_residuals(geom: SurfaceGeometry) -> dict[str, np.ndarray]:
    """Residuals of the evolution of nu along S = T - alpha nu.

    ``tangential`` compares <grad_S nu, E> with E(alpha) + 2 alpha^2 <J nu, E>;
    ``full`` compares the whole horizontal vectors, whose nu-component depends
    on how nu and alpha are extended off the surface; ``normal`` is the
    companion grad_nu nu + 2 alpha J nu, also extension-dependent.
    """
    n = geom.n
    a = geom.alpha.value
    tang = geom.h_S.value - geom.Ealpha.value - 2 * a * a * geom.j.value
    full = geom.Dnu.value[geom.m] - geom.Zalpha.value[: 2 * n] - 2 * a * a * geom.Jnu.value
    nu_dir = stack([*(geom.nu[k] for k in range(2 * n)), geom.zero])
    nn = geom.calc.along(geom.nu, nu_dir[None])[0].value
    normal = nn + 2 * a * geom.Jnu.value
    return {
        "tangential": np.linalg.norm(tang, axis=0),
        "full": np.linalg.norm(full, axis=0),
        "normal": np.linalg.norm(normal, axis=0),
    }


def check_S_evolution(s: SurfaceDef, p) -> float:
    return float(s_evolution_residuals(_geometry(s, p, 2))["tangential"][0])
