"""Pointwise and integral verification of the identities and inequalities.

Every check produces :class:`CheckReport` records.  Point checks evaluate both
sides over a batch of surface points through :class:`Analysis`, which caches
the covariant derivatives shared between checks.  Global checks cover the
ambient structure, the parameter criteria and the integral experiments.
Checks whose hypotheses fail at a point report ``precondition-failed`` with the
measured hypothesis residual instead of asserting anything.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import quadrature as quad
from .extrinsic import SurfaceGeometry, orthogonal_candidates, s_evolution_residuals
from .heis_core import LocalCalculus, apply_J_jet, bracket_algebra, group_mul, inverse, koranyi_gauge
from .jets import Jet, stack
from .surface_defs import GalleryEntry, SurfaceDef, gallery, sample_points
from .tensor_calculus import (
    cov_deriv_tensor,
    curvature_RS,
    directional,
    gradient_scalar,
    hess_scalar,
    hess_tensor,
    laplacian_frame,
    laplacian_hat_scalar,
    laplacian_scalar,
    laplacian_tensor,
    tangent_torsion_residual,
    tensor_norm_sq,
)

ALT_PIVOT_SEED = 7919
STATUSES = ("pass", "fail", "precondition-failed", "info")


# ---------------------------------------------------------------------------
# Catalog
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CheckInfo:
    anchor: str
    kind: str  # equality | inequality | value | property | criterion | experiment
    scope: str  # point | global
    hypotheses: tuple = ()


CATALOG: dict[str, CheckInfo] = {
    # ambient structure
    "heis_bracket": CheckInfo("[X_j, Y_j] = -2T, all other frame brackets vanish", "equality", "global"),
    "heis_torsion": CheckInfo("grad_X Y - grad_Y X - [X, Y] = 2<J(X), Y> T", "equality", "global"),
    "heis_flatness": CheckInfo("R = 0: grad_X grad_Y Z - grad_Y grad_X Z - grad_[X,Y] Z = 0", "equality", "global"),
    "heis_J_compat": CheckInfo("grad_X J(Y) = J(grad_X Y)", "equality", "global"),
    "heis_metric": CheckInfo("X<Y, Z> = <grad_X Y, Z> + <Y, grad_X Z>", "equality", "global"),
    # first-order extrinsic structure
    "frame_orthonormal": CheckInfo("<E_a, E_b> = delta_ab, <E_a, nu> = 0, adapted slot = J(nu)", "equality", "point"),
    "h_commutation": CheckInfo("h(Y, X) - h(X, Y) = 2 alpha C(X, Y)", "equality", "point"),
    "h_norm_split": CheckInfo("|h|^2 - |htilde|^2 = 2(n-1) alpha^2", "equality", "point"),
    "mean_curvature_trace": CheckInfo("trace h = trace htilde = div_H nu", "equality", "point"),
    "q_forms": CheckInfo("q = |htilde|^2 + 4<grad alpha, J(nu)> + 2(n+1) alpha^2 = |h|^2 + 4<grad alpha, J(nu)> + 4 alpha^2", "equality", "point"),
    "s_evolution": CheckInfo("grad_S nu = grad_H alpha + 2 alpha^2 J(nu), S = T - alpha nu", "equality", "point"),
    "tangent_torsion": CheckInfo("grad^S_X Y - grad^S_Y X - [X, Y] = 2<J(X), Y> S", "equality", "point"),
    # tensor calculus on the surface
    "gauss": CheckInfo("R^S(X, Y, Z, W) = h(Y, Z) h(X, W) - h(X, Z) h(Y, W)", "equality", "point"),
    "codazzi": CheckInfo("(grad^S_Y h)(X, Z) = (grad^S_X h)(Y, Z) + 2 C(X, Y) h(S, Z), h(S, Z) = Z alpha + 2 alpha^2 <J(nu), Z>", "equality", "point"),
    "codazzi_htilde": CheckInfo(
        "grad_Y htilde(X,Z) - grad_X htilde(Y,Z) = 2(Z alpha) C(X,Y) + (Y alpha) C(X,Z) - (X alpha) C(Y,Z) "
        "+ 2 alpha^2 C(nu,Z) C(X,Y) + alpha C(nu,X) h(Y,Z) - alpha C(nu,Y) h(X,Z)",
        "equality",
        "point",
    ),
    "codazzi_htilde_corollary": CheckInfo(
        "grad_X htilde(Y,Y) = grad_Y htilde(X,Y) + 3(Y alpha) C(Y,X) + 3 alpha^2 <J(nu),Y> C(Y,X) "
        "+ alpha <J(nu),Y> htilde(Y,X) - alpha <J(nu),X> htilde(Y,Y)",
        "equality",
        "point",
    ),
    "nabla_C": CheckInfo("(grad^S_X C)(Y, Z) = C(Z, nu) h(X, Y) - C(Y, nu) h(X, Z), X in TS", "equality", "point"),
    "nabla_h_commutation": CheckInfo(
        "grad_X h(Y,Z) = grad_X h(Z,Y) + 2(X alpha) C(Z,Y) + 2 alpha C(Y,nu) h(X,Z) - 2 alpha C(Z,nu) h(X,Y)", "equality", "point"
    ),
    "hessian_commutation": CheckInfo(
        "Hess T(Y,X,Z,W) = Hess T(X,Y,Z,W) + T(R^S(X,Y)Z, W) + T(Z, R^S(X,Y)W) + 2<J(X),Y> (grad^S_S T)(Z,W)", "equality", "point"
    ),
    "trace_nabla_h": CheckInfo("trace grad^S_X h = XH", "equality", "point"),
    "trace_hess_h": CheckInfo("trace Hess h(X, Y, ., .) = Hess H(X, Y)", "equality", "point"),
    "laplacian_forms": CheckInfo("Delta f = trace Hess f = sum (delta_ij - nu_i nu_j) Z_i Z_j f - H <grad_H f, nu>", "equality", "point"),
    "chain_rule": CheckInfo("hatDelta(F o f) = F''(f) |grad_{H,S} f|^2 + F'(f) hatDelta f", "equality", "point"),
    "laplacian_norm_htilde": CheckInfo("1/2 Delta |htilde|^2 = |grad htilde|^2 + <htilde, Delta htilde>", "equality", "point"),
    "jnu_htilde_sq": CheckInfo(
        "<grad^S |htilde|^2, J(nu)> = 4 alpha |grad_{J(nu)} nu|^2 - 4 alpha |htilde|^2 + 2 sum htilde(E_j,E_k) <grad_{E_j} grad_{J(nu)} nu, E_k>",
        "equality",
        "point",
    ),
    # Simons formulas
    "simons_full": CheckInfo(
        "Delta h(X,Y) = -q h + 8 alpha^2 h + 4 Hess alpha(pi J X, Y) + 4 Hess alpha(X, pi J Y) "
        "+ (16 alpha (pi J X) alpha - 8 alpha^2 h(X, J nu) + 4 (grad_X nu) alpha) <Y, J nu> "
        "- 2 (X alpha) h(Y, J nu) - 2 (Y alpha) h(X, J nu) + 2 alpha h(Y, grad_{pi J X} nu) "
        "- 2 alpha <grad_X grad_{J nu} nu, Y> - 4 alpha^2 h(pi J X, pi J Y) + 2 alpha <J grad_X nu, grad_Y nu>",
        "equality",
        "point",
        ("minimal",),
    ),
    "simons_contracted": CheckInfo(
        "1/2 hatDelta |htilde|^2 = |grad htilde|^2 - q|htilde|^2 + 6 alpha^2 |htilde|^2 - 6 alpha^2 |grad_{J nu} nu|^2 "
        "+ 4 (J nu alpha) |htilde|^2 - 4 (J nu alpha) ell^2 - (4 J nu alpha + 6 alpha^2) <htilde, htilde_J>",
        "equality",
        "point",
        ("minimal", "P2"),
    ),
    "simons_contracted_h2": CheckInfo(
        "1/2 hatDelta |htilde|^2 = |grad htilde|^2 - q|htilde|^2 + 4 alpha^2 |htilde|^2 - 8 alpha^2 |grad_{J nu} nu|^2 + 2 alpha^2 ell^2 "
        "+ 4 (J nu alpha + alpha^2)(2|htilde|^2 - 4|grad_{J nu} nu|^2 + ell^2) + (8 J nu alpha + 6 alpha^2)(|grad_{J nu} nu|^2 - ell^2)",
        "equality",
        "point",
        ("n=2", "minimal", "P2"),
    ),
    "simons_lower_bound_h2": CheckInfo(
        "1/2 hatDelta |htilde|^2 >= |grad htilde|^2 - q|htilde|^2 + alpha^2 (4|htilde|^2 - 6 ell^2)",
        "inequality",
        "point",
        ("n=2", "minimal", "P1", "P2", "P3"),
    ),
    "hhJ_identity_h2": CheckInfo("<htilde, htilde_J> = 2|grad_{J(nu)} nu|^2 - |htilde|^2", "equality", "point", ("n=2", "minimal")),
    "ell_bound_h2": CheckInfo("2|htilde|^2 - 4|grad_{J(nu)} nu|^2 + ell^2 >= 0", "inequality", "point", ("n=2", "minimal")),
    # Kato inequalities
    "kato_trivial": CheckInfo("|grad |htilde|^2|^2 <= 4 |htilde|^2 |grad htilde|^2", "inequality", "point"),
    "kato_improved": CheckInfo(
        "(1 + k/(2n-1)) |grad |htilde|^2|^2 <= 4|htilde|^2 |grad htilde|^2 + 4 alpha^2 |htilde|^2 ((4k-2)|htilde|^2 + (2+2kn-2k-4n) ell^2)",
        "inequality",
        "point",
        ("minimal", "P1", "P2"),
    ),
    "simons_kato": CheckInfo(
        "2 A(delta)^2 hatDelta |htilde|^2 >= (1 + k/(2n-1)) |grad |htilde|^2|^2 - 4 q A(delta)^4 + 4 alpha^2 |htilde|^2 g_(S,k), "
        "A(delta)^2 = |htilde|^2 + delta",
        "inequality",
        "point",
        ("n=2", "minimal", "P1", "P2", "P3"),
    ),
    "g_sk_sign": CheckInfo("g_(S,k) = (6-4k)|htilde|^2 - 2k ell^2 >= (6 - 16k/3)|htilde|^2 >= 0 for k <= 9/8", "inequality", "point", ("n=2", "minimal")),
    "q_lower_bound": CheckInfo("q >= |htilde|^2 + (2n-2) alpha^2 under J(nu)alpha + alpha^2 >= 0", "inequality", "point", ("P3",)),
    # structural hypotheses and closed forms
    "property_p1": CheckInfo("P1: grad_{J(nu)} nu - ell J(nu) = 0, i.e. J(nu) is an eigenvector of htilde", "property", "point"),
    "property_p2": CheckInfo("P2: grad_{H,S} alpha = <grad alpha, J(nu)> J(nu)", "property", "point"),
    "property_p3": CheckInfo("P3: J(nu)alpha + alpha^2 >= 0", "property", "point"),
    "example_values": CheckInfo("closed-form invariants of the example gallery", "value", "point"),
    "frame_independence": CheckInfo("|grad htilde|^2, Delta |htilde|^2, H, q do not depend on the frame", "equality", "point"),
    "simons_frame_invariance": CheckInfo("Simons residual unchanged (< 2x) under an orthogonal re-mix of the H'TS slots", "equality", "point", ("minimal",)),
    # parameter criteria
    "appendix_u_threshold": CheckInfo("u(m) := (3m - 6)/(6m - 4), u(0) = 3/2, u(2/9) = 2", "criterion", "global"),
    "appendix_admissibility": CheckInfo(
        "(m <= 2/9 => omega < u(m)) implies some k in (3/4, 2] with g_(S,k,omega) = (6-2omega-4k)|htilde|^2 + (3omega-2k) ell^2 >= 0",
        "criterion",
        "global",
    ),
    "beta_window": CheckInfo("beta in [1 - k/(2n-1), 1 + sqrt(k/(2n-1)))", "criterion", "global"),
    # integral experiments
    "cutoff_gradient": CheckInfo("phi_R = 1 on B_R, 0 off B_2R, |grad_H phi_R| <= C/R", "experiment", "global"),
    "volume_growth": CheckInfo("sigma_H(S cap B_r) / r^(2n+1) bounded; vertical hyperplane exponent 2n+1", "experiment", "global"),
    "curvature_estimate": CheckInfo(
        "int |htilde|^(2b+2) phi^(2b+2) dsigma_H <= C int |grad_{H,S} phi|^(2b+2) dsigma_H", "experiment", "global"
    ),
    "stability_vertical": CheckInfo("int q xi^2 dsigma_H <= int |grad_{H,S} xi|^2 dsigma_H on a vertical hyperplane", "experiment", "global"),
    "stability_catenoid": CheckInfo("int q xi^2 dsigma_H versus int |grad_{H,S} xi|^2 dsigma_H on a catenoid (exploratory)", "experiment", "global"),
}

POINT_CHECKS = tuple(k for k, v in CATALOG.items() if v.scope == "point")
GLOBAL_CHECKS = tuple(k for k, v in CATALOG.items() if v.scope == "global")


# ---------------------------------------------------------------------------
# Reports and tolerances
# ---------------------------------------------------------------------------


@dataclass
class CheckReport:
    check_id: str
    surface: str
    point: tuple | None
    lhs: float
    rhs: float
    residual: float
    margin: float | None
    tol: float
    status: str
    kind: str = "equality"
    anchor: str = ""
    notes: str = ""
    terms: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    @property
    def asserted(self) -> bool:
        return self.status in ("pass", "fail")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        out["point"] = None if self.point is None else [float(v) for v in self.point]
        return out


@dataclass(frozen=True)
class Tolerances:
    """Default tolerances; ``scale`` multiplies all of them."""

    scale: float = 1.0

    def identity(self, hsq):
        return self.scale * 1e-8 * (1.0 + np.asarray(hsq) ** 1.5)

    def simons(self, hsq):
        return self.scale * 1e-6 * (1.0 + np.asarray(hsq) ** 1.5)

    def value(self, expected):
        return self.scale * 1e-8 * np.maximum(1.0, np.abs(expected))

    @property
    def margin(self) -> float:
        return self.scale * 1e-8

    def gate(self, size):
        return self.scale * 1e-8 * (1.0 + np.asarray(size))


def _flat(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return a.reshape(-1, a.shape[-1]) if a.ndim > 1 else a[None]


# ---------------------------------------------------------------------------
# Analysis of a batch of points
# ---------------------------------------------------------------------------


class Analysis:
    """Geometry and derived tensors at a batch of points, computed on demand."""

    def __init__(self, surface: SurfaceDef, points, tol: Tolerances = Tolerances(), frame: str = "adapted", label: str | None = None, expected: Mapping[str, str] | None = None, known=(), seed: int = 0):
        self.surface = surface
        self.points = np.atleast_2d(np.asarray(points, dtype=float))
        self.tol = tol
        self.frame = frame
        self.label = label or surface.label
        self.expected = dict(expected or {})
        self.known = tuple(known)
        self.seed = seed
        kw = {"adapt_to_p1": True} if frame == "adapted" else {"adapt_to_p1": False, "pivot_seed": ALT_PIVOT_SEED}
        if frame == "mixed":
            kw = {"adapt_to_p1": True, "slot_mix": self._mix_matrix()}
        self.geom = SurfaceGeometry(surface, self.points, order=4, **kw)
        self.n, self.m = surface.n, 2 * surface.n - 1

    @classmethod
    def from_entry(cls, entry: GalleryEntry, points, tol: Tolerances = Tolerances(), seed: int = 0) -> "Analysis":
        return cls(entry.surface, points, tol, expected=entry.expected_properties, known=entry.known, seed=seed)

    def _mix_matrix(self):
        free = 2 * self.surface.n - 2
        return orthogonal_candidates(free, self.seed + 101) if free else None

    @cached_property
    def alternate(self) -> "Analysis":
        return Analysis(self.surface, self.points, self.tol, "rotated", self.label, seed=self.seed)

    @cached_property
    def mixed(self) -> "Analysis | None":
        if 2 * self.n - 2 < 2:
            return None
        return Analysis(self.surface, self.points, self.tol, "mixed", self.label, seed=self.seed)

    # -- cached values --------------------------------------------------------
    def v(self, name: str) -> np.ndarray:
        return getattr(self.geom, name).value

    @cached_property
    def hsq(self) -> np.ndarray:
        return self.v("htilde_sq")

    @cached_property
    def Dh(self) -> Jet:
        return cov_deriv_tensor(self.geom, self.geom.h)

    @cached_property
    def Dht(self) -> Jet:
        return cov_deriv_tensor(self.geom, self.geom.htilde)

    @cached_property
    def grad_ht_sq(self) -> np.ndarray:
        return tensor_norm_sq(self.Dht[: self.m]).value

    @cached_property
    def grad_hsq_sq(self) -> np.ndarray:
        return tensor_norm_sq(gradient_scalar(self.geom, self.geom.htilde_sq)).value

    @cached_property
    def hat_lap_hsq(self) -> np.ndarray:
        return laplacian_hat_scalar(self.geom, self.geom.htilde_sq).value

    @cached_property
    def curvature(self) -> np.ndarray:
        return curvature_RS(self.geom).value

    @cached_property
    def hess_h(self) -> np.ndarray:
        return hess_tensor(self.geom, self.geom.h, self.m).value

    @cached_property
    def hhJ(self) -> np.ndarray:
        C, ht = self.v("C"), self.v("htilde")
        return np.einsum("abz,acz,bdz,cdz->z", ht, C, C, ht)

    @cached_property
    def W_sq(self) -> np.ndarray:
        return np.sum(self.v("W") ** 2, axis=0)

    # -- hypotheses -------------------------------------------------------------
    @cached_property
    def gates(self) -> dict[str, tuple[np.ndarray, np.ndarray]]:
        """Measured residual and its tolerance for every hypothesis."""
        g = self.geom
        hnorm = np.sqrt(self.hsq)
        xdev, _ = g.p1_residuals()
        p2 = g.p2_residual()
        grad_alpha = np.linalg.norm(g.Ealpha.value, axis=0)
        p3 = g.p3_value()
        B = len(self.points)
        return {
            "minimal": (np.abs(self.v("H")), self.tol.gate(hnorm)),
            "P1": (xdev, self.tol.gate(hnorm)),
            "P2": (p2, self.tol.gate(grad_alpha)),
            "P3": (np.maximum(-p3, 0.0), np.full(B, self.tol.margin)),
            "n=2": (np.full(B, 0.0 if self.n == 2 else np.inf), np.zeros(B)),
        }

    def gate_mask(self, hypotheses: Iterable[str]) -> tuple[np.ndarray, list[str]]:
        ok = np.ones(len(self.points), dtype=bool)
        notes = [""] * len(self.points)
        for hyp in hypotheses:
            res, tol = self.gates[hyp]
            bad = ~(res <= tol)
            for i in np.flatnonzero(bad):
                notes[i] += f"{hyp} residual {res[i]:.3e} > {tol[i]:.1e}; "
            ok &= ~bad
        return ok, notes

    # -- report builders ---------------------------------------------------------
    def _point(self, i: int) -> tuple:
        return tuple(float(v) for v in self.points[i])

    def equality(self, check_id, lhs, rhs, tol, terms=None, notes="", extra_residual=None) -> list[CheckReport]:
        info = CATALOG[check_id]
        L, R = _flat(lhs), _flat(rhs)
        diff = np.abs(L - R)
        if extra_residual is not None:
            diff = np.vstack([diff, _flat(extra_residual)])
        worst = np.argmax(diff, axis=0)
        gate, gnotes = self.gate_mask(info.hypotheses)
        tol = np.broadcast_to(tol, (L.shape[-1],))
        out = []
        for i in range(L.shape[-1]):
            k = min(worst[i], L.shape[0] - 1)
            res = float(diff[worst[i], i])
            status = ("pass" if res <= tol[i] else "fail") if gate[i] else "precondition-failed"
            t = {name: float(np.max(np.abs(_flat(val)[:, i]))) for name, val in (terms or {}).items()}
            note = notes[i] if isinstance(notes, list) else notes
            out.append(CheckReport(check_id, self.label, self._point(i), float(L[k, i]), float(R[k, i]), res, None, float(tol[i]), status, info.kind, info.anchor, (gnotes[i] + note).strip(), t))
        return out

    def inequality(self, check_id, smaller, larger, terms=None, notes="", hypotheses=None, status_override=None) -> list[CheckReport]:
        """Reports for ``smaller <= larger`` with margin = larger - smaller."""
        info = CATALOG[check_id]
        smaller, larger = np.asarray(smaller, float), np.asarray(larger, float)
        margin = larger - smaller
        gate, gnotes = self.gate_mask(info.hypotheses if hypotheses is None else hypotheses)
        tol = self.tol.margin
        out = []
        for i in range(len(margin)):
            status = ("pass" if margin[i] >= -tol else "fail") if gate[i] else "precondition-failed"
            if status_override is not None and status_override[i]:
                status = status_override[i]
            t = {name: float(np.asarray(val)[i]) for name, val in (terms or {}).items()}
            note = notes[i] if isinstance(notes, list) else notes
            out.append(
                CheckReport(check_id, self.label, self._point(i), float(smaller[i]), float(larger[i]), float(max(-margin[i], 0.0)), float(margin[i]), tol, status, info.kind, info.anchor, (gnotes[i] + note).strip(), t)
            )
        return out

    def both_frames(self, check_id, compute: Callable[["Analysis"], tuple], tol, terms=None, notes="") -> list[CheckReport]:
        """Evaluate an identity in the adapted frame and in a rotated pivoting."""
        lhs, rhs = compute(self)
        lhs2, rhs2 = compute(self.alternate)
        alt = np.abs(_flat(lhs2) - _flat(rhs2))
        reps = self.equality(check_id, lhs, rhs, tol, terms, notes, extra_residual=alt)
        base = np.max(np.abs(_flat(lhs) - _flat(rhs)), axis=0)
        for i, r in enumerate(reps):
            r.terms.update({"residual_adapted_frame": float(base[i]), "residual_rotated_frame": float(np.max(alt[:, i]))})
        return reps


# ---------------------------------------------------------------------------
# Point checks
# ---------------------------------------------------------------------------

POINT_IMPL: dict[str, Callable] = {}


def _register(name):
    def wrap(fn):
        POINT_IMPL[name] = fn
        return fn

    return wrap


@_register("frame_orthonormal")
def _frame_orthonormal(an: Analysis, params):
    def compute(a):
        g = a.geom
        F = np.concatenate([g.frame.value, g.nu.value[None]], axis=0)
        gram = np.einsum("alz,blz->abz", F, F)
        eye = np.broadcast_to(np.eye(a.m + 1)[..., None], gram.shape)
        lhs, rhs = [gram], [eye]
        if a.frame == "adapted":
            lhs.append(g.frame.value[a.n - 1])
            rhs.append(g.Jnu.value)
        return np.concatenate([_flat(x) for x in lhs]), np.concatenate([_flat(x) for x in rhs])

    return an.both_frames("frame_orthonormal", compute, an.tol.identity(an.hsq))


@_register("h_commutation")
def _h_commutation(an, params):
    def compute(a):
        h = a.v("h")
        return np.swapaxes(h, 0, 1) - h, 2.0 * a.v("alpha") * a.v("C")

    return an.both_frames("h_commutation", compute, an.tol.identity(an.hsq))


@_register("h_norm_split")
def _h_norm_split(an, params):
    def compute(a):
        return a.v("h_sq") - a.v("htilde_sq"), 2.0 * (a.n - 1) * a.v("alpha") ** 2

    return an.both_frames("h_norm_split", compute, an.tol.identity(an.hsq))


@_register("mean_curvature_trace")
def _mean_curvature_trace(an, params):
    def compute(a):
        tr_h = np.einsum("aaz->z", a.v("h"))
        tr_ht = np.einsum("aaz->z", a.v("htilde"))
        div = a.v("div_nu")
        return np.stack([tr_h, tr_ht]), np.stack([div, div])

    return an.both_frames("mean_curvature_trace", compute, an.tol.identity(an.hsq))


@_register("q_forms")
def _q_forms(an, params):
    return an.equality("q_forms", an.v("q"), an.v("q_alt"), an.tol.identity(an.hsq))


@_register("s_evolution")
def _s_evolution(an, params):
    g = an.geom
    a = g.alpha.value
    lhs = g.h_S.value
    rhs = g.Ealpha.value + 2 * a * a * g.j.value
    res = s_evolution_residuals(g)
    distance_like = an.surface.id == "vertical_hyperplane"
    if distance_like:
        extra = np.stack([res["full"], res["normal"]])
        notes = "full and normal forms asserted (u is a signed distance)"
    else:
        extra = None
        notes = [f"tangential form asserted; full {f:.2e}, normal {q:.2e} depend on the extension of nu off S" for f, q in zip(res["full"], res["normal"])]
    terms = {"full_form": res["full"], "normal_form": res["normal"]}
    return an.equality("s_evolution", lhs, rhs, an.tol.identity(an.hsq), terms, notes, extra_residual=extra)


@_register("tangent_torsion")
def _tangent_torsion(an, params):
    def compute(a):
        r = tangent_torsion_residual(a.geom)
        return r, np.zeros_like(r)

    return an.both_frames("tangent_torsion", compute, an.tol.identity(an.hsq))


@_register("gauss")
def _gauss(an, params):
    def compute(a):
        h = a.v("h")
        rhs = np.einsum("bcz,adz->abcdz", h, h) - np.einsum("acz,bdz->abcdz", h, h)
        return a.curvature, rhs

    return an.both_frames("gauss", compute, an.tol.identity(an.hsq))


def _h_full(a: Analysis) -> np.ndarray:
    return np.concatenate([a.v("h"), a.v("h_S")[None]], axis=0)


@_register("codazzi")
def _codazzi(an, params):
    def compute(a):
        m = a.m
        Dh = a.Dh.value[:m]
        return np.swapaxes(Dh, 0, 1), Dh + 2.0 * a.v("C")[:, :, None] * a.v("h_S")[None, None]

    return an.both_frames("codazzi", compute, an.tol.identity(an.hsq))


@_register("codazzi_htilde")
def _codazzi_htilde(an, params):
    def compute(a):
        m = a.m
        D = a.Dht.value[:m]
        C, j, h, al, Ea = a.v("C"), a.v("j"), a.v("h"), a.v("alpha"), a.v("Ealpha")
        rhs = (
            2 * C[:, :, None] * Ea[None, None]
            + np.einsum("bz,acz->abcz", Ea, C)
            - np.einsum("az,bcz->abcz", Ea, C)
            + 2 * al**2 * C[:, :, None] * j[None, None]
            + al * np.einsum("az,bcz->abcz", j, h)
            - al * np.einsum("bz,acz->abcz", j, h)
        )
        return np.swapaxes(D, 0, 1) - D, rhs

    return an.both_frames("codazzi_htilde", compute, an.tol.identity(an.hsq))


@_register("codazzi_htilde_corollary")
def _codazzi_corollary(an, params):
    combos = int(params.get("combinations", 8))
    rng = np.random.default_rng(an.seed + 17)
    coeffs = [(rng.normal(size=an.m), rng.normal(size=an.m)) for _ in range(combos)]

    def compute(a):
        D = a.Dht.value[: a.m]
        C, j, ht, al, Ea = a.v("C"), a.v("j"), a.v("htilde"), a.v("alpha"), a.v("Ealpha")
        L, R = [], []
        for x, y in coeffs:
            pair = lambda T, u, w: np.einsum("a,b,abz->z", u, w, T)  # noqa: E731
            L.append(np.einsum("a,b,c,abcz->z", x, y, y, D))
            cyx = pair(C, y, x)
            R.append(
                np.einsum("a,b,c,abcz->z", y, x, y, D)
                + 3 * (y @ Ea) * cyx
                + 3 * al**2 * (y @ j) * cyx
                + al * (y @ j) * pair(ht, y, x)
                - al * (x @ j) * pair(ht, y, y)
            )
        return np.stack(L), np.stack(R)

    return an.both_frames("codazzi_htilde_corollary", compute, an.tol.identity(an.hsq), notes=f"{combos} random tangential combinations")


@_register("nabla_C")
def _nabla_C(an, params):
    def compute(a):
        DC = cov_deriv_tensor(a.geom, a.geom.C).value
        hf, j = _h_full(a), a.v("j")
        # C(Z, nu) = <J Z, nu> = -<Z, J nu>
        rhs = -np.einsum("cz,rbz->rbcz", j, hf) + np.einsum("bz,rcz->rbcz", j, hf)
        return DC, rhs

    return an.both_frames("nabla_C", compute, an.tol.identity(an.hsq), notes="X runs over the frame and S")


@_register("nabla_h_commutation")
def _nabla_h_commutation(an, params):
    def compute(a):
        Dh = a.Dh.value
        hf, j, al = _h_full(a), a.v("j"), a.v("alpha")
        rhs = (
            np.swapaxes(Dh, 1, 2)
            + 2 * a.v("Dalpha")[:, None, None] * np.swapaxes(a.v("C"), 0, 1)[None]
            - 2 * al * np.einsum("bz,rcz->rbcz", j, hf)
            + 2 * al * np.einsum("cz,rbz->rbcz", j, hf)
        )
        return Dh, rhs

    return an.both_frames("nabla_h_commutation", compute, an.tol.identity(an.hsq), notes="X runs over the frame and S")


@_register("hessian_commutation")
def _hessian_commutation(an, params):
    def compute(a):
        L, R = [], []
        for T, D in ((a.geom.h, a.Dh), (a.geom.htilde, a.Dht)):
            Hs = a.hess_h if T is a.geom.h else hess_tensor(a.geom, T, a.m).value
            Tv, DS = T.value, D.value[a.m]
            Rc = a.curvature
            rhs = Hs + np.einsum("xyzeq,ewq->xyzwq", Rc, Tv)
            rhs = rhs + np.einsum("xyweq,zeq->xyzwq", Rc, Tv) + 2 * a.v("C")[:, :, None, None] * DS[None, None]
            L.append(_flat(np.swapaxes(Hs, 0, 1)))
            R.append(_flat(rhs))
        return np.concatenate(L), np.concatenate(R)

    return an.both_frames("hessian_commutation", compute, an.tol.identity(an.hsq), notes="T = h and T = htilde")


@_register("trace_nabla_h")
def _trace_nabla_h(an, params):
    def compute(a):
        return np.einsum("raaz->rz", a.Dh.value), directional(a.geom, a.geom.H).value

    return an.both_frames("trace_nabla_h", compute, an.tol.identity(an.hsq))


@_register("trace_hess_h")
def _trace_hess_h(an, params):
    def compute(a):
        return np.einsum("xyaaz->xyz", a.hess_h), hess_scalar(a.geom, a.geom.H, a.m).value

    return an.both_frames("trace_hess_h", compute, an.tol.identity(an.hsq))


def _test_function(g: SurfaceGeometry) -> Jet:
    """|z|^4 + t^2 on the jets of the batch."""
    c = g.calc.coords
    z2 = sum(c[k] * c[k] for k in range(2 * g.n))
    return z2 * z2 + c[2 * g.n] * c[2 * g.n]


@_register("laplacian_forms")
def _laplacian_forms(an, params):
    def compute(a):
        g = a.geom
        f = _test_function(g)
        lhs = np.stack([laplacian_frame(g, f).value, laplacian_frame(g, g.htilde_sq).value, laplacian_hat_scalar(g, f, frame_based=True).value])
        rhs = np.stack([laplacian_scalar(g, f).value, laplacian_scalar(g, g.htilde_sq).value, laplacian_hat_scalar(g, f).value])
        return lhs, rhs

    f = _test_function(an.geom).value
    return an.both_frames("laplacian_forms", compute, an.tol.identity(an.hsq) * (1 + np.abs(f)), notes="f = |z|^4 + t^2 and f = |htilde|^2")


@_register("chain_rule")
def _chain_rule(an, params):
    g = an.geom
    f = _test_function(g)
    lhs = laplacian_hat_scalar(g, f * f).value
    grad = tensor_norm_sq(gradient_scalar(g, f)).value
    rhs = 2.0 * grad + 2.0 * f.value * laplacian_hat_scalar(g, f).value
    scale = 1.0 + np.abs(lhs)
    return an.equality("chain_rule", lhs, rhs, an.tol.identity(an.hsq) * scale, notes="F(s) = s^2, f = |z|^4 + t^2")


@_register("laplacian_norm_htilde")
def _laplacian_norm_htilde(an, params):
    def compute(a):
        g = a.geom
        lhs = 0.5 * laplacian_scalar(g, g.htilde_sq).value
        rhs = a.grad_ht_sq + np.sum(a.v("htilde") * laplacian_tensor(g, g.htilde).value, axis=(0, 1))
        return lhs, rhs

    return an.both_frames("laplacian_norm_htilde", compute, an.tol.identity(an.hsq))


@_register("jnu_htilde_sq")
def _jnu_htilde_sq(an, params):
    def compute(a):
        g = a.geom
        lhs = g.calc.along(g.htilde_sq, g.jnu_dir[None])[0].value
        DW = np.einsum("alz,blz->abz", g.calc.along(g.W, g.dirs[: a.m]).value, g.frame.value)
        al = a.v("alpha")
        rhs = 4 * al * a.W_sq - 4 * al * a.hsq + 2 * np.sum(a.v("htilde") * DW, axis=(0, 1))
        return lhs, rhs

    return an.both_frames("jnu_htilde_sq", compute, an.tol.identity(an.hsq))


def simons_terms(a: Analysis) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    """Left side and the named right-hand terms of the full Simons identity (frame matrices)."""
    g, m = a.geom, a.m
    h, C, j, al, Ea = a.v("h"), a.v("C"), a.v("j"), a.v("alpha"), a.v("Ealpha")
    hess_alpha = hess_scalar(g, g.alpha, m).value
    DW = np.einsum("alz,blz->abz", g.calc.along(g.W, g.dirs[:m]).value, g.frame.value)
    rot_alpha = np.einsum("acz,cz->az", C, Ea)  # (pi J E_a) alpha
    h_jnu = np.einsum("acz,cz->az", h, j)  # h(E_a, J nu)
    dnu_alpha = np.einsum("acz,cz->az", h, Ea)  # (grad_{E_a} nu) alpha
    terms = {
        "stability": (-a.v("q") + 8 * al * al) * h,
        "alpha_hessian": 4 * np.einsum("acz,cbz->abz", C, hess_alpha) + 4 * np.einsum("bcz,acz->abz", C, hess_alpha),
        "jnu_weighted": (16 * al * rot_alpha - 8 * al * al * h_jnu + 4 * dnu_alpha)[:, None] * j[None],
        "alpha_gradient": -2 * Ea[:, None] * h_jnu[None] - 2 * Ea[None] * h_jnu[:, None],
        "rotated_shape": 2 * al * np.einsum("acz,cdz,bdz->abz", C, h, h),
        "second_derivative": -2 * al * DW,
        "rotated_pair": -4 * al * al * np.einsum("acz,bdz,cdz->abz", C, C, h),
        "complex_pairing": 2 * al * np.einsum("acz,bdz,cdz->abz", h, h, C),
    }
    lhs = laplacian_tensor(g, g.h).value
    return lhs, terms


def _contract(T: np.ndarray, X, Y) -> np.ndarray:
    if X is None and Y is None:
        return T
    m = T.shape[0]
    x = np.eye(m) if X is None else np.atleast_2d(X)
    y = np.eye(m) if Y is None else np.atleast_2d(Y)
    return np.einsum("ia,jb,abz->ijz", x, y, T)


@_register("simons_full")
def _simons_full(an, params):
    X, Y = params.get("X"), params.get("Y")
    lhs, terms = simons_terms(an)
    rhs = sum(terms.values())
    terms = {k: _contract(v, X, Y) for k, v in terms.items()}
    return an.equality("simons_full", _contract(lhs, X, Y), _contract(rhs, X, Y), an.tol.simons(an.hsq), terms)


def _simons_residual(a: Analysis) -> np.ndarray:
    lhs, terms = simons_terms(a)
    return np.max(np.abs(_flat(lhs - sum(terms.values()))), axis=0)


@_register("simons_frame_invariance")
def _simons_frame_invariance(an, params):
    mixed = an.mixed
    if mixed is None:
        reps = an.equality("simons_frame_invariance", np.zeros(len(an.points)), np.zeros(len(an.points)), an.tol.simons(an.hsq))
        for r in reps:
            r.status, r.notes = "info", "no free H'TS slots to re-mix (n = 1)"
        return reps
    base, mix = _simons_residual(an), _simons_residual(mixed)
    floor = an.tol.scale * 1e-12 * (1.0 + an.hsq**1.5)
    allowed = 2.0 * np.maximum(base, floor)
    reps = an.inequality("simons_frame_invariance", mix, allowed, terms={"base_residual": base, "mixed_residual": mix, "noise_floor": floor})
    return reps


@_register("simons_contracted")
def _simons_contracted(an, params):
    al, ja, q, hs, ell = an.v("alpha"), an.v("Jnu_alpha"), an.v("q"), an.hsq, an.v("ell")
    lhs = 0.5 * an.hat_lap_hsq
    terms = {
        "grad_htilde_sq": an.grad_ht_sq,
        "stability": -q * hs,
        "alpha_sq": 6 * al**2 * hs - 6 * al**2 * an.W_sq,
        "jnu_alpha": 4 * ja * hs - 4 * ja * ell**2,
        "htilde_J": -(4 * ja + 6 * al**2) * an.hhJ,
    }
    return an.equality("simons_contracted", lhs, sum(terms.values()), an.tol.simons(an.hsq), terms)


@_register("simons_contracted_h2")
def _simons_contracted_h2(an, params):
    al, ja, q, hs, ell, w2 = an.v("alpha"), an.v("Jnu_alpha"), an.v("q"), an.hsq, an.v("ell"), an.W_sq
    terms = {
        "grad_htilde_sq": an.grad_ht_sq,
        "stability": -q * hs,
        "alpha_sq": 4 * al**2 * hs - 8 * al**2 * w2 + 2 * al**2 * ell**2,
        "p3_weighted": 4 * (ja + al**2) * (2 * hs - 4 * w2 + ell**2),
        "p1_defect": (8 * ja + 6 * al**2) * (w2 - ell**2),
    }
    return an.equality("simons_contracted_h2", 0.5 * an.hat_lap_hsq, sum(terms.values()), an.tol.simons(an.hsq), terms)


@_register("simons_lower_bound_h2")
def _simons_lower_bound_h2(an, params):
    al, q, hs, ell = an.v("alpha"), an.v("q"), an.hsq, an.v("ell")
    bound = an.grad_ht_sq - q * hs + al**2 * (4 * hs - 6 * ell**2)
    return an.inequality("simons_lower_bound_h2", bound, 0.5 * an.hat_lap_hsq)


@_register("hhJ_identity_h2")
def _hhJ_identity_h2(an, params):
    return an.equality("hhJ_identity_h2", an.hhJ, 2 * an.W_sq - an.hsq, an.tol.identity(an.hsq))


@_register("ell_bound_h2")
def _ell_bound_h2(an, params):
    return an.inequality("ell_bound_h2", np.zeros_like(an.hsq), 2 * an.hsq - 4 * an.W_sq + an.v("ell") ** 2)


@_register("kato_trivial")
def _kato_trivial(an, params):
    return an.inequality("kato_trivial", an.grad_hsq_sq, 4 * an.hsq * an.grad_ht_sq)


def _k_values(params) -> list[float]:
    ks = params.get("k", [0.0, 0.5, 1.0, 1.5, 2.0])
    ks = [ks] if np.isscalar(ks) else list(ks)
    for k in ks:
        if not 0.0 <= k <= 2.0:
            raise ValueError(f"k = {k} outside [0, 2]")
    return [float(k) for k in ks]


@_register("kato_improved")
def _kato_improved(an, params):
    n, hs, al, ell = an.n, an.hsq, an.v("alpha"), an.v("ell")
    out = []
    for k in _k_values(params):
        lhs = (1 + k / (2 * n - 1)) * an.grad_hsq_sq
        remainder = 4 * al**2 * hs * ((4 * k - 2) * hs + (2 + 2 * k * n - 2 * k - 4 * n) * ell**2)
        rhs = 4 * hs * an.grad_ht_sq + remainder
        reps = an.inequality("kato_improved", lhs, rhs, terms={"k": np.full_like(hs, k), "alpha_remainder": remainder}, notes=f"k={k:g}")
        out.extend(reps)
    return out


def g_sk(hsq, ell_sq, k: float, omega: float = 0.0):
    """(6 - 2 omega - 4k)|htilde|^2 + (3 omega - 2k) ell^2."""
    return (6 - 2 * omega - 4 * k) * hsq + (3 * omega - 2 * k) * ell_sq


@_register("simons_kato")
def _simons_kato(an, params):
    n, hs, al, ell, q = an.n, an.hsq, an.v("alpha"), an.v("ell"), an.v("q")
    deltas = params.get("delta", [0.0, 1e-3, 1.0])
    deltas = [deltas] if np.isscalar(deltas) else list(deltas)
    out = []
    for k in _k_values({"k": params.get("simons_kato_k", params.get("k", [0.0, 0.5, 1.0, 1.5, 2.0]))}):
        for d in deltas:
            if d < 0:
                raise ValueError("delta must be non-negative")
            A2 = hs + d
            rhs_side = (1 + k / (2 * n - 1)) * an.grad_hsq_sq - 4 * q * A2**2 + 4 * al**2 * hs * g_sk(hs, ell**2, k)
            lhs_side = 2 * A2 * an.hat_lap_hsq
            out.extend(an.inequality("simons_kato", rhs_side, lhs_side, terms={"k": np.full_like(hs, k), "delta": np.full_like(hs, d)}, notes=f"k={k:g} delta={d:g}"))
    return out


@_register("g_sk_sign")
def _g_sk_sign(an, params):
    k = float(params.get("g_sk_k", 1.0))
    if not k <= 9.0 / 8.0:
        raise ValueError("the sign of g_(S,k) is only claimed for k <= 9/8")
    hs, ell = an.hsq, an.v("ell")
    g = g_sk(hs, ell**2, k)
    floor = (6 - 16 * k / 3) * hs
    return an.inequality("g_sk_sign", floor, g, terms={"g_sk": g, "floor": floor}, notes=f"k={k:g}")


@_register("q_lower_bound")
def _q_lower_bound(an, params):
    bound = an.hsq + (2 * an.n - 2) * an.v("alpha") ** 2
    return an.inequality("q_lower_bound", bound, an.v("q"))


def _property_status(an: Analysis, name: str, holds: np.ndarray) -> list[str]:
    expected = an.expected.get(name)
    if expected is None:
        return ["info"] * len(holds)
    if expected == "holds":
        return ["pass" if h else "fail" for h in holds]
    if expected == "fails":
        return ["fail" if h else "pass" for h in holds]
    return ["info"] * len(holds)


@_register("property_p1")
def _property_p1(an, params):
    xdev, eig = an.geom.p1_residuals()
    res, tol = an.gates["P1"]
    holds = (xdev <= tol) & (eig <= tol)
    reps = an.equality("property_p1", xdev, np.zeros_like(xdev), tol, terms={"eigen_residual": eig})
    for r, st in zip(reps, _property_status(an, "P1", holds)):
        r.status = st
        r.notes = f"expected {an.expected.get('P1', 'unspecified')}; measured {'holds' if r.residual <= r.tol else 'fails'}"
    return reps


@_register("property_p2")
def _property_p2(an, params):
    res, tol = an.gates["P2"]
    holds = res <= tol
    reps = an.equality("property_p2", res, np.zeros_like(res), tol)
    for r, st in zip(reps, _property_status(an, "P2", holds)):
        r.status = st
        r.notes = f"expected {an.expected.get('P2', 'unspecified')}; measured {'holds' if r.residual <= r.tol else 'fails'}"
    return reps


@_register("property_p3")
def _property_p3(an, params):
    val = an.geom.p3_value()
    tol = an.tol.margin
    expected = an.expected.get("P3")
    reps = an.inequality("property_p3", np.zeros_like(val), val, hypotheses=())
    for r, v in zip(reps, val):
        holds = v >= -tol
        if expected == "holds":
            r.status = "pass" if holds else "fail"
        elif expected == "fails":
            r.status = "pass" if v < -tol else "fail"
        elif expected == "boundary":
            r.status = "pass" if abs(v) <= tol else "fail"
        else:
            r.status = "info"
        r.notes = f"expected {expected or 'unspecified'}; J(nu)alpha + alpha^2 = {v:.6e}"
    return reps


@_register("example_values")
def _example_values(an, params):
    if not an.known:
        return []
    vals = an.geom.values()
    out = []
    for kv in an.known:
        measured = vals[kv.quantity]
        expected = kv.formula(an.points)
        reps = an.equality("example_values", measured, expected, an.tol.value(expected), notes=f"{kv.quantity}: {kv.anchor}")
        out.extend(reps)
    return out


@_register("frame_independence")
def _frame_independence(an, params):
    def scalars(a):
        g = a.geom
        return np.stack([a.grad_ht_sq, laplacian_frame(g, g.htilde_sq).value, a.v("H"), a.v("q"), a.hsq, a.v("ell")])

    return an.equality("frame_independence", scalars(an), scalars(an.alternate), an.tol.identity(an.hsq), notes="adapted versus rotated pivoting")


# ---------------------------------------------------------------------------
# Public point-level API
# ---------------------------------------------------------------------------


def _single(s: SurfaceDef, p, tol: Tolerances = Tolerances()) -> Analysis:
    return Analysis(s, np.atleast_2d(p), tol)


def check_simons_full(s: SurfaceDef, p, X=None, Y=None, tol: Tolerances = Tolerances()) -> CheckReport:
    """Full Simons identity at p for frame-coefficient vectors X, Y (all frame pairs if omitted)."""
    params = {}
    if X is not None:
        params["X"] = np.asarray(X, float)[None]
    if Y is not None:
        params["Y"] = np.asarray(Y, float)[None]
    return POINT_IMPL["simons_full"](_single(s, p, tol), params)[0]


def check_contracted_simons(s: SurfaceDef, p, tol: Tolerances = Tolerances()) -> CheckReport:
    return POINT_IMPL["simons_contracted"](_single(s, p, tol), {})[0]


def check_hhJ_identity_H2(s: SurfaceDef, p, tol: Tolerances = Tolerances()) -> tuple[CheckReport, CheckReport]:
    if s.n != 2:
        raise ValueError("the identity is specific to the second Heisenberg group (n = 2)")
    an = _single(s, p, tol)
    return POINT_IMPL["hhJ_identity_h2"](an, {})[0], POINT_IMPL["ell_bound_h2"](an, {})[0]


def check_kato(s: SurfaceDef, p, k: float, tol: Tolerances = Tolerances()) -> tuple[CheckReport, CheckReport]:
    """Trivial Kato report and the improved one at parameter k."""
    if not 0.0 <= k <= 2.0:
        raise ValueError(f"k = {k} outside [0, 2]")
    an = _single(s, p, tol)
    return POINT_IMPL["kato_trivial"](an, {})[0], POINT_IMPL["kato_improved"](an, {"k": [k]})[0]


def check_simons_kato(s: SurfaceDef, p, k: float, delta: float, tol: Tolerances = Tolerances()) -> CheckReport:
    if not 0.0 <= k <= 2.0:
        raise ValueError(f"k = {k} outside [0, 2]")
    if delta < 0:
        raise ValueError("delta must be non-negative")
    return POINT_IMPL["simons_kato"](_single(s, p, tol), {"simons_kato_k": [k], "delta": [delta]})[0]


def check_properties(entry: GalleryEntry | SurfaceDef, points, tol: Tolerances = Tolerances()) -> list[CheckReport]:
    if isinstance(entry, GalleryEntry):
        an = Analysis.from_entry(entry, points, tol)
    else:
        an = Analysis(entry, points, tol)
    return [r for name in ("property_p1", "property_p2", "property_p3") for r in POINT_IMPL[name](an, {})]


# ---------------------------------------------------------------------------
# Appendix criteria
# ---------------------------------------------------------------------------


def u_threshold(m):
    """u(m) = (3m - 6)/(6m - 4); exact for Fraction input."""
    return (3 * m - 6) / (6 * m - 4)


@dataclass(frozen=True)
class AppendixVerdict:
    m_ell: float
    omega: float
    k: float | None
    u: float
    case: str
    hypothesis: bool  # m <= 2/9 implies omega < u(m)
    exists_k: bool
    k_max: float
    k_admissible: bool | None


def _k_max(m: float, omega: float) -> float:
    """Largest k with g_(S,k,omega) >= 0 for every ell^2/|htilde|^2 in [m, 2/3]."""
    return min(9.0 / 8.0, (6.0 - omega * (2.0 - 3.0 * m)) / (4.0 + 2.0 * m), 2.0)


def appendix_criteria(m_ell: float, omega: float, k: float | None = None) -> AppendixVerdict:
    """Evaluate the threshold and the existence of an admissible k in (3/4, 2]."""
    if not 0.0 <= m_ell <= 2.0 / 3.0:
        raise ValueError("m_ell must lie in [0, 2/3]")
    if not 0.0 <= omega <= 2.0:
        raise ValueError("omega must lie in [0, 2]")
    if k is not None and not 0.75 < k <= 2.0:
        raise ValueError("k must lie in (3/4, 2]")
    u = u_threshold(m_ell) if m_ell != 2.0 / 3.0 else math.inf
    if omega <= 0.5:
        case = "omega <= 1/2"
    elif m_ell <= 2.0 / 9.0:
        case = "omega > 1/2, m <= 2/9"
    else:
        case = "m > 2/9"
    hypothesis = m_ell > 2.0 / 9.0 or omega < u
    kmax = _k_max(m_ell, omega)
    exists = kmax > 0.75
    return AppendixVerdict(m_ell, omega, k, u, case, hypothesis, exists, kmax, None if k is None else k <= kmax)


def brute_force_admissible(m: float, omega: float, k: float | None = None, step: float = 0.01) -> bool:
    """Grid search over x = ell^2/|htilde|^2 in [m, 2/3] and k in (3/4, 2].

    Without ``k`` the search also probes the open end k -> 3/4 with a strict
    inequality, since g decreases in k and any strictly positive minimum there
    extends to some k slightly above 3/4.
    """
    xs = np.unique(np.append(np.arange(m, 2.0 / 3.0, step), [m, 2.0 / 3.0]))
    if k is not None:
        return bool(np.all(g_sk(1.0, xs, k, omega) >= -1e-12))
    ks = np.arange(0.75 + step, 2.0 + 1e-12, step)
    grid = g_sk(1.0, xs[None, :], ks[:, None], omega)
    if np.any(np.all(grid >= 0, axis=1)):
        return True
    return bool(np.all(g_sk(1.0, xs, 0.75, omega) > 0))


# ---------------------------------------------------------------------------
# Global checks
# ---------------------------------------------------------------------------


def _global_report(check_id, lhs, rhs, residual, tol, ok, notes="", terms=None, margin=None, status=None) -> CheckReport:
    info = CATALOG[check_id]
    st = status or ("pass" if ok else "fail")
    return CheckReport(check_id, "ambient" if check_id.startswith("heis") or check_id.startswith("appendix") or check_id == "beta_window" else "experiment", None, float(lhs), float(rhs), float(residual), margin, float(tol), st, info.kind, info.anchor, notes, terms or {})


def _random_fields(calc: LocalCalculus, rng, count: int, horizontal: bool) -> Jet:
    """Random quadratic polynomial fields in frame coefficients."""
    d = calc.dim
    width = 2 * calc.n if horizontal else d
    x = calc.coords - calc.points.T  # centred coordinates
    quad_terms = [x[i] * x[j] for i in range(d) for j in range(i, d)]
    basis = [None] + [x[i] for i in range(d)] + quad_terms
    comps = []
    for _ in range(width):
        coeff = rng.normal(size=(len(basis), calc.batch))
        f = Jet.constant(calc.space, coeff[0])
        for c, b in zip(coeff[1:], basis[1:]):
            f = f + b * c
        comps.append(f)
    return stack(comps)


def _pad_T(v: Jet, zero: Jet) -> Jet:
    return stack([*(v[k] for k in range(v.shape[0])), zero])


def structure_suite(n: int, count: int, seed: int, tol: float) -> list[CheckReport]:
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-2.0, 2.0, size=(count, 2 * n + 1))
    calc = LocalCalculus(n, pts, 3)
    zero = Jet.constant(calc.space, np.zeros(count))
    d = 2 * n + 1
    out = []

    # constant-coefficient brackets against the structure constants
    worst = 0.0
    eye = np.eye(d)
    for i in range(d):
        for j in range(d):
            vi = stack([zero + eye[i, k] for k in range(d)])
            vj = stack([zero + eye[j, k] for k in range(d)])
            br = calc.lie_bracket(vi, vj).value
            expected = bracket_algebra(eye[i], eye[j])[:, None]
            worst = max(worst, float(np.abs(br - expected).max()))
    out.append(_global_report("heis_bracket", worst, 0.0, worst, tol, worst <= tol, f"n={n}, {count} points"))

    X = _random_fields(calc, rng, 1, True)
    Y = _random_fields(calc, rng, 1, True)
    Z = _random_fields(calc, rng, 1, True)
    XT, YT = _pad_T(X, zero), _pad_T(Y, zero)

    dXY = calc.connection(XT[None], Y)[0]
    dYX = calc.connection(YT[None], X)[0]
    br = calc.lie_bracket(XT, YT)
    jxy = (apply_J_jet(X) * Y).sum(0)
    hor = (dXY - dYX - stack([br[k] for k in range(2 * n)])).value
    tcomp = (-br[2 * n] - 2.0 * jxy).value
    res = float(max(np.abs(hor).max(), np.abs(tcomp).max()))
    out.append(_global_report("heis_torsion", res, 0.0, res, tol, res <= tol, f"n={n}, {count} random quadratic fields"))

    # flatness on general tangent fields X, Y
    XG = _random_fields(calc, rng, 1, False)
    YG = _random_fields(calc, rng, 1, False)
    dYZ = calc.connection(YG[None], Z)[0]
    dXZ = calc.connection(XG[None], Z)[0]
    first = calc.connection(XG[None], dYZ)[0]
    second = calc.connection(YG[None], dXZ)[0]
    brG = calc.lie_bracket(XG, YG)
    third = calc.connection(brG[None], Z)[0]
    res = float(np.abs((first - second - third).value).max())
    out.append(_global_report("heis_flatness", res, 0.0, res, tol, res <= tol, f"n={n}, {count} random quadratic fields"))

    res = float(np.abs((calc.connection(XG[None], apply_J_jet(Y))[0] - apply_J_jet(calc.connection(XG[None], Y)[0])).value).max())
    out.append(_global_report("heis_J_compat", res, 0.0, res, tol, res <= tol, f"n={n}, {count} random quadratic fields"))

    lhs = calc.along((Y * Z).sum(0), XG[None])[0]
    rhs = (calc.connection(XG[None], Y)[0] * Z).sum(0) + (Y * calc.connection(XG[None], Z)[0]).sum(0)
    res = float(np.abs((lhs - rhs).value).max())
    out.append(_global_report("heis_metric", res, 0.0, res, tol, res <= tol, f"n={n}, {count} random quadratic fields"))
    return out


def appendix_threshold_reports(tol: float) -> list[CheckReport]:
    out = []
    for m, expected in ((Fraction(0), Fraction(3, 2)), (Fraction(2, 9), Fraction(2))):
        exact = u_threshold(m)
        flt = u_threshold(float(m))
        ok = exact == expected and abs(flt - float(expected)) <= tol
        out.append(_global_report("appendix_u_threshold", float(exact), float(expected), abs(flt - float(expected)), tol, ok, f"u({m}) = {exact} (exact rational arithmetic)"))
    return out


def appendix_admissibility_reports(count: int, seed: int) -> list[CheckReport]:
    rng = np.random.default_rng(seed)
    mismatches_exist, mismatches_k = 0, 0
    cases: dict[str, int] = {}
    for _ in range(count):
        m = float(rng.uniform(0.0, 2.0 / 3.0))
        omega = float(rng.uniform(0.0, 2.0))
        k = 2.0 - float(rng.uniform(0.0, 1.25))  # (3/4, 2]
        verdict = appendix_criteria(m, omega, k)
        cases[verdict.case] = cases.get(verdict.case, 0) + 1
        if verdict.hypothesis != brute_force_admissible(m, omega):
            mismatches_exist += 1
        if verdict.k_admissible != brute_force_admissible(m, omega, k):
            mismatches_k += 1
    notes = f"{count} random (m, omega, k); cases " + ", ".join(f"{k}: {v}" for k, v in sorted(cases.items()))
    return [
        _global_report("appendix_admissibility", mismatches_exist, 0, mismatches_exist, 0, mismatches_exist == 0, "existence of k: " + notes),
        _global_report("appendix_admissibility", mismatches_k, 0, mismatches_k, 0, mismatches_k == 0, "admissibility of the drawn k: " + notes),
    ]


def beta_window_reports(n: int = 2) -> list[CheckReport]:
    """Window membership against a second route on a (k, beta) grid.

    The second route asks for a finite estimate constant when beta >= 1 (the
    Young splitting needs a positive leading coefficient) and for
    beta - 1 + k/(2n-1) >= 0 below 1.
    """
    bad = 0
    for k in np.linspace(0.05, 9.0 / 8.0, 23):
        c = k / (2 * n - 1)
        for beta in np.linspace(0.0, 2.5, 101):
            try:
                quad.validate_exponents(beta, k, n)
                accepted = True
            except ValueError:
                accepted = False
            if beta >= 1.0:
                second = math.isfinite(quad.estimate_constant(beta, k, n))
            else:
                second = beta - 1.0 + c >= 0.0
            bad += accepted != second
    out = [_global_report("beta_window", bad, 0, bad, 0, bad == 0, "23 x 101 grid of (k, beta); window versus estimate-constant finiteness")]
    for k, beta, expect in ((1.0, 1.0, True), (0.7, 1.6, False)):
        try:
            quad.validate_exponents(beta, k, n)
            got = True
        except ValueError:
            got = False
        out.append(_global_report("beta_window", float(got), float(expect), float(got != expect), 0, got == expect, f"k={k}, beta={beta}"))
    return out


def cutoff_reports(n: int, seed: int, radii=(1.0, 2.0, 4.0, 8.0), samples: int = 20000) -> list[CheckReport]:
    rng = np.random.default_rng(seed)
    center = rng.normal(size=2 * n + 1)
    fam = quad.CutoffFamily(center, tuple(radii))
    out = []
    worst = 0.0
    inner_ok = outer_ok = True
    for R in radii:
        scale = np.array([R] * (2 * n) + [R * R])
        pts = center + rng.uniform(-2.5, 2.5, size=(samples, 2 * n + 1)) * scale
        rel = group_mul(np.broadcast_to(inverse(center), pts.shape), pts)
        rho = koranyi_gauge(rel)
        val = fam.value(pts, R)
        inner_ok &= bool(np.all(val[rho <= R] == 1.0))
        outer_ok &= bool(np.all(val[rho >= 2 * R] == 0.0))
        grad = np.linalg.norm(fam.horizontal_gradient(pts, R), axis=1)
        worst = max(worst, float(np.max(grad) * R))
    ok = inner_ok and outer_ok and worst <= fam.bound * (1 + 1e-12)
    notes = f"R in {list(radii)}; phi = 1 inside: {inner_ok}; phi = 0 outside: {outer_ok}"
    out.append(_global_report("cutoff_gradient", worst, fam.bound, max(worst - fam.bound, 0.0), 0.0, ok, notes, margin=fam.bound - worst))
    return out


def volume_growth_reports(radii=(1.0, 2.0, 4.0, 8.0, 16.0), tol: float = 0.2) -> list[CheckReport]:
    out = []
    for n in (1, 2):
        s = gallery("vertical_hyperplane", n).surface
        center = np.zeros(2 * n + 1)
        center[n] = 0.3
        center[-1] = -0.2
        vg = quad.volume_growth_fit(s, center, radii)
        rel = max(e / v for e, v in zip(vg.errors, vg.measures))
        ok = abs(vg.exponent - (2 * n + 1)) <= tol and rel < 1e-3
        out.append(
            _global_report("volume_growth", vg.exponent, 2 * n + 1, abs(vg.exponent - (2 * n + 1)), tol, ok, f"vertical hyperplane, n={n}; worst relative mesh-halving change {rel:.1e}", {"measures": list(vg.measures)})
        )
    return out


def curvature_estimate_reports(beta: float = 1.0, k: float = 1.0, radii=(1.0, 2.0, 4.0, 8.0)) -> list[CheckReport]:
    s = gallery("vertical_hyperplane", 2).surface
    table = quad.curvature_estimate_experiment(s, np.zeros(5), beta, k, radii)
    out = []
    for row in table.rows:
        ok = row.lhs == 0.0 and row.margin >= 0
        out.append(
            _global_report(
                "curvature_estimate",
                row.lhs,
                row.rhs,
                abs(row.lhs),
                0.0,
                ok,
                f"vertical hyperplane, R={row.R:g}, beta={beta:g}, k={k:g}, constant {table.constant:.6g}",
                {"rhs_error": row.rhs_error},
                margin=row.margin,
            )
        )
    return out


def stability_reports() -> list[CheckReport]:
    out = []
    sv = gallery("vertical_hyperplane", 2).surface
    cut = quad.CutoffFamily(np.zeros(5))
    chart = quad.VerticalChart(2, (-2.0,) * 3 + (-4.0,), (2.0,) * 3 + (4.0,))
    quad.check_support(chart, cut, 1.0)
    res = quad.stability_ratio(sv, chart, quad.cutoff_bump(cut, 1.0))
    out.append(_global_report("stability_vertical", res.lhs, res.rhs, max(-res.margin, 0.0), res.rhs_error, res.lhs == 0.0 and res.margin >= 0, "bump of radius 1 at the origin", {"rhs_error": res.rhs_error}, margin=res.margin))

    sc = gallery("catenoid", 2, {"E": 1.0}).surface
    center = quad.default_center(sc)
    cc = quad.CutoffFamily(center)
    chc = quad.CatenoidChart(2, (0.0,) * 4, (1.0,) * 4, E=1.0).around(1.5, 0.25, 0.25)
    quad.check_support(chc, cc, 0.15)
    res = quad.stability_ratio(sc, chc, quad.cutoff_bump(cc, 0.15))
    out.append(
        _global_report(
            "stability_catenoid",
            res.lhs,
            res.rhs,
            max(-res.margin, 0.0),
            0.0,
            True,
            f"catenoid E=1, bump of radius 0.15; sign of rhs - lhs: {'+' if res.margin >= 0 else '-'} (not asserted)",
            {"lhs_error": res.lhs_error, "rhs_error": res.rhs_error},
            margin=res.margin,
            status="info",
        )
    )
    return out


def run_global_check(check_id: str, seed: int, tol: Tolerances, params: Mapping | None = None) -> list[CheckReport]:
    params = dict(params or {})
    if check_id.startswith("heis_"):
        count = int(params.get("structure_points", 1000))
        reps = []
        for n in (1, 2):
            reps += [r for r in structure_suite(n, count, seed + n, tol.scale * 1e-10) if r.check_id == check_id]
        return reps
    if check_id == "appendix_u_threshold":
        return appendix_threshold_reports(tol.scale * 1e-15)
    if check_id == "appendix_admissibility":
        return appendix_admissibility_reports(int(params.get("appendix_triples", 100)), seed)
    if check_id == "beta_window":
        return beta_window_reports()
    if check_id == "cutoff_gradient":
        return cutoff_reports(2, seed) + cutoff_reports(1, seed + 1)
    if check_id == "volume_growth":
        return volume_growth_reports(tuple(params.get("radii", (1.0, 2.0, 4.0, 8.0, 16.0))))
    if check_id == "curvature_estimate":
        return curvature_estimate_reports(float(params.get("beta", 1.0)), float(params.get("curvature_k", 1.0)))
    if check_id in ("stability_vertical", "stability_catenoid"):
        return [r for r in stability_reports() if r.check_id == check_id]
    raise KeyError(f"unknown global check '{check_id}'")


# ---------------------------------------------------------------------------
# Batch runner
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SurfaceJob:
    """One surface with its sampling plan; gallery entries are rebuilt where they run."""

    label: str
    surface: SurfaceDef
    region: object
    count: int
    seed: int
    gallery_id: str | None = None
    gallery_params: tuple = ()

    @classmethod
    def from_gallery(cls, gid: str, n: int, params: Mapping | None, count: int, seed: int, region=None) -> "SurfaceJob":
        entry = gallery(gid, n, dict(params or {}))
        return cls(entry.surface.label, entry.surface, region or entry.region, count, seed, gid, tuple(sorted(entry.params.items())))

    @property
    def entry(self) -> GalleryEntry | None:
        if self.gallery_id is None:
            return None
        return gallery(self.gallery_id, self.surface.n, dict(self.gallery_params))


def run_point_checks(job: SurfaceJob, check_ids: Sequence[str], tol: Tolerances, params: Mapping | None = None) -> list[CheckReport]:
    params = dict(params or {})
    points = sample_points(job.surface, job.region, job.count, job.seed)
    entry = job.entry
    if entry is not None:
        an = Analysis(job.surface, points, tol, label=job.label, expected=entry.expected_properties, known=entry.known, seed=job.seed)
    else:
        an = Analysis(job.surface, points, tol, label=job.label, seed=job.seed)
    out = []
    for cid in check_ids:
        hyps = CATALOG[cid].hypotheses
        if "n=2" in hyps and job.surface.n != 2:
            continue
        out.extend(POINT_IMPL[cid](an, params))
    return out


def _job_worker(args):
    job, ids, tol, params = args
    return run_point_checks(job, ids, tol, params)


def _global_worker(args):
    cid, seed, tol, params = args
    return run_global_check(cid, seed, tol, params)


def run_batch(jobs: Sequence[SurfaceJob], check_ids: Sequence[str], seed: int, tol: Tolerances = Tolerances(), params: Mapping | None = None, workers: int = 1) -> list[CheckReport]:
    """Run the selected checks; output order depends only on the inputs."""
    unknown = [c for c in check_ids if c not in CATALOG]
    if unknown:
        raise KeyError(f"unknown check ids: {', '.join(unknown)}")
    point_ids = [c for c in check_ids if CATALOG[c].scope == "point"]
    global_ids = [c for c in check_ids if CATALOG[c].scope == "global"]
    tasks = [(job, point_ids, tol, dict(params or {})) for job in jobs] if point_ids else []
    gtasks = [(cid, seed, tol, dict(params or {})) for cid in global_ids]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_job_worker, tasks)) + list(pool.map(_global_worker, gtasks))
    else:
        results = [_job_worker(t) for t in tasks] + [_global_worker(t) for t in gtasks]
    return [r for chunk in results for r in chunk]
