"""Level-set surfaces: definitions, exact jets, the example gallery and sampling."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy import integrate

from . import dsl
from .heis_core import LocalCalculus
from .jets import Jet, jet_space

MAX_ORDER = 4


class DomainError(ValueError):
    """A point lies outside the domain of a surface's defining expression."""


class SamplingError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Catenoid profile
# ---------------------------------------------------------------------------


def catenoid_neck(E: float, n: int) -> float:
    return E ** (1.0 / (2 * n - 1))


def catenoid_slope(s, E: float, n: int):
    """t_E'(s) = E s / sqrt(s^(4n-2) - E^2); works on arrays and jets."""
    return E * s * (s ** (4 * n - 2) - E * E).power(-0.5) if isinstance(s, Jet) else E * s / np.sqrt(s ** (4 * n - 2) - E * E)


@functools.lru_cache(maxsize=65536)
def _catenoid_height_scalar(s: float, E: float, n: int) -> float:
    s0 = catenoid_neck(E, n)
    if s <= s0:
        return 0.0
    k = 2 * n - 1
    powers = np.arange(k)

    # tau = s0 + w^2 removes the inverse square-root singularity at the neck
    def integrand(w):
        tau = s0 + w * w
        ratio = np.sum(tau**powers * s0 ** (k - 1 - powers))
        return 2.0 * E * tau / math.sqrt(ratio * (tau**k + E))

    val, _ = integrate.quad(integrand, 0.0, math.sqrt(s - s0), epsabs=1e-14, epsrel=1e-13, limit=200)
    return val


def catenoid_height(s, E: float, n: int) -> np.ndarray:
    """t_E(s) as the integral of the slope from the neck radius E^(1/(2n-1))."""
    s = np.asarray(s, dtype=float)
    s0 = catenoid_neck(E, n)
    if np.any(s < s0):
        raise DomainError(f"catenoid profile needs |z| >= {s0:.6g}")
    flat = s.ravel()
    out = np.array([_catenoid_height_scalar(float(v), float(E), int(n)) for v in flat])
    return out.reshape(s.shape)


def _catenoid_profile(params, arg):
    E, n = params[0], int(params[1])
    if not isinstance(arg, Jet):
        return catenoid_height(arg, E, n)
    s0 = arg.value
    if np.any(s0 <= catenoid_neck(E, n)):
        raise DomainError(f"catenoid profile jets need |z| > {catenoid_neck(E, n):.6g}")
    m = arg.order
    coeffs = [catenoid_height(s0, E, n)]
    if m >= 1:
        line = jet_space(1, m - 1)
        sigma = Jet.variables(line, s0.reshape(-1, 1))[0].reshape(s0.shape)
        slope = catenoid_slope(sigma, E, n)
        for j in range(m):
            coeffs.append(slope.c[j] / (j + 1))
    return arg.compose(coeffs)


PROFILES: dict[str, Callable] = {"catenoid": _catenoid_profile}


# ---------------------------------------------------------------------------
# Surface definitions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SurfaceDef:
    """The level set {u = 0} of ``orientation * expr``; nu points toward u > 0."""

    n: int
    expr: object
    orientation: int = 1
    id: str = "user"
    params: tuple = ()

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        unknown = dsl.symbols(self.expr) - set(dsl.coordinate_names(self.n))
        if unknown:
            raise dsl.DSLError(f"unknown symbols for n={self.n}: {sorted(unknown)}")

    @classmethod
    def from_text(cls, text: str, n: int, orientation: int = 1, id: str = "user") -> "SurfaceDef":
        return cls(n, dsl.parse(text), orientation, id)

    @property
    def text(self) -> str:
        return dsl.to_text(self.expr)

    @property
    def label(self) -> str:
        extra = ",".join(f"{k}={v:g}" for k, v in self.params)
        return f"{self.id}[n={self.n}{',' + extra if extra else ''}]"

    def _env(self, coords) -> dict:
        names = dsl.coordinate_names(self.n)
        return {name: coords[i] for i, name in enumerate(names)}

    def evaluate(self, coords):
        """u on coordinates given with the coordinate index first (arrays or jets)."""
        out = dsl.evaluate(self.expr, self._env(coords), PROFILES)
        if isinstance(out, Jet):
            return out * float(self.orientation)
        return self.orientation * np.broadcast_to(np.asarray(out, dtype=float), np.shape(coords[0])).astype(float)

    def value(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return self.evaluate(points.T)

    def jet(self, points, order: int) -> Jet:
        calc = LocalCalculus(self.n, points, order)
        return self.jet_on(calc)

    def jet_on(self, calc: LocalCalculus) -> Jet:
        u = self.evaluate(calc.coords)
        if not isinstance(u, Jet):
            u = Jet.constant(calc.space, np.broadcast_to(u, (calc.batch,)))
        return u


def eval_jet(s: SurfaceDef, p, order: int = MAX_ORDER) -> Jet:
    """Exact Taylor jet of u at one point or a batch of points.

    Use ``.partials(k)`` on the result for the symmetric k-th derivative tensor.
    """
    if not 1 <= order <= MAX_ORDER:
        raise ValueError(f"jet order must be in 1..{MAX_ORDER}")
    if np.shape(p)[-1] != 2 * s.n + 1:
        raise ValueError("point dimension does not match the surface")
    return s.jet(np.atleast_2d(p), order)


def coordinate_gradient(s: SurfaceDef, points) -> tuple[np.ndarray, np.ndarray]:
    j = s.jet(points, 1)
    return j.value, np.stack([j.c[i] for i in j.space.unit_index], axis=-1)


def horizontal_gradient(s: SurfaceDef, points) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (u, horizontal gradient (B, 2n), full coordinate gradient (B, 2n+1))."""
    u, grad = coordinate_gradient(s, points)
    n = s.n
    points = np.atleast_2d(points)
    x, y = points[:, :n], points[:, n : 2 * n]
    dt = grad[:, -1:]
    gh = np.concatenate([grad[:, :n] + y * dt, grad[:, n : 2 * n] - x * dt], axis=1)
    return u, gh, grad


def is_characteristic(s: SurfaceDef, p, tol: float = 1e-8, on_surface_tol: float = 1e-8) -> bool:
    """True iff |grad_H u| <= tol |grad u| at a point of the surface."""
    u, gh, grad = horizontal_gradient(s, np.atleast_2d(p))
    if abs(u[0]) > on_surface_tol * max(1.0, np.linalg.norm(grad[0])):
        raise ValueError(f"point is not on the surface (u = {u[0]:.3e})")
    return bool(np.linalg.norm(gh[0]) <= tol * np.linalg.norm(grad[0]))


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Region:
    """Candidate region: a coordinate box or a Koranyi annulus about the origin.

    ``z_band`` optionally restricts |z| to an interval.
    """

    kind: str = "box"
    lo: tuple = ()
    hi: tuple = ()
    r_in: float = 0.0
    r_out: float = 1.0
    z_band: tuple | None = None

    def draw(self, rng: np.random.Generator, count: int, n: int) -> np.ndarray:
        d = 2 * n + 1
        if self.kind == "box":
            lo = np.broadcast_to(np.asarray(self.lo, dtype=float), (d,))
            hi = np.broadcast_to(np.asarray(self.hi, dtype=float), (d,))
            return lo + (hi - lo) * rng.random((count, d))
        if self.kind == "annulus":
            r = self.r_out
            lo = np.array([-r] * (2 * n) + [-r * r])
            pts = lo + 2 * (-lo) * rng.random((count, d))
            return pts
        raise ValueError(f"unknown region kind '{self.kind}'")

    def accepts(self, points: np.ndarray, n: int) -> np.ndarray:
        ok = np.ones(len(points), dtype=bool)
        if self.kind == "annulus":
            from .heis_core import koranyi_gauge

            g = koranyi_gauge(points)
            ok &= (g >= self.r_in) & (g <= self.r_out)
        if self.z_band is not None:
            rz = np.sqrt(np.sum(points[:, : 2 * n] ** 2, axis=1))
            ok &= (rz >= self.z_band[0]) & (rz <= self.z_band[1])
        return ok


def newton_project(s: SurfaceDef, points, max_iter: int = 50, tol: float = 1e-12):
    """Damped Newton along the coordinate gradient of u; returns (points, converged)."""
    p = np.array(np.atleast_2d(points), dtype=float)
    done = np.zeros(len(p), dtype=bool)
    alive = np.ones(len(p), dtype=bool)
    for _ in range(max_iter + 1):
        idx = np.flatnonzero(alive & ~done)
        if idx.size == 0:
            break
        try:
            u, grad = coordinate_gradient(s, p[idx])
        except DomainError:
            u, grad = _pointwise_gradient(s, p[idx])
        bad = ~np.isfinite(u) | ~np.all(np.isfinite(grad), axis=1)
        alive[idx[bad]] = False
        good = ~bad
        conv = good & (np.abs(u) <= tol)
        done[idx[conv]] = True
        act = good & ~conv
        if not np.any(act):
            continue
        ia, ua, ga = idx[act], u[act], grad[act]
        step = (ua / np.sum(ga * ga, axis=1))[:, None] * ga
        lam = np.ones(len(ia))
        for _ in range(30):
            trial = p[ia] - lam[:, None] * step
            ut = _safe_values(s, trial)
            better = np.isfinite(ut) & (np.abs(ut) < np.abs(ua))
            if np.all(better):
                break
            lam = np.where(better, lam, 0.5 * lam)
        p[ia] = p[ia] - lam[:, None] * step
    return p, done & alive


def _safe_values(s: SurfaceDef, pts: np.ndarray) -> np.ndarray:
    try:
        return s.value(pts)
    except DomainError:
        out = np.full(len(pts), np.nan)
        for i, q in enumerate(pts):
            try:
                out[i] = s.value(q[None])[0]
            except DomainError:
                pass
        return out


def _pointwise_gradient(s: SurfaceDef, pts: np.ndarray):
    u = np.full(len(pts), np.nan)
    g = np.full(pts.shape, np.nan)
    for i, q in enumerate(pts):
        try:
            ui, gi = coordinate_gradient(s, q[None])
            u[i], g[i] = ui[0], gi[0]
        except DomainError:
            pass
    return u, g


def sample_points(
    s: SurfaceDef,
    region: Region,
    count: int,
    seed: int,
    char_tol: float = 1e-8,
    max_rounds: int = 50,
) -> np.ndarray:
    """Seeded points on {u = 0}, projected by Newton and filtered for non-characteristic ones."""
    rng = np.random.default_rng(seed)
    kept: list[np.ndarray] = []
    total = 0
    saw_converged = False
    for _ in range(max_rounds):
        cand = region.draw(rng, max(2 * count, 16), s.n)
        cand = cand[region.accepts(cand, s.n) | (region.kind == "annulus")]
        proj, ok = newton_project(s, cand)
        proj = proj[ok]
        saw_converged |= len(proj) > 0
        proj = proj[region.accepts(proj, s.n)]
        if len(proj):
            _, gh, grad = horizontal_gradient(s, proj)
            nonchar = np.linalg.norm(gh, axis=1) > char_tol * np.linalg.norm(grad, axis=1)
            proj = proj[nonchar]
        for q in proj:
            if total < count:
                kept.append(q)
                total += 1
        if total >= count:
            break
    if total < count:
        if not saw_converged:
            raise SamplingError("Newton projection did not converge for any candidate")
        raise SamplingError(f"only {total} of {count} admissible points found")
    return np.array(kept)


# ---------------------------------------------------------------------------
# Gallery
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KnownValue:
    """A closed-form expectation for a measured quantity at surface points."""

    quantity: str
    anchor: str
    formula: Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class GalleryEntry:
    surface: SurfaceDef
    params: Mapping[str, float]
    known: tuple[KnownValue, ...]
    region: Region
    expected_properties: Mapping[str, str] = field(default_factory=dict)
    notes: str = ""


GALLERY_IDS = ("vertical_hyperplane", "horizontal_plane", "hyperbolic_paraboloid", "catenoid", "helicoid")


def _sum_expr(terms: list) -> object:
    return terms[0] if len(terms) == 1 else dsl.Node("+", tuple(terms))


def _z_squared(n: int):
    return _sum_expr([dsl.Node("*", (f"{c}{j + 1}", f"{c}{j + 1}")) for c in "xy" for j in range(n)])


def _zsq(p, n):
    return np.sum(p[:, : 2 * n] ** 2, axis=1)


def gallery(id: str, n: int = 2, params: Mapping[str, float] | None = None) -> GalleryEntry:
    """Example surfaces with their closed-form invariants."""
    params = dict(params or {})
    d = 2 * n + 1
    if n < 1:
        raise ValueError("n must be a positive integer")
    if id == "vertical_hyperplane":
        s = SurfaceDef(n, "x1", 1, id)
        zero = lambda p: np.zeros(len(p))  # noqa: E731
        known = (
            KnownValue("alpha", "alpha = 0 on vertical hyperplanes", zero),
            KnownValue("htilde_sq", "htilde = 0 on vertical hyperplanes", zero),
            KnownValue("q", "q = 0 on vertical hyperplanes", zero),
            KnownValue("jnu_nu_norm", "grad_{J(nu)} nu = 0 on vertical hyperplanes", zero),
            KnownValue("p3", "J(nu)alpha + alpha^2 = 0 on vertical hyperplanes", zero),
        )
        region = Region("box", (-1.5,) * d, (1.5,) * d)
        props = {"P1": "holds", "P2": "holds", "P3": "holds"}
        return GalleryEntry(s, params, known, region, props)

    if id == "horizontal_plane":
        s = SurfaceDef(n, "t", 1, id)
        known = (
            KnownValue("alpha", "alpha = 1/|z| on the horizontal plane", lambda p: 1.0 / np.sqrt(_zsq(p, n))),
            KnownValue("p3", "J(nu)alpha + alpha^2 = 0 off the origin", lambda p: np.zeros(len(p))),
        )
        region = Region("annulus", r_in=0.4, r_out=2.0)
        props = {"P1": "holds", "P2": "holds", "P3": "boundary"}
        return GalleryEntry(s, params, known, region, props)

    if id == "hyperbolic_paraboloid":
        xy = _sum_expr([dsl.Node("*", (f"x{j + 1}", f"y{j + 1}")) for j in range(n)])
        s = SurfaceDef(n, dsl.Node("-", ("t", xy)), 1, id)
        known = (
            KnownValue(
                "p3",
                "J(nu)alpha + alpha^2 = -1/(4 sum x_j^2)",
                lambda p: -1.0 / (4.0 * np.sum(p[:, :n] ** 2, axis=1)),
            ),
            KnownValue("jnu_nu_norm", "grad_{J(nu)} nu = 0 off x = 0", lambda p: np.zeros(len(p))),
        )
        lo = (0.3,) * n + (-1.0,) * n + (-2.0,)
        hi = (1.2,) * n + (1.0,) * n + (2.0,)
        region = Region("box", lo, hi)
        props = {"P1": "holds", "P2": "holds", "P3": "fails"}
        return GalleryEntry(s, params, known, region, props, "characteristic set is {x = 0}")

    if id == "catenoid":
        E = float(params.setdefault("E", 1.0))
        if not E > 0:
            raise ValueError("catenoid needs E > 0")
        if n < 1:
            raise ValueError("catenoid needs n >= 1")
        radius = dsl.Node("sqrt", (_z_squared(n),))
        prof = dsl.Node("profile", (radius,), ("catenoid", E, float(n)))
        s = SurfaceDef(n, dsl.Node("-", ("t", prof)), -1, id, (("E", E),))
        s0 = catenoid_neck(E, n)
        known = [
            KnownValue(
                "jnu_nu_coeff",
                "grad_{J(nu)} nu = -(2n-2)E|z|^-2n J(nu), i.e. -2E|z|^-4 J(nu) for n = 2",
                lambda p: -(2.0 * n - 2.0) * E / _zsq(p, n) ** n,
            ),
        ]
        if n == 2:
            known += [
                KnownValue("ell_sq", "ell^2 = 4E^2|z|^-8", lambda p: 4.0 * E * E / _zsq(p, n) ** 4),
                KnownValue("htilde_sq", "2|htilde|^2 = 3 ell^2, so |htilde|^2 = 6E^2|z|^-8", lambda p: 6.0 * E * E / _zsq(p, n) ** 4),
                KnownValue("p3", "J(nu)alpha + alpha^2 = 3E^2|z|^-8", lambda p: 3.0 * E * E / _zsq(p, n) ** 4),
            ]
        lo = (-2.4 * s0,) * (2 * n) + (0.0,)
        hi = (2.4 * s0,) * (2 * n) + (2.0 * s0,)
        region = Region("box", lo, hi, z_band=(1.15 * s0, 2.4 * s0))
        props = {"P1": "holds", "P2": "holds", "P3": "holds"}
        return GalleryEntry(s, params, tuple(known), region, props, "upper branch t = t_E(|z|)")

    if id == "helicoid":
        expr = dsl.parse("(- (* x1 (sin t)) (* y1 (cos t)))")
        s = SurfaceDef(n, expr, 1, id)

        def p3(p):
            x1, y1, t = p[:, 0], p[:, n], p[:, -1]
            radial = x1 * np.cos(t) + y1 * np.sin(t)
            extra = np.sum(p[:, 1:n] ** 2, axis=1) + np.sum(p[:, n + 1 : 2 * n] ** 2, axis=1)
            a = 1.0 + radial**2
            return (a / (a * a + radial**2 * extra)) ** 2

        known = (
            KnownValue(
                "p3",
                "J(nu)alpha + alpha^2 = ((1+s^2)/((1+s^2)^2 + s^2 sum_{j>=2}(xi_j^2+eta_j^2)))^2",
                p3,
            ),
        )
        lo = (-1.5,) + (-1.0,) * (n - 1) + (-1.5,) + (-1.0,) * (n - 1) + (-1.5,)
        hi = tuple(-v for v in lo)
        region = Region("box", lo, hi)
        props = {"P3": "holds"}
        return GalleryEntry(s, params, known, region, props)

    raise ValueError(f"unknown gallery id '{id}'; expected one of {', '.join(GALLERY_IDS)}")
