"""Surface integrals for the sub-Riemannian measure and the integral experiments.

Charts map a parameter box onto a patch of a gallery surface.  The measure
density in parameter space is the horizontal length of the cofactor vector of
the chart Jacobian written in the left-invariant frame, which equals
``|N^H|`` times the Riemannian area element.  Integrals use composite tensor
Gauss-Legendre rules; the error estimate compares the mesh with its halving.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .extrinsic import SurfaceGeometry
from .heis_core import group_mul, inverse, koranyi_gauge
from .surface_defs import (
    SurfaceDef,
    catenoid_height,
    catenoid_neck,
    horizontal_gradient,
)

CHUNK = 4096


class ChartError(ValueError):
    pass


class SupportError(ValueError):
    """A compactly supported integrand reaches the boundary of the chart box."""


# ---------------------------------------------------------------------------
# Charts
# ---------------------------------------------------------------------------


def sigma_density(points: np.ndarray, jac: np.ndarray) -> np.ndarray:
    """|N^H| dA in parameter space from the coordinate Jacobian (B, 2n+1, 2n)."""
    n = (points.shape[1] - 1) // 2
    x, y = points[:, :n], points[:, n : 2 * n]
    twist = np.concatenate([y, -x], axis=1)
    frame_jac = jac.copy()
    frame_jac[:, 2 * n, :] -= np.einsum("bk,bki->bi", twist, jac[:, : 2 * n, :])
    d = 2 * n + 1
    cof = np.empty((len(points), 2 * n))
    for k in range(2 * n):
        rows = [r for r in range(d) if r != k]
        cof[:, k] = (-1) ** k * np.linalg.det(frame_jac[:, rows, :])
    return np.linalg.norm(cof, axis=1)


@dataclass(frozen=True)
class PatchChart:
    """A parametrized patch over the box ``[lo, hi]`` of R^{2n}."""

    n: int
    lo: tuple
    hi: tuple

    def map(self, params: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def jacobian(self, params: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def with_box(self, lo, hi) -> "PatchChart":
        return replace(self, lo=tuple(map(float, lo)), hi=tuple(map(float, hi)))

    def density(self, params: np.ndarray) -> np.ndarray:
        jac = self.jacobian(params)
        if np.any(np.linalg.det(np.einsum("bki,bkj->bij", jac, jac)) <= 0):
            raise ChartError("degenerate chart Jacobian")
        return sigma_density(self.map(params), jac)

    def boundary_axes(self) -> tuple:
        """Parameters whose box faces are genuine edges of the patch."""
        return tuple(range(len(self.lo)))


@dataclass(frozen=True)
class VerticalChart(PatchChart):
    """u = x_1, parametrized by (x_2..x_n, y_1..y_n, t)."""

    def map(self, params):
        params = np.atleast_2d(params)
        zero = np.zeros((len(params), 1))
        return np.concatenate([zero, params], axis=1)

    def jacobian(self, params):
        params = np.atleast_2d(params)
        d = 2 * self.n + 1
        jac = np.zeros((len(params), d, d - 1))
        jac[:, 1:, :] = np.eye(d - 1)
        return jac


@dataclass(frozen=True)
class ParaboloidChart(PatchChart):
    """Graph t = sum x_j y_j over (x, y)."""

    def map(self, params):
        params = np.atleast_2d(params)
        n = self.n
        t = np.sum(params[:, :n] * params[:, n:], axis=1, keepdims=True)
        return np.concatenate([params, t], axis=1)

    def jacobian(self, params):
        params = np.atleast_2d(params)
        n = self.n
        jac = np.zeros((len(params), 2 * n + 1, 2 * n))
        jac[:, : 2 * n, :] = np.eye(2 * n)
        jac[:, 2 * n, :n] = params[:, n:]
        jac[:, 2 * n, n:] = params[:, :n]
        return jac


def _sphere(angles: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Hyperspherical unit vector and its angle derivatives, (B, d) and (B, d, d-1)."""
    b, k = angles.shape
    d = k + 1
    s, c = np.sin(angles), np.cos(angles)
    out = np.ones((b, d))
    for i in range(k):
        out[:, i] *= c[:, i]
        out[:, i + 1 :] *= s[:, i : i + 1]
    deriv = np.zeros((b, d, k))
    for j in range(k):
        # d/d angle_j: components i < j unaffected, i == j: -sin, i > j: cos factor
        for i in range(d):
            if i < j:
                continue
            term = np.ones(b)
            for a in range(min(i, k)):
                term = term * (c[:, j] if a == j else s[:, a])
            if i < k:
                term = term * (-s[:, i] if i == j else c[:, i])
            deriv[:, i, j] = term
    return out, deriv


@dataclass(frozen=True)
class CatenoidChart(PatchChart):
    """Upper branch through sigma > 0: |z| = s0 + sigma^2, t = t_E(|z|).

    Remaining parameters are hyperspherical angles of z; the last one spans
    [0, 2 pi], the others [0, pi].  The substitution keeps dt/dsigma finite
    at the neck.
    """

    E: float = 1.0

    def _radius(self, sigma):
        s0 = catenoid_neck(self.E, self.n)
        return s0, s0 + sigma * sigma

    def map(self, params):
        params = np.atleast_2d(params)
        _, r = self._radius(params[:, 0])
        unit, _ = _sphere(params[:, 1:])
        t = catenoid_height(r, self.E, self.n)
        return np.concatenate([r[:, None] * unit, t[:, None]], axis=1)

    def jacobian(self, params):
        params = np.atleast_2d(params)
        sigma = params[:, 0]
        s0, r = self._radius(sigma)
        k = 2 * self.n - 1
        powers = np.arange(k)
        ratio = np.sum(r[:, None] ** powers * s0 ** (k - 1 - powers), axis=1)
        dt = 2.0 * self.E * r / np.sqrt(ratio * (r**k + self.E))
        unit, dunit = _sphere(params[:, 1:])
        jac = np.zeros((len(params), 2 * self.n + 1, 2 * self.n))
        jac[:, : 2 * self.n, 0] = 2.0 * sigma[:, None] * unit
        jac[:, : 2 * self.n, 1:] = r[:, None, None] * dunit
        jac[:, 2 * self.n, 0] = dt
        return jac

    def around(self, radius: float, half_sigma: float, half_angle: float) -> "CatenoidChart":
        """Box about the point with |z| = radius and every angle pi/2 (z along the last axis)."""
        s0 = catenoid_neck(self.E, self.n)
        sc = math.sqrt(radius - s0)
        k = 2 * self.n - 1
        lo = (max(sc - half_sigma, 1e-9),) + (math.pi / 2 - half_angle,) * k
        hi = (sc + half_sigma,) + (math.pi / 2 + half_angle,) * k
        return self.with_box(lo, hi)


@dataclass(frozen=True)
class HelicoidChart(PatchChart):
    """(s, theta, xi_2..xi_n, eta_2..eta_n) -> (s cos theta, xi, s sin theta, eta, theta)."""

    def map(self, params):
        params = np.atleast_2d(params)
        n = self.n
        s, th = params[:, 0], params[:, 1]
        xi, eta = params[:, 2 : n + 1], params[:, n + 1 :]
        return np.concatenate([(s * np.cos(th))[:, None], xi, (s * np.sin(th))[:, None], eta, th[:, None]], axis=1)

    def jacobian(self, params):
        params = np.atleast_2d(params)
        n = self.n
        s, th = params[:, 0], params[:, 1]
        jac = np.zeros((len(params), 2 * n + 1, 2 * n))
        jac[:, 0, 0], jac[:, 0, 1] = np.cos(th), -s * np.sin(th)
        jac[:, n, 0], jac[:, n, 1] = np.sin(th), s * np.cos(th)
        jac[:, 2 * n, 1] = 1.0
        for j in range(1, n):
            jac[:, j, 1 + j] = 1.0
            jac[:, n + j, n + j] = 1.0
        return jac


def chart_for(s: SurfaceDef) -> PatchChart:
    """Default chart class for a gallery surface (box to be set by the caller)."""
    n = s.n
    unit = ((0.0,) * (2 * n), (1.0,) * (2 * n))
    if s.id == "vertical_hyperplane":
        return VerticalChart(n, *unit)
    if s.id == "hyperbolic_paraboloid":
        return ParaboloidChart(n, *unit)
    if s.id == "catenoid":
        return CatenoidChart(n, *unit, E=dict(s.params)["E"])
    if s.id == "helicoid":
        return HelicoidChart(n, *unit)
    raise ChartError(f"no chart for surface '{s.id}'")


# ---------------------------------------------------------------------------
# Gauss-Legendre integration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error: float
    coarse: float
    nodes: int


def _tensor_rule(lo, hi, cells: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    axes, weights = [], []
    for a, b in zip(lo, hi):
        edges = np.linspace(a, b, cells + 1)
        half = np.diff(edges) / 2
        mid = (edges[:-1] + edges[1:]) / 2
        axes.append((mid[:, None] + half[:, None] * x[None]).ravel())
        weights.append((half[:, None] * w[None]).ravel())
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(lo))
    wgrid = weights[0]
    for w1 in weights[1:]:
        wgrid = np.multiply.outer(wgrid, w1).ravel()
    return grid, wgrid


def _pairwise_sum(values: np.ndarray) -> float:
    # numpy's float reduction is pairwise and deterministic for a fixed length
    return float(np.sum(values))


def integrate_box(f: Callable[[np.ndarray], np.ndarray], lo, hi, cells: int = 4, order: int = 6) -> QuadratureResult:
    """Integrate f over a box; error estimated from the mesh with half the cells."""
    if cells < 2 or cells % 2:
        raise ValueError("cells must be an even integer >= 2")

    def rule(c):
        nodes, w = _tensor_rule(lo, hi, c, order)
        vals = np.concatenate([np.asarray(f(nodes[i : i + CHUNK]), float) for i in range(0, len(nodes), CHUNK)])
        return _pairwise_sum(vals * w), len(nodes)

    fine, count = rule(cells)
    coarse, _ = rule(cells // 2)
    return QuadratureResult(fine, abs(fine - coarse), coarse, count)


def integrate_sigmaH(chart: PatchChart, f, cells: int = 4, order: int = 6) -> QuadratureResult:
    """Integral of f over the chart patch against the sub-Riemannian measure.

    ``f`` receives surface points (B, 2n+1) and returns values (B,); a number
    is treated as a constant integrand.
    """
    func = f if callable(f) else (lambda pts, c=float(f): np.full(len(pts), c))

    def integrand(params):
        return func(chart.map(params)) * chart.density(params)

    return integrate_box(integrand, chart.lo, chart.hi, cells, order)


# ---------------------------------------------------------------------------
# Cutoff functions of the Koranyi gauge
# ---------------------------------------------------------------------------


def _smoothstep(x):
    return x**3 * (10.0 - 15.0 * x + 6.0 * x * x)


def _smoothstep_slope(x):
    return 30.0 * x * x * (1.0 - x) ** 2


STEP_SLOPE_MAX = 1.875  # max of the quintic step derivative, attained at 1/2


def gauge_horizontal_gradient(points: np.ndarray) -> np.ndarray:
    """Horizontal gradient (X_j rho, Y_j rho) of the Koranyi gauge, (B, 2n)."""
    points = np.atleast_2d(points)
    n = (points.shape[1] - 1) // 2
    x, y, t = points[:, :n], points[:, n : 2 * n], points[:, 2 * n]
    z2 = np.sum(x * x + y * y, axis=1)
    rho3 = koranyi_gauge(points) ** 3
    rho3 = np.where(rho3 > 0, rho3, np.inf)
    gx = (z2[:, None] * x + 0.5 * t[:, None] * y) / rho3[:, None]
    gy = (z2[:, None] * y - 0.5 * t[:, None] * x) / rho3[:, None]
    return np.concatenate([gx, gy], axis=1)


@dataclass(frozen=True)
class CutoffFamily:
    """phi_R(q) = chi(rho(p^-1 q) / R) with chi = 1 on [0, 1], 0 on [2, inf).

    The transition is the quintic smoothstep, C^2 at both ends; with
    ``|grad_H rho| <= 1`` this gives ``|grad_H phi_R| <= bound / R``.
    """

    center: np.ndarray
    radii: tuple = (1.0, 2.0, 4.0, 8.0)
    bound: float = STEP_SLOPE_MAX

    def _relative(self, points):
        points = np.atleast_2d(points)
        return group_mul(np.broadcast_to(inverse(self.center), points.shape), points)

    def value(self, points, R: float) -> np.ndarray:
        s = koranyi_gauge(self._relative(points)) / R
        return 1.0 - _smoothstep(np.clip(s - 1.0, 0.0, 1.0))

    def horizontal_gradient(self, points, R: float) -> np.ndarray:
        """grad_H phi_R; left-invariance lets the gauge gradient be taken at p^-1 q."""
        rel = self._relative(points)
        s = koranyi_gauge(rel) / R
        slope = -_smoothstep_slope(np.clip(s - 1.0, 0.0, 1.0)) / R
        return slope[:, None] * gauge_horizontal_gradient(rel)

    def support_radius(self, R: float) -> float:
        return 2.0 * R


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------


def _tangential_gradient(s: SurfaceDef, points: np.ndarray, grad_h: np.ndarray) -> np.ndarray:
    _, gh, _ = horizontal_gradient(s, points)
    nu = gh / np.linalg.norm(gh, axis=1, keepdims=True)
    return grad_h - np.sum(grad_h * nu, axis=1, keepdims=True) * nu


def _geometry_values(s: SurfaceDef, points: np.ndarray, names: Sequence[str]) -> dict[str, np.ndarray]:
    out = {k: [] for k in names}
    for i in range(0, len(points), CHUNK):
        g = SurfaceGeometry(s, points[i : i + CHUNK], order=2)
        vals = g.values()
        for k in names:
            out[k].append(vals[k])
    return {k: np.concatenate(v) if v else np.zeros(0) for k, v in out.items()}


def check_support(chart: PatchChart, cutoff: CutoffFamily, R: float, samples: int = 9) -> None:
    """Raise SupportError if the cutoff is non-zero anywhere on the chart boundary."""
    d = len(chart.lo)
    axes = [np.linspace(a, b, samples) for a, b in zip(chart.lo, chart.hi)]
    for k in chart.boundary_axes():
        for end in (chart.lo[k], chart.hi[k]):
            grids = [axes[i] if i != k else np.array([end]) for i in range(d)]
            face = np.stack(np.meshgrid(*grids, indexing="ij"), axis=-1).reshape(-1, d)
            if np.any(cutoff.value(chart.map(face), R) > 0):
                raise SupportError(f"cutoff of radius {R} reaches the chart boundary (parameter {k})")


@dataclass(frozen=True)
class StabilityResult:
    lhs: float
    rhs: float
    lhs_error: float
    rhs_error: float

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


def stability_ratio(s: SurfaceDef, chart: PatchChart, xi: Callable | None, cells: int = 4, order: int = 4) -> StabilityResult:
    """Both sides of the stability inequality: int q xi^2 and int |grad_{H,S} xi|^2.

    ``xi`` returns ``(values, horizontal gradients)`` at surface points, or is
    None for the zero function.
    """
    if xi is None:
        return StabilityResult(0.0, 0.0, 0.0, 0.0)

    def lhs(points):
        val, _ = xi(points)
        out = np.zeros(len(points))
        live = val != 0
        if np.any(live):
            out[live] = _geometry_values(s, points[live], ["q"])["q"] * val[live] ** 2
        return out

    def rhs(points):
        _, grad = xi(points)
        g = _tangential_gradient(s, points, grad)
        return np.sum(g * g, axis=1)

    a = integrate_sigmaH(chart, lhs, cells, order)
    b = integrate_sigmaH(chart, rhs, cells, order)
    return StabilityResult(a.value, b.value, a.error, b.error)


def cutoff_bump(cutoff: CutoffFamily, R: float) -> Callable:
    return lambda pts: (cutoff.value(pts, R), cutoff.horizontal_gradient(pts, R))


def beta_window(k: float, n: int = 2) -> tuple[float, float]:
    """Admissible exponents [1 - k/(2n-1), 1 + sqrt(k/(2n-1))) for the curvature estimate."""
    c = k / (2 * n - 1)
    return 1.0 - c, 1.0 + math.sqrt(c)


def estimate_constant(beta: float, k: float, n: int = 2) -> float:
    """A constant for the integral curvature estimate at (beta, k).

    For beta >= 1 the Young-inequality splitting uses
    P(eps) = -beta^2 + 2 beta + k/(2n-1) - 1 + eps (1 - beta), which must be
    positive at eps = 0; the returned value is infinite outside that range.
    """
    c = k / (2 * n - 1)
    if beta < 1.0:
        base = 1.0 / (1.0 - beta)
    else:
        p0 = -beta * beta + 2.0 * beta + c - 1.0
        if p0 <= 0:
            return math.inf
        eps = p0 / (2.0 * (beta - 1.0)) if beta > 1.0 else 1.0
        eps = min(eps, 1.0)
        p = p0 + eps * (1.0 - beta)
        q = 4.0 + (4.0 * beta - 4.0) / eps
        base = beta * (beta + eps) * q / (4.0 * p) + 1.0 + beta / eps
    return (beta + 1.0) ** (2 * beta + 2) * base ** (beta + 1)


def validate_exponents(beta: float, k: float, n: int = 2) -> None:
    if n != 2:
        raise ValueError("the curvature estimate experiment is set in the second Heisenberg group")
    if not 0.0 <= k <= 9.0 / 8.0:
        raise ValueError(f"k = {k} outside [0, 9/8], where g_(S,k) >= 0 is guaranteed")
    lo, hi = beta_window(k, n)
    if not lo <= beta < hi:
        raise ValueError(f"beta = {beta} outside [{lo:.6g}, {hi:.6g}) for k = {k}")


@dataclass
class CurvatureEstimateRow:
    R: float
    lhs: float
    rhs: float
    lhs_error: float
    rhs_error: float

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


@dataclass
class CurvatureEstimateTable:
    beta: float
    k: float
    constant: float
    rows: list = field(default_factory=list)
    lhs_exponent: float | None = None
    predicted_exponent: float = 0.0
    preconditions: dict = field(default_factory=dict)


def _box_around(chart: PatchChart, center: np.ndarray, reach: float) -> PatchChart:
    """Parameter box of a vertical or graph chart covering a Koranyi ball of radius ``reach``."""
    n = chart.n
    if isinstance(chart, VerticalChart):
        c = center[1:]
        half = np.concatenate([np.full(2 * n - 1, reach), [reach * reach + 2.0 * reach * np.linalg.norm(center[: 2 * n])]])
        return chart.with_box(c - half, c + half)
    if isinstance(chart, ParaboloidChart):
        c = center[: 2 * n]
        return chart.with_box(c - reach, c + reach)
    raise ChartError("automatic boxes are available for vertical and graph charts only")


def curvature_estimate_experiment(
    s: SurfaceDef,
    center,
    beta: float,
    k: float,
    R_list: Sequence[float],
    chart: PatchChart | None = None,
    cells: int = 4,
    order: int = 4,
) -> CurvatureEstimateTable:
    """Both sides of the integral curvature estimate on cutoff balls of radii R.

    LHS = int |htilde|^(2b+2) phi^(2b+2), RHS = C int |grad_{H,S} phi|^(2b+2).
    The fitted decay of LHS against R is reported next to 3 - 2 beta.
    """
    validate_exponents(beta, k, s.n)
    center = np.asarray(center, dtype=float)
    cutoff = CutoffFamily(center, tuple(R_list))
    const = estimate_constant(beta, k, s.n)
    base = chart or chart_for(s)
    table = CurvatureEstimateTable(beta, k, const, predicted_exponent=3.0 - 2.0 * beta)
    power = 2.0 * beta + 2.0
    worst = {"P1": 0.0, "P2": 0.0, "P3": math.inf, "g_sk": math.inf}
    for R in R_list:
        ch = base if chart is not None else _box_around(base, center, cutoff.support_radius(R))
        check_support(ch, cutoff, R)

        def lhs(points, R=R):
            phi = cutoff.value(points, R)
            out = np.zeros(len(points))
            live = phi > 0
            if np.any(live):
                pts = points[live]
                vals = []
                for i in range(0, len(pts), CHUNK):
                    g = SurfaceGeometry(s, pts[i : i + CHUNK], order=2)
                    x, _ = g.p1_residuals()
                    worst["P1"] = max(worst["P1"], float(x.max()))
                    worst["P2"] = max(worst["P2"], float(g.p2_residual().max()))
                    worst["P3"] = min(worst["P3"], float(g.p3_value().min()))
                    hs = g.htilde_sq.value
                    worst["g_sk"] = min(worst["g_sk"], float(((6 - 4 * k) * hs - 2 * k * g.ell.value**2).min()))
                    vals.append(hs ** (power / 2))
                out[live] = np.concatenate(vals) * phi[live] ** power
            return out

        def rhs(points, R=R):
            g = _tangential_gradient(s, points, cutoff.horizontal_gradient(points, R))
            return const * np.sum(g * g, axis=1) ** (power / 2)

        a = integrate_sigmaH(ch, lhs, cells, order)
        b = integrate_sigmaH(ch, rhs, cells, order)
        table.rows.append(CurvatureEstimateRow(float(R), a.value, b.value, a.error, b.error))
    table.preconditions = worst
    lhs_vals = np.array([r.lhs for r in table.rows])
    if len(R_list) >= 2 and np.all(lhs_vals > 0):
        table.lhs_exponent = fit_exponent(R_list, lhs_vals)
    return table


# ---------------------------------------------------------------------------
# Volume growth
# ---------------------------------------------------------------------------


def fit_exponent(radii: Sequence[float], values: Sequence[float]) -> float:
    """Least-squares slope of log(values) against log(radii)."""
    slope, _ = np.polyfit(np.log(np.asarray(radii, float)), np.log(np.asarray(values, float)), 1)
    return float(slope)


def vertical_ball_measure(n: int, center, R: float, cells: int = 8, order: int = 8) -> QuadratureResult:
    """sigma_H of a Koranyi ball on the hyperplane x_1 = 0 through ``center``.

    The measure density is 1 in the coordinates (x_2..x_n, y, t), and the t
    extent of the ball over a horizontal offset w is 2 sqrt(R^4 - |w|^4)_+.
    """
    center = np.asarray(center, dtype=float)
    if abs(center[0]) > 1e-12:
        raise ValueError("center must lie on the hyperplane x_1 = 0")
    dim = 2 * n - 1

    def kernel(w):
        r4 = np.sum(w * w, axis=1) ** 2
        return 2.0 * np.sqrt(np.clip(R**4 - r4, 0.0, None))

    return integrate_box(kernel, (-R,) * dim, (R,) * dim, cells, order)


def ball_measure(s: SurfaceDef, center, R: float, cells: int = 8, order: int = 8) -> QuadratureResult:
    """sigma_H(S cap B_R(center)) with Koranyi balls."""
    if s.id == "vertical_hyperplane":
        return vertical_ball_measure(s.n, center, R, cells, order)
    center = np.asarray(center, dtype=float)
    chart = _box_around(chart_for(s), center, R)
    cutoff = CutoffFamily(center)

    def indicator(points):
        return (koranyi_gauge(cutoff._relative(points)) < R).astype(float)

    check_support(chart, CutoffFamily(center), R / 2.0)
    return integrate_sigmaH(chart, indicator, cells, order)


@dataclass
class VolumeGrowth:
    radii: tuple
    measures: tuple
    errors: tuple
    exponent: float


def volume_growth_fit(s: SurfaceDef, center, R_list: Sequence[float], cells: int = 8, order: int = 8) -> VolumeGrowth:
    """Slope of log sigma_H(S cap B_R) against log R."""
    radii = tuple(float(r) for r in R_list)
    if len(radii) < 4 or max(radii) / min(radii) < 10.0:
        raise ValueError("need at least 4 radii spanning a decade")
    res = [ball_measure(s, center, R, cells, order) for R in radii]
    vals = tuple(r.value for r in res)
    return VolumeGrowth(radii, vals, tuple(r.error for r in res), fit_exponent(radii, vals))


def default_center(s: SurfaceDef) -> np.ndarray:
    """A convenient non-characteristic point of a gallery surface."""
    n = s.n
    p = np.zeros(2 * n + 1)
    if s.id == "vertical_hyperplane":
        return p
    if s.id == "hyperbolic_paraboloid":
        p[:n] = 1.0
        p[n : 2 * n] = 0.5
        p[-1] = 0.5 * n
        return p
    if s.id == "catenoid":
        E = dict(s.params)["E"]
        p[2 * n - 1] = 1.5 * catenoid_neck(E, n)
        p[-1] = float(catenoid_height(p[2 * n - 1], E, n))
        return p
    if s.id == "helicoid":
        p[0] = 1.0
        return p
    raise ChartError(f"no default center for '{s.id}'")
