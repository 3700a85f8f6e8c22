"""Heisenberg group arithmetic, the left-invariant frame and its flat connection.

Points are arrays whose last axis holds ``(x_1..x_n, y_1..y_n, t)``.  Horizontal
vectors are coefficient arrays over ``(X_1..X_n, Y_1..Y_n)`` and tangent vectors
append the ``T`` coefficient.  The metric makes this frame orthonormal, so
inner products are plain dot products of coefficients.
"""

from __future__ import annotations

import numpy as np

from .jets import Jet, einsum, jet_space, stack


def dimension_index(point) -> int:
    """Return n for a point of R^{2n+1}."""
    size = np.shape(point)[-1]
    if size < 3 or size % 2 == 0:
        raise ValueError(f"a Heisenberg point needs 2n+1 >= 3 coordinates, got {size}")
    return (size - 1) // 2


def split(p):
    n = dimension_index(p)
    p = np.asarray(p, dtype=float)
    return p[..., :n], p[..., n : 2 * n], p[..., 2 * n]


def group_mul(p, q) -> np.ndarray:
    """Group law (x, y, t)(x', y', t') = (x + x', y + y', t + t' + sum(x' y - x y'))."""
    if np.shape(p)[-1] != np.shape(q)[-1]:
        raise ValueError("points live in Heisenberg groups of different dimension")
    x, y, t = split(p)
    xq, yq, tq = split(q)
    twist = np.sum(xq * y - x * yq, axis=-1)
    return np.concatenate([x + xq, y + yq, (t + tq + twist)[..., None]], axis=-1)


def inverse(p) -> np.ndarray:
    return -np.asarray(p, dtype=float)


def dilate(p, lam: float) -> np.ndarray:
    x, y, t = split(p)
    return np.concatenate([lam * x, lam * y, (lam**2 * t)[..., None]], axis=-1)


def koranyi_gauge(p) -> np.ndarray:
    """Homogeneous norm (|z|^4 + t^2)^(1/4)."""
    x, y, t = split(p)
    z2 = np.sum(x * x + y * y, axis=-1)
    return (z2 * z2 + t * t) ** 0.25


def frame_at(p) -> np.ndarray:
    """Rows are X_1..X_n, Y_1..Y_n, T written in the coordinate basis."""
    n = dimension_index(p)
    x, y, _ = split(p)
    d = 2 * n + 1
    rows = np.broadcast_to(np.eye(d), np.shape(p)[:-1] + (d, d)).copy()
    rows[..., :n, -1] = y
    rows[..., n : 2 * n, -1] = -x
    return rows


def apply_J(v) -> np.ndarray:
    """Complex structure on horizontal coefficients: (a, b) -> (-b, a)."""
    v = np.asarray(v)
    n = v.shape[-1] // 2
    return np.concatenate([-v[..., n:], v[..., :n]], axis=-1)


def horizontal_dot(v, w):
    return np.sum(np.asarray(v) * np.asarray(w), axis=-1)


def bracket_algebra(a, b) -> np.ndarray:
    """Lie bracket of left-invariant fields given by tangent coefficients.

    Only the horizontal parts contribute: [X_j, Y_j] = -2T.
    """
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    n = dimension_index(a)
    out = np.zeros(np.broadcast_shapes(a.shape, b.shape))
    ax, ay = a[..., :n], a[..., n : 2 * n]
    bx, by = b[..., :n], b[..., n : 2 * n]
    out[..., -1] = -2.0 * np.sum(ax * by - ay * bx, axis=-1)
    return out


# ---------------------------------------------------------------------------
# Jet-level calculus: fields are jets whose last axis is the batch of points.
# ---------------------------------------------------------------------------


class LocalCalculus:
    """Frame derivatives and the flat connection on jets around a batch of points."""

    def __init__(self, n: int, points, order: int):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[-1] != 2 * n + 1:
            raise ValueError(f"expected points in R^{2 * n + 1}, got shape {points.shape}")
        self.n = n
        self.dim = 2 * n + 1
        self.points = points
        self.batch = points.shape[0]
        self.space = jet_space(self.dim, order)
        self.order = order
        self.coords = Jet.variables(self.space, points)
        x, y = self.coords[:n], self.coords[n : 2 * n]
        # t-coefficient of Z_k in the coordinate basis
        self.twist = stack([*(y[j] for j in range(n)), *(-x[j] for j in range(n))])

    def frame_derivatives(self, f: Jet) -> Jet:
        """Stack (Z_1 f, ..., Z_2n f, T f) on a new leading axis."""
        grad = f.gradient()
        dt = grad[2 * self.n]
        twist = self.twist.reshape((2 * self.n,) + (1,) * (len(f.shape) - 1) + (self.batch,))
        horizontal = grad[: 2 * self.n] + twist * dt
        return stack([*(horizontal[k] for k in range(2 * self.n)), dt])

    def along(self, f: Jet, directions) -> Jet:
        """Directional derivatives of ``f`` along tangent fields.

        ``directions`` has shape ``(r, 2n+1, batch)`` (frame coefficients,
        jet or array); the result has shape ``(r, *f.shape)``.
        """
        zf = self.frame_derivatives(f)
        return einsum("rkz,k...z->r...z", directions, zf)

    def connection(self, directions, field: Jet) -> Jet:
        """Flat connection: differentiate the frame components of ``field``."""
        return self.along(field, directions)

    def coordinate_components(self, v) -> Jet:
        """Tangent frame coefficients (2n+1, ...) -> coordinate components."""
        twist = self.twist.reshape((2 * self.n,) + (1,) * (len(v.shape) - 2) + (self.batch,))
        tcomp = v[2 * self.n] + (v[: 2 * self.n] * twist).sum(0)
        return stack([*(v[k] for k in range(2 * self.n)), tcomp])

    def frame_components(self, w) -> Jet:
        twist = self.twist.reshape((2 * self.n,) + (1,) * (len(w.shape) - 2) + (self.batch,))
        tcomp = w[2 * self.n] - (w[: 2 * self.n] * twist).sum(0)
        return stack([*(w[k] for k in range(2 * self.n)), tcomp])

    def lie_bracket(self, v, w) -> Jet:
        """Vector field commutator computed in coordinates, returned in frame coefficients."""
        vc = self.coordinate_components(v)
        wc = self.coordinate_components(w)
        gv = vc.gradient()  # (dim_deriv, dim_comp, ...)
        gw = wc.gradient()
        vw = einsum("i...,ij...->j...", vc, gw)
        wv = einsum("i...,ij...->j...", wc, gv)
        return self.frame_components(vw - wv)


def apply_J_jet(v: Jet) -> Jet:
    """Complex structure on the leading (horizontal coefficient) axis of a jet."""
    n = v.shape[0] // 2
    return stack([*(-v[n + j] for j in range(n)), *(v[j] for j in range(n))])


def torsion_T_coefficient(v, w) -> Jet:
    """<J v, w> for horizontal coefficient jets on the leading axis."""
    return (apply_J_jet(v) * w).sum(0)
