"""Truncated multivariate Taylor polynomials with batched tensor coefficients.

A :class:`Jet` stores the Taylor coefficients ``c[alpha] = d^alpha f / alpha!``
of a tensor-valued function around a batch of base points.  Coefficient arrays
have shape ``(n_monomials, *shape)``; by convention the batch axis is the last
axis of ``shape``.  Monomials are graded by degree, so truncating to a lower
order is a prefix slice.
"""

from __future__ import annotations

import functools
import itertools
import math
from typing import Sequence

import numpy as np


class JetSpace:
    """Monomial bookkeeping for jets in ``dim`` variables up to ``order``."""

    def __init__(self, dim: int, order: int):
        self.dim = dim
        self.order = order
        monos: list[tuple[int, ...]] = []
        for deg in range(order + 1):
            for combo in itertools.combinations_with_replacement(range(dim), deg):
                a = [0] * dim
                for v in combo:
                    a[v] += 1
                monos.append(tuple(a))
        self.monomials = monos
        self.index = {a: i for i, a in enumerate(monos)}
        self.degree = np.array([sum(a) for a in monos])
        self.size_upto = [int(np.sum(self.degree <= m)) for m in range(order + 1)]
        self.unit_index = [self.index[tuple(int(i == v) for i in range(dim))] for v in range(dim)] if order >= 1 else []

        pairs = []
        for i, a in enumerate(monos):
            for j, b in enumerate(monos):
                if self.degree[i] + self.degree[j] <= order:
                    k = self.index[tuple(x + y for x, y in zip(a, b))]
                    pairs.append((k, i, j))
        pairs.sort()
        arr = np.array(pairs, dtype=np.intp)
        self._pk, self._pi, self._pj = arr[:, 0], arr[:, 1], arr[:, 2]
        self._starts = np.searchsorted(self._pk, np.arange(len(monos)))
        self._pairs_upto = [int(np.searchsorted(self._pk, self.size_upto[m])) for m in range(order + 1)]

        # d/dx_v: out[t] = (a_t[v] + 1) * c[index(a_t + e_v)] for deg(t) < order
        self._dsrc = []
        self._dfac = []
        n_low = self.size_upto[order - 1] if order >= 1 else 0
        for v in range(dim):
            src = np.empty(n_low, dtype=np.intp)
            fac = np.empty(n_low)
            for t in range(n_low):
                a = list(monos[t])
                fac[t] = a[v] + 1
                a[v] += 1
                src[t] = self.index[tuple(a)]
            self._dsrc.append(src)
            self._dfac.append(fac)

    def __repr__(self) -> str:
        return f"JetSpace(dim={self.dim}, order={self.order})"

    def size(self, m: int) -> int:
        return self.size_upto[m]

    def multiply(self, a: np.ndarray, b: np.ndarray, m: int) -> np.ndarray:
        p = self._pairs_upto[m]
        prod = _lift(a, b.ndim)[self._pi[:p]] * _lift(b, a.ndim)[self._pj[:p]]
        return np.add.reduceat(prod, self._starts[: self.size_upto[m]], axis=0)

    def contract(self, subscripts: str, a: np.ndarray, b: np.ndarray, m: int) -> np.ndarray:
        p = self._pairs_upto[m]
        ins, out = subscripts.split("->")
        sa, sb = ins.split(",")
        prod = np.einsum(f"p{sa},p{sb}->p{out}", a[self._pi[:p]], b[self._pj[:p]], optimize=False)
        return np.add.reduceat(prod, self._starts[: self.size_upto[m]], axis=0)

    def differentiate(self, c: np.ndarray, v: int, m: int) -> np.ndarray:
        n_out = self.size_upto[m - 1]
        fac = self._dfac[v][:n_out].reshape((n_out,) + (1,) * (c.ndim - 1))
        return fac * c[self._dsrc[v][:n_out]]


@functools.lru_cache(maxsize=None)
def jet_space(dim: int, order: int) -> JetSpace:
    return JetSpace(dim, order)


def _lift(c: np.ndarray, ndim: int) -> np.ndarray:
    """Insert axes after the monomial axis so ``c`` has at least ``ndim`` dims."""
    if c.ndim >= ndim:
        return c
    return c.reshape((c.shape[0],) + (1,) * (ndim - c.ndim) + c.shape[1:])


class Jet:
    """Tensor-valued truncated Taylor polynomial, valid through ``order``."""

    __slots__ = ("space", "order", "c")
    __array_priority__ = 1000

    def __init__(self, space: JetSpace, order: int, c: np.ndarray):
        self.space = space
        self.order = order
        self.c = c

    # -- construction -------------------------------------------------
    @classmethod
    def constant(cls, space: JetSpace, value, order: int | None = None) -> "Jet":
        order = space.order if order is None else order
        value = np.asarray(value, dtype=float)
        c = np.zeros((space.size(order),) + value.shape)
        c[0] = value
        return cls(space, order, c)

    @classmethod
    def variables(cls, space: JetSpace, points: np.ndarray) -> "Jet":
        """Coordinate functions around ``points`` of shape ``(batch, dim)``.

        The result has shape ``(dim, batch)``.
        """
        points = np.asarray(points, dtype=float)
        c = np.zeros((space.size(space.order), space.dim, points.shape[0]))
        c[0] = points.T
        for v, idx in enumerate(space.unit_index):
            c[idx, v] = 1.0
        return cls(space, space.order, c)

    # -- basic properties ---------------------------------------------
    @property
    def shape(self) -> tuple[int, ...]:
        return self.c.shape[1:]

    @property
    def value(self) -> np.ndarray:
        return self.c[0]

    def __repr__(self) -> str:
        return f"Jet(order={self.order}, shape={self.shape})"

    def truncate(self, m: int) -> "Jet":
        if m > self.order:
            raise ValueError(f"cannot raise jet order from {self.order} to {m}")
        return Jet(self.space, m, self.c[: self.space.size(m)])

    def _new(self, order: int, c: np.ndarray) -> "Jet":
        return Jet(self.space, order, c)

    # -- arithmetic -----------------------------------------------------
    def _align(self, other: "Jet") -> tuple[int, np.ndarray, np.ndarray]:
        m = min(self.order, other.order)
        n = self.space.size(m)
        a, b = self.c[:n], other.c[:n]
        return m, _lift(a, b.ndim), _lift(b, a.ndim)

    def _add_const(self, value, sign: float = 1.0) -> "Jet":
        value = np.asarray(value, dtype=float)
        shape = np.broadcast_shapes(self.shape, value.shape)
        c = np.array(np.broadcast_to(_lift(self.c, len(shape) + 1), (self.c.shape[0],) + shape))
        c[0] = c[0] + sign * value
        return self._new(self.order, c)

    def __add__(self, other):
        if isinstance(other, Jet):
            m, a, b = self._align(other)
            return self._new(m, a + b)
        return self._add_const(other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Jet):
            m, a, b = self._align(other)
            return self._new(m, a - b)
        return self._add_const(other, -1.0)

    def __rsub__(self, other):
        return (-self)._add_const(other)

    def __neg__(self):
        return self._new(self.order, -self.c)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if isinstance(other, Jet):
            m = min(self.order, other.order)
            n = self.space.size(m)
            return self._new(m, self.space.multiply(self.c[:n], other.c[:n], m))
        other = np.asarray(other, dtype=float)
        return self._new(self.order, _lift(self.c, other.ndim + 1) * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        other = np.asarray(other, dtype=float)
        return self._new(self.order, _lift(self.c, other.ndim + 1) / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, (int, np.integer)) and 0 <= p <= 4:
            out = Jet.constant(self.space, np.ones(self.shape), self.order)
            for _ in range(int(p)):
                out = out * self
            return out
        return self.power(float(p))

    # -- tensor manipulation ------------------------------------------
    def __getitem__(self, idx) -> "Jet":
        if not isinstance(idx, tuple):
            idx = (idx,)
        return self._new(self.order, self.c[(slice(None),) + idx])

    def sum(self, axis=None) -> "Jet":
        if axis is None:
            axis = tuple(range(len(self.shape)))
        axes = tuple(a + 1 if a >= 0 else a for a in np.atleast_1d(axis).tolist())
        return self._new(self.order, self.c.sum(axis=axes))

    def reshape(self, *shape) -> "Jet":
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        return self._new(self.order, self.c.reshape((self.c.shape[0],) + tuple(shape)))

    def moveaxis(self, src: int, dst: int) -> "Jet":
        src = src + 1 if src >= 0 else src
        dst = dst + 1 if dst >= 0 else dst
        return self._new(self.order, np.moveaxis(self.c, src, dst))

    def swapaxes(self, a: int, b: int) -> "Jet":
        a = a + 1 if a >= 0 else a
        b = b + 1 if b >= 0 else b
        return self._new(self.order, np.swapaxes(self.c, a, b))

    # -- calculus --------------------------------------------------------
    def deriv(self, v: int) -> "Jet":
        """Partial derivative in variable ``v``; loses one order."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        return self._new(self.order - 1, self.space.differentiate(self.c, v, self.order))

    def gradient(self) -> "Jet":
        """All partial derivatives stacked on a new leading axis."""
        return stack([self.deriv(v) for v in range(self.space.dim)])

    def partials(self, k: int) -> np.ndarray:
        """Symmetric tensor of k-th partial derivatives at the base points."""
        d = self.space.dim
        out = np.zeros((d,) * k + self.shape)
        for idx in itertools.product(range(d), repeat=k):
            a = [0] * d
            for v in idx:
                a[v] += 1
            a = tuple(a)
            out[idx] = self.c[self.space.index[a]] * math.prod(math.factorial(x) for x in a)
        return out

    def compose(self, coeffs: Sequence[np.ndarray]) -> "Jet":
        """Evaluate ``sum_k coeffs[k] * (self - self.value)**k``."""
        m = self.order
        delta = self._new(m, self.c.copy())
        delta.c[0] = 0.0
        out = Jet.constant(self.space, np.broadcast_to(coeffs[m], self.shape), m)
        for k in range(m - 1, -1, -1):
            out = (out * delta)._add_const(coeffs[k])
        return out

    # -- elementary functions -----------------------------------------
    def reciprocal(self) -> "Jet":
        f0 = self.value
        inv = 1.0 / f0
        coeffs = [inv]
        for _ in range(self.order):
            coeffs.append(-coeffs[-1] * inv)
        return self.compose(coeffs)

    def power(self, p: float) -> "Jet":
        f0 = self.value
        coeffs = [f0**p]
        for k in range(1, self.order + 1):
            coeffs.append(coeffs[-1] * (p - k + 1) / (k * f0))
        return self.compose(coeffs)

    def sqrt(self) -> "Jet":
        return self.power(0.5)

    def exp(self) -> "Jet":
        e0 = np.exp(self.value)
        return self.compose([e0 / math.factorial(k) for k in range(self.order + 1)])

    def log(self) -> "Jet":
        f0 = self.value
        coeffs = [np.log(f0)]
        for k in range(1, self.order + 1):
            coeffs.append((-1.0) ** (k + 1) / (k * f0**k))
        return self.compose(coeffs)

    def sin(self) -> "Jet":
        s0, c0 = np.sin(self.value), np.cos(self.value)
        cycle = [s0, c0, -s0, -c0]
        return self.compose([cycle[k % 4] / math.factorial(k) for k in range(self.order + 1)])

    def cos(self) -> "Jet":
        s0, c0 = np.sin(self.value), np.cos(self.value)
        cycle = [c0, -s0, -c0, s0]
        return self.compose([cycle[k % 4] / math.factorial(k) for k in range(self.order + 1)])

    def _atan_at_zero(self) -> "Jet":
        # self.value is zero; odd power series of arctan
        zero = np.zeros(self.shape)
        coeffs = [zero]
        for k in range(1, self.order + 1):
            coeffs.append(zero if k % 2 == 0 else zero + (-1.0) ** ((k - 1) // 2) / k)
        return self.compose(coeffs)

    def arctan(self) -> "Jet":
        w0 = self.value
        shifted = (self - w0) / (self * w0 + 1.0)
        return shifted._atan_at_zero() + np.arctan(w0)


def arctan2(y, x):
    """Two-argument arctangent for jets or arrays."""
    if not isinstance(y, Jet) and not isinstance(x, Jet):
        return np.arctan2(y, x)
    if not isinstance(y, Jet):
        y = Jet.constant(x.space, y, x.order)
    if not isinstance(x, Jet):
        x = Jet.constant(y.space, x, y.order)
    y0, x0 = y.value, x.value
    w = (y * x0 - x * y0) / (x * x0 + y * y0)
    return w._atan_at_zero() + np.arctan2(y0, x0)


def stack(jets: Sequence[Jet], axis: int = 0) -> Jet:
    m = min(j.order for j in jets)
    n = jets[0].space.size(m)
    axis = axis + 1 if axis >= 0 else axis
    return Jet(jets[0].space, m, np.stack([j.c[:n] for j in jets], axis=axis))


def einsum(subscripts: str, a, b) -> Jet:
    """Two-operand einsum where either operand may be a jet or a plain array."""
    if isinstance(a, Jet) and isinstance(b, Jet):
        m = min(a.order, b.order)
        n = a.space.size(m)
        return Jet(a.space, m, a.space.contract(subscripts, a.c[:n], b.c[:n], m))
    ins, out = subscripts.split("->")
    sa, sb = ins.split(",")
    if isinstance(a, Jet):
        return Jet(a.space, a.order, np.einsum(f"p{sa},{sb}->p{out}", a.c, np.asarray(b)))
    if isinstance(b, Jet):
        return Jet(b.space, b.order, np.einsum(f"{sa},p{sb}->p{out}", np.asarray(a), b.c))
    return np.einsum(subscripts, a, b)


def value(x) -> np.ndarray:
    """Base-point value of a jet, or the array itself."""
    return x.value if isinstance(x, Jet) else np.asarray(x)


def _dispatch(name: str, npfunc):
    def f(x):
        return getattr(x, name)() if isinstance(x, Jet) else npfunc(x)

    f.__name__ = name
    return f


sin = _dispatch("sin", np.sin)
cos = _dispatch("cos", np.cos)
exp = _dispatch("exp", np.exp)
log = _dispatch("log", np.log)
sqrt = _dispatch("sqrt", np.sqrt)
arctan = _dispatch("arctan", np.arctan)
