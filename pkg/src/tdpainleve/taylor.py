"""Truncated Taylor series evaluated pointwise on arrays of expansion points.

A ``Taylor`` holds normalized coefficients c[k] = f^(k)(y)/k! for every
point y of a grid (shape (order + 1, n)). Products truncate to the smaller
order and differentiation lowers the order by one, so a chain of
differential operators is exact up to floating-point rounding; no finite
differences are involved.
"""
from __future__ import annotations

import math

import numpy as np

__all__ = ["Taylor", "variable", "constant", "polynomial", "solve_polynomial_ode", "DTYPE"]

# high-order coefficients lose digits in the recursions; extended precision
# keeps several raisings' worth of them
DTYPE = np.longdouble


class Taylor:
    __slots__ = ("c",)

    def __init__(self, coeffs):
        c = np.asarray(coeffs, dtype=DTYPE)
        if c.ndim == 1:
            c = c[:, None]
        self.c = c

    @property
    def order(self) -> int:
        return self.c.shape[0] - 1

    @property
    def value(self) -> np.ndarray:
        return self.c[0]

    def truncate(self, order: int) -> "Taylor":
        return Taylor(self.c[: order + 1])

    def _coerce(self, other):
        if isinstance(other, Taylor):
            return other
        return constant(other, self.order, self.c.shape[1:])

    def __add__(self, other):
        o = self._coerce(other)
        p = min(self.order, o.order)
        return Taylor(self.c[: p + 1] + o.c[: p + 1])

    __radd__ = __add__

    def __neg__(self):
        return Taylor(-self.c)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Taylor):
            return Taylor(self.c * other)
        p = min(self.order, other.order)
        a, b = self.c, other.c
        out = np.zeros((p + 1,) + np.broadcast_shapes(a.shape[1:], b.shape[1:]), dtype=np.result_type(a, b))
        for i in range(p + 1):
            out[i:] += a[i] * b[: p + 1 - i]
        return Taylor(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Taylor):
            return Taylor(self.c / other)
        p = min(self.order, other.order)
        a, b = self.c, other.c
        q = np.zeros((p + 1,) + np.broadcast_shapes(a.shape[1:], b.shape[1:]), dtype=np.result_type(a, b))
        for k in range(p + 1):
            acc = a[k] - sum(b[j] * q[k - j] for j in range(1, k + 1)) if k else a[0]
            q[k] = acc / b[0]
        return Taylor(q)

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers")
        out = constant(1.0, self.order, self.c.shape[1:])
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def deriv(self) -> "Taylor":
        p = self.order
        if p == 0:
            raise ValueError("cannot differentiate an order-0 series")
        k = np.arange(1, p + 1).reshape((-1,) + (1,) * (self.c.ndim - 1))
        return Taylor(self.c[1:] * k)

    def integ(self, value) -> "Taylor":
        """Antiderivative whose value at the expansion points is ``value``."""
        p = self.order
        k = np.arange(1, p + 2).reshape((-1,) + (1,) * (self.c.ndim - 1))
        head = np.broadcast_to(np.asarray(value, dtype=self.c.dtype), self.c.shape[1:])[None]
        return Taylor(np.concatenate([head, self.c / k]))

    def exp(self, value=None) -> "Taylor":
        """exp of the series; ``value`` overrides exp(c[0]) (e.g. a clipped value)."""
        p = self.order
        f = self.c
        e = np.zeros_like(f)
        e[0] = np.exp(f[0]) if value is None else value
        for k in range(1, p + 1):
            e[k] = sum(j * f[j] * e[k - j] for j in range(1, k + 1)) / k
        return Taylor(e)


def constant(value, order: int, shape) -> Taylor:
    c = np.zeros((order + 1,) + tuple(shape), dtype=DTYPE)
    c[0] = value
    return Taylor(c)


def variable(y, order: int) -> Taylor:
    """The identity function expanded at each y."""
    y = np.asarray(y, dtype=DTYPE)
    c = np.zeros((order + 1,) + y.shape, dtype=DTYPE)
    c[0] = y
    if order >= 1:
        c[1] = 1.0
    return Taylor(c)


def polynomial(coeffs, y, order: int) -> Taylor:
    """Polynomial sum_j coeffs[j] y^j expanded at each y (ascending coefficients)."""
    y = np.asarray(y, dtype=DTYPE)
    c = np.asarray(coeffs, dtype=DTYPE)
    out = np.zeros((order + 1,) + y.shape, dtype=DTYPE)
    for k in range(order + 1):
        if c.size == 0:
            break
        out[k] = np.polynomial.polynomial.polyval(y, c) / math.factorial(k)
        c = np.polynomial.polynomial.polyder(c)
    return Taylor(out)


def solve_polynomial_ode(initial, rhs, y, order: int) -> Taylor:
    """Taylor series of the solution of f^(m) = rhs(y, f) through ``order``.

    ``initial`` lists f, f', ..., f^(m-1) at each point; ``rhs`` maps the
    variable and a truncated series of f to a series whose k-th coefficient
    only involves f's coefficients up to k + m - 1.
    """
    m = len(initial)
    y = np.asarray(y, dtype=DTYPE)
    c = np.zeros((order + 1,) + y.shape, dtype=DTYPE)
    for j, v in enumerate(initial[: order + 1]):
        c[j] = np.asarray(v) / math.factorial(j)
    Y = variable(y, order)
    for k in range(0, order + 1 - m):
        r = rhs(Y.truncate(k), Taylor(c[: k + m]).truncate(k))
        # f^(m) coefficient k equals (k+m)!/k! * c[k+m]
        c[k + m] = r.c[k] * math.factorial(k) / math.factorial(k + m)
    return Taylor(c)
