"""Exact polynomial families and series-evaluated special functions.

The polynomial recurrences (Hermite, pseudo-Hermite, Okamoto) run in exact
rational arithmetic and only drop to floating point on evaluation. The
series routines (Kummer 1F1, Gauss 2F1, erfc) are vectorised over numpy
arrays.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterable, Sequence

import numpy as np
from scipy.special import loggamma

from .errors import NumericalError, PoleError, RecurrenceError

__all__ = [
    "ExactPolynomial",
    "RecurrenceError",
    "PoleError",
    "hermite",
    "pseudo_hermite",
    "okamoto",
    "kummer_1F1",
    "kummer_1F1_scaled",
    "hyp2f1",
    "hyp2f1_series",
    "erfc",
]

_SERIES_TOL = 1e-18
_MAX_TERMS = 20000


def _frac(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, Rational)):
        return Fraction(c)
    if isinstance(c, float):
        return Fraction(c)
    raise TypeError(f"cannot convert {c!r} to an exact rational")


class ExactPolynomial:
    """Polynomial with arbitrary-precision rational coefficients.

    Coefficients are stored in ascending degree order with trailing zeros
    stripped, so the zero polynomial has an empty coefficient tuple.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [_frac(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(cs)

    @classmethod
    def monomial(cls, degree: int, coeff=1) -> "ExactPolynomial":
        return cls([0] * degree + [coeff])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __repr__(self) -> str:
        if not self.coeffs:
            return "ExactPolynomial(0)"
        terms = []
        for n, c in enumerate(self.coeffs):
            if c == 0:
                continue
            terms.append(f"{c}" if n == 0 else f"{c}*y^{n}")
        return "ExactPolynomial(" + " + ".join(terms) + ")"

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExactPolynomial):
            other = ExactPolynomial([other])
        return self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def _coerce(self, other) -> "ExactPolynomial":
        return other if isinstance(other, ExactPolynomial) else ExactPolynomial([other])

    def __add__(self, other) -> "ExactPolynomial":
        other = self._coerce(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (n - len(other.coeffs))
        return ExactPolynomial(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __neg__(self) -> "ExactPolynomial":
        return ExactPolynomial(-c for c in self.coeffs)

    def __sub__(self, other) -> "ExactPolynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "ExactPolynomial":
        return self._coerce(other) - self

    def __mul__(self, other) -> "ExactPolynomial":
        other = self._coerce(other)
        if self.is_zero() or other.is_zero():
            return ExactPolynomial()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return ExactPolynomial(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "ExactPolynomial":
        out = ExactPolynomial([1])
        for _ in range(n):
            out = out * self
        return out

    def derivative(self, order: int = 1) -> "ExactPolynomial":
        p = self
        for _ in range(order):
            p = ExactPolynomial(n * c for n, c in enumerate(p.coeffs) if n > 0)
        return p

    def divmod(self, divisor: "ExactPolynomial") -> tuple["ExactPolynomial", "ExactPolynomial"]:
        divisor = self._coerce(divisor)
        if divisor.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dd = divisor.degree
        lead = divisor.leading
        quot = [Fraction(0)] * max(len(rem) - dd, 0)
        for k in range(len(rem) - dd - 1, -1, -1):
            q = rem[k + dd] / lead
            quot[k] = q
            if q:
                for j, c in enumerate(divisor.coeffs):
                    rem[k + j] -= q * c
        return ExactPolynomial(quot), ExactPolynomial(rem[:dd] if dd > 0 else [])

    def exact_div(self, divisor: "ExactPolynomial") -> "ExactPolynomial":
        q, r = self.divmod(divisor)
        if not r.is_zero():
            raise RecurrenceError(f"non-zero remainder {r!r} in exact division")
        return q

    def __call__(self, y):
        """Evaluate by Horner's rule.

        Exact for ``int``/``Fraction`` arguments, floating point otherwise.
        """
        if isinstance(y, (int, Fraction)):
            acc = Fraction(0)
            for c in reversed(self.coeffs):
                acc = acc * y + c
            return acc
        y = np.asarray(y, dtype=float)
        acc = np.zeros_like(y)
        for c in reversed(self.to_float()):
            acc = acc * y + c
        return acc

    def to_float(self) -> np.ndarray:
        return np.array([float(c) for c in self.coeffs], dtype=float)

    def sturm_sequence(self) -> list["ExactPolynomial"]:
        seq = [self, self.derivative()]
        while not seq[-1].is_zero() and seq[-1].degree > 0:
            _, r = seq[-2].divmod(seq[-1])
            seq.append(-r)
        return [p for p in seq if not p.is_zero()]

    def count_real_roots(self, lo=None, hi=None) -> int:
        """Number of distinct real zeros in (lo, hi]; defaults to the whole line."""
        if self.degree < 1:
            return 0
        seq = self.sturm_sequence()

        def changes(signs: Sequence[int]) -> int:
            s = [x for x in signs if x != 0]
            return sum(1 for a, b in zip(s, s[1:]) if a != b)

        def signs_at(x):
            if x is None:
                raise AssertionError
            return [int(np.sign(p(_frac(x)))) for p in seq]

        if lo is None:
            lo_signs = [(1 if p.leading > 0 else -1) * (-1) ** p.degree for p in seq]
        else:
            lo_signs = signs_at(lo)
        if hi is None:
            hi_signs = [1 if p.leading > 0 else -1 for p in seq]
        else:
            hi_signs = signs_at(hi)
        return changes(lo_signs) - changes(hi_signs)


_Y = ExactPolynomial([0, 1])


@lru_cache(maxsize=None)
def hermite(n: int) -> ExactPolynomial:
    """Physicists' Hermite polynomial H_n."""
    if n < 0:
        raise ValueError("degree must be non-negative")
    prev, cur = ExactPolynomial([1]), ExactPolynomial([0, 2])
    if n == 0:
        return prev
    for m in range(1, n):
        prev, cur = cur, 2 * _Y * cur - 2 * m * prev
    return cur


@lru_cache(maxsize=None)
def pseudo_hermite(n: int) -> ExactPolynomial:
    """Pseudo-Hermite polynomial (-i)^n H_n(i y); real coefficients, all non-negative."""
    if n < 0:
        raise ValueError("degree must be non-negative")
    prev, cur = ExactPolynomial([1]), ExactPolynomial([0, 2])
    if n == 0:
        return prev
    for m in range(1, n):
        prev, cur = cur, 2 * _Y * cur + 2 * m * prev
    return cur


@lru_cache(maxsize=None)
def okamoto(m: int) -> ExactPolynomial:
    """Okamoto polynomial Q_m, with Q_0 = Q_1 = 1.

    Q_{m+1} Q_{m-1} = 9/2 (Q_m Q_m'' - Q_m'^2) + (2y^2 + 3(2m - 1)) Q_m^2
    """
    if m < 0:
        raise ValueError("index must be non-negative")
    if m <= 1:
        return ExactPolynomial([1])
    qm, qm1 = okamoto(m - 1), okamoto(m - 2)
    n = m - 1
    num = Fraction(9, 2) * (qm * qm.derivative(2) - qm.derivative() ** 2) + (
        2 * _Y * _Y + 3 * (2 * n - 1)
    ) * qm * qm
    return num.exact_div(qm1)


# ---------------------------------------------------------------------------
# series helpers


def _neumaier_add(s, c, x):
    t = s + x
    c = c + np.where(np.abs(s) >= np.abs(x), (s - t) + x, (x - t) + s)
    return t, c


def _check_lower(b):
    b = complex(b)
    if b.imag == 0 and b.real <= 0 and float(b.real).is_integer():
        raise PoleError(f"lower parameter {b.real:g} is a non-positive integer")


def _is_real(*vals) -> bool:
    return all(complex(v).imag == 0 for v in vals)


def _pfq_series(a_list, b_list, z, scale_exp=False):
    """Generic vectorised pFq power series with compensated summation.

    With ``scale_exp`` the result is multiplied by exp(-z) while keeping the
    running terms representable (they are rescaled on the fly). A point is
    retired once three consecutive terms fall below the relative tolerance
    on a decreasing tail. Real parameters and arguments use real arithmetic.
    """
    real = _is_real(*a_list, *b_list) and np.isrealobj(z)
    dtype = float if real else complex
    if real:
        a_list = [complex(a).real for a in a_list]
        b_list = [complex(b).real for b in b_list]
    z = np.asarray(z, dtype=dtype)
    shape = z.shape
    zf = z.ravel()
    out_s = np.zeros(zf.shape, dtype=dtype)
    out_c = np.zeros(zf.shape, dtype=dtype)
    out_log = np.zeros(zf.shape)
    idx = np.arange(zf.size)
    zz = zf.copy()
    term = np.ones(zf.shape, dtype=dtype)
    acc_s = term.copy()
    acc_c = np.zeros(zf.shape, dtype=dtype)
    logscale = np.zeros(zf.shape)
    small = np.zeros(zf.shape, dtype=int)
    for n in range(_MAX_TERMS):
        if idx.size == 0:
            break
        ratio = zz / (n + 1)
        for a in a_list:
            ratio = ratio * (a + n)
        for b in b_list:
            ratio = ratio / (b + n)
        term = term * ratio
        big = np.abs(term) > 1e200
        if big.any():
            f = np.where(big, 1e-200, 1.0)
            term, acc_s, acc_c = term * f, acc_s * f, acc_c * f
            logscale = logscale + np.where(big, 200 * math.log(10), 0.0)
        acc_s, acc_c = _neumaier_add(acc_s, acc_c, term)
        tiny = np.abs(term) <= _SERIES_TOL * np.abs(acc_s + acc_c)
        small = np.where(tiny & (np.abs(ratio) < 1.0), small + 1, 0)
        done = (small >= 3) | (term == 0)
        if done.any():
            out_s[idx[done]], out_c[idx[done]], out_log[idx[done]] = acc_s[done], acc_c[done], logscale[done]
            keep = ~done
            idx, zz, term, acc_s, acc_c, logscale, small = (
                idx[keep], zz[keep], term[keep], acc_s[keep], acc_c[keep], logscale[keep], small[keep]
            )
    else:
        raise NumericalError("hypergeometric series failed to converge")
    val = out_s + out_c
    if scale_exp:
        if real:
            val = val * np.exp(out_log - zf)
        else:
            val = val * np.exp(out_log - zf.real) * np.exp(-1j * zf.imag)
    else:
        val = val * np.exp(out_log)
    return val.reshape(shape)


def kummer_1F1(a: complex, b: complex, z):
    """Confluent hypergeometric function 1F1(a; b; z) for real z.

    Non-negative z uses the direct power series. Negative z goes through
    the Kummer transformation e^z 1F1(b - a; b; -z), summed with on-the-fly
    exponential scaling, which avoids the cancellation of the alternating
    direct series.
    """
    _check_lower(b)
    z = np.asarray(z, dtype=float)
    out = np.empty(z.shape, dtype=complex)
    pos = z >= 0
    if pos.any():
        out[pos] = _pfq_series([a], [b], z[pos])
    if (~pos).any():
        out[~pos] = _pfq_series([b - a], [b], -z[~pos], scale_exp=True)
    return out if out.ndim else complex(out)


def kummer_1F1_scaled(a: complex, b: complex, x):
    """exp(-x) * 1F1(a; b; x) for x >= 0, without overflow for large x."""
    _check_lower(b)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("scaled Kummer series needs x >= 0")
    out = _pfq_series([a], [b], x, scale_exp=True)
    return out if out.ndim else complex(out)


def hyp2f1_series(a: complex, b: complex, c: complex, u):
    """Gauss 2F1 by its power series; converges for |u| < 1."""
    _check_lower(c)
    u = np.asarray(u, dtype=float)
    if np.any(np.abs(u) >= 1):
        raise ValueError("power series of 2F1 needs |u| < 1")
    out = _pfq_series([a, b], [c], u)
    return out if out.ndim else complex(out)


def _gamma_ratio(num, den):
    # 1/Gamma vanishes at the poles, which makes the whole term zero
    for x in den:
        x = complex(x)
        if x.imag == 0 and x.real <= 0 and float(x.real).is_integer():
            return 0.0
    return np.exp(sum(loggamma(complex(x)) for x in num) - sum(loggamma(complex(x)) for x in den))


def hyp2f1(a: complex, b: complex, c: complex, u):
    """Gauss 2F1(a, b; c; u) for real 0 <= u < 1.

    Points with u <= 1/2 use the power series directly; u > 1/2 goes
    through the u -> 1 - u connection formula so that both series converge
    at least geometrically with ratio 1/2. Requires c - a - b non-integer.
    """
    _check_lower(c)
    u = np.asarray(u, dtype=float)
    if np.any((u < 0) | (u >= 1)):
        raise ValueError("hyp2f1 is implemented for 0 <= u < 1")
    out = np.empty(u.shape, dtype=complex)
    near = u <= 0.5
    if near.any():
        out[near] = _pfq_series([a, b], [c], u[near])
    far = ~near
    if far.any():
        s = c - a - b
        if complex(s).imag == 0 and float(complex(s).real).is_integer():
            raise PoleError("connection formula needs c - a - b non-integer")
        v = 1.0 - u[far]
        g1 = _gamma_ratio([c, s], [c - a, c - b])
        g2 = _gamma_ratio([c, -s], [a, b])
        f1 = _pfq_series([a, b], [a + b - c + 1], v)
        f2 = _pfq_series([c - a, c - b], [s + 1], v)
        out[far] = g1 * f1 + g2 * np.exp(s * np.log(v)) * f2
    return out if out.ndim else complex(out)


# ---------------------------------------------------------------------------
# complementary error function

_ERFC_SPLIT = 1.5
_CF_TERMS = 400


def _erf_series(x):
    # erf(x) = 2/sqrt(pi) exp(-x^2) sum 2^n x^(2n+1) / (2n+1)!!  (positive terms)
    term = x.copy()
    total = x.copy()
    x2 = x * x
    for n in range(1, 200):
        term = term * 2 * x2 / (2 * n + 1)
        total = total + term
        if np.all(term <= 1e-17 * total):
            break
    return 2.0 / math.sqrt(math.pi) * np.exp(-x2) * total


def _erfc_cf(x):
    # modified Lentz on erfc(x) = exp(-x^2)/sqrt(pi) / (x + 1/2/(x + 1/(x + 3/2/(x + ...))))
    tiny = 1e-300
    out = np.empty_like(x)
    idx = np.arange(x.size)
    xx = x.copy()
    f = xx.copy()
    C = f.copy()
    D = np.zeros_like(xx)
    for n in range(1, _CF_TERMS):
        an = n / 2.0
        D = xx + an * D
        D = np.where(D == 0, tiny, D)
        C = xx + an / C
        C = np.where(C == 0, tiny, C)
        D = 1.0 / D
        delta = C * D
        f = f * delta
        done = np.abs(delta - 1.0) < 1e-16
        if done.any():
            out[idx[done]] = f[done]
            keep = ~done
            idx, xx, f, C, D = idx[keep], xx[keep], f[keep], C[keep], D[keep]
            if idx.size == 0:
                break
    out[idx] = f
    return _exp_neg_sq(x) / (math.sqrt(math.pi) * out)


def _exp_neg_sq(x):
    # exp(-x^2) without the 2 x^2 ulp loss of rounding x*x: s = x to 1/16
    # makes s^2 exact and leaves a small correction (x - s)(x + s)
    s = np.floor(16.0 * x) / 16.0
    return np.exp(-s * s) * np.exp(-(x - s) * (x + s))


def erfc(x):
    """Complementary error function, series below |x| = 1.5, continued fraction above."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x).ravel()
    res = np.empty(ax.shape)
    lo = ax < _ERFC_SPLIT
    if lo.any():
        res[lo] = 1.0 - _erf_series(ax[lo])
    hi = ~lo & np.isfinite(ax)
    if hi.any():
        res[hi] = _erfc_cf(ax[hi])
    res[np.isinf(ax)] = 0.0
    res = res.reshape(x.shape)
    out = np.where(x < 0, 2.0 - res, res)
    return out if out.ndim else float(out)
