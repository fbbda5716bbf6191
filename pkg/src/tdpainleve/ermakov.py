"""Classical layer: linear auxiliary equation, Ermakov combination, phase integral.

The auxiliary equation is q'' + 4 Omega^2(t) q = 0. Given two independent
real solutions q1, q2 with Wronskian W0 = q1 q2' - q1' q2, the combination

    sigma^2 = a q1^2 + b q1 q2 + c q2^2,   b^2 - 4ac = -16 / W0^2,

solves the Ermakov equation sigma'' + 4 Omega^2 sigma = 4 / sigma^3.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Union

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.interpolate import CubicSpline
from scipy.special import expit

from .errors import ConstraintError, DomainError, NumericalError, RangeError
from .specfun import hyp2f1

__all__ = [
    "ConstantFrequency",
    "TanhFrequency",
    "TabulatedFrequency",
    "FrequencyProfile",
    "LinearBasis",
    "ErmakovSolution",
    "solve_linear_basis",
    "integrate_linear_basis",
    "make_ermakov",
    "tanh_real_coefficients",
    "sigma",
    "phase_theta",
    "phase_integral_arctan",
    "load_profile_csv",
]

_RTOL = 1e-12
_ATOL = 1e-14
_POSITIVITY_SAMPLES = 4001


@dataclass(frozen=True)
class ConstantFrequency:
    omega0_sq: float

    def __post_init__(self):
        if not self.omega0_sq > 0:
            raise DomainError(f"Omega0^2 must be positive, got {self.omega0_sq}")

    def omega_sq(self, t):
        return np.full(np.shape(t), float(self.omega0_sq)) if np.ndim(t) else float(self.omega0_sq)


@dataclass(frozen=True)
class TanhFrequency:
    """4 Omega^2(t) = Omega1 + Omega2 tanh(slope * t)."""

    omega1: float
    omega2: float
    slope: float

    def __post_init__(self):
        if not (self.omega1 > self.omega2 > 0):
            raise DomainError("tanh profile needs Omega1 > Omega2 > 0")
        if self.slope == 0:
            raise DomainError("tanh profile needs a non-zero slope")

    def omega_sq(self, t):
        return 0.25 * (self.omega1 + self.omega2 * np.tanh(self.slope * np.asarray(t, dtype=float)))

    @property
    def mu(self) -> float:
        """Hypergeometric exponent (distinct from the Riccati sign of painleve4)."""
        s = math.sqrt(self.omega1**2 - self.omega2**2)
        return math.sqrt(0.5 * (self.omega1 + s)) / self.slope

    @property
    def r_plus(self) -> float:
        m = self.mu
        return m + self.omega2 / (2 * self.slope**2 * m)

    @property
    def r_minus(self) -> float:
        m = self.mu
        return m - self.omega2 / (2 * self.slope**2 * m)


@dataclass(frozen=True)
class TabulatedFrequency:
    """Omega^2 samples on a uniform time grid, interpolated by a cubic spline."""

    t_start: float
    dt: float
    values: tuple[float, ...]
    _spline: CubicSpline = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size < 4:
            raise DomainError("tabulated profile needs at least four samples")
        if not self.dt > 0:
            raise DomainError("tabulated profile needs a positive time step")
        if np.any(vals <= 0) or not np.all(np.isfinite(vals)):
            raise DomainError("tabulated Omega^2 samples must be finite and positive")
        t = self.t_start + self.dt * np.arange(vals.size)
        object.__setattr__(self, "_spline", CubicSpline(t, vals))

    @property
    def t_end(self) -> float:
        return self.t_start + self.dt * (len(self.values) - 1)

    def omega_sq(self, t):
        return self._spline(np.asarray(t, dtype=float))


FrequencyProfile = Union[ConstantFrequency, TanhFrequency, TabulatedFrequency]


def load_profile_csv(path: str | Path) -> TabulatedFrequency:
    """Read a two-column (t, Omega^2) CSV with uniform spacing; header optional."""
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.reader(fh):
            if not rec or rec[0].lstrip().startswith("#"):
                continue
            try:
                rows.append((float(rec[0]), float(rec[1])))
            except ValueError:
                if rows:
                    raise DomainError(f"non-numeric row in {path}: {rec}")
                continue  # header
    if len(rows) < 4:
        raise DomainError(f"{path}: need at least four samples")
    t = np.array([r[0] for r in rows])
    steps = np.diff(t)
    if np.any(steps <= 0) or np.ptp(steps) > 1e-9 * max(abs(steps[0]), 1.0):
        raise DomainError(f"{path}: time samples must be uniformly spaced")
    return TabulatedFrequency(float(t[0]), float(steps.mean()), tuple(r[1] for r in rows))


@dataclass(frozen=True)
class LinearBasis:
    """Two independent real solutions of q'' + 4 Omega^2 q = 0.

    ``evaluator(t)`` returns (q1, q2, q1', q2') as arrays. ``fallback`` is set
    when a closed form could not be evaluated and numerical integration was
    used instead.
    """

    profile: FrequencyProfile
    t0: float
    window: tuple[float, float]
    W0: float
    evaluator: Callable = field(repr=False, compare=False)
    kind: str = "closed-form"
    fallback: bool = False

    def _check(self, t):
        t = np.asarray(t, dtype=float)
        lo, hi = self.window
        slack = 1e-12 * max(1.0, abs(lo), abs(hi))
        if np.any(t < lo - slack) or np.any(t > hi + slack):
            raise RangeError(f"t outside the basis window [{lo}, {hi}]")
        return t

    def __call__(self, t):
        return self.evaluator(self._check(t))

    def omega_sq(self, t):
        return self.profile.omega_sq(t)

    def wronskian(self, t):
        q1, q2, d1, d2 = self(t)
        return q1 * d2 - d1 * q2


def _check_positive(profile: FrequencyProfile, window):
    ts = np.linspace(window[0], window[1], _POSITIVITY_SAMPLES)
    if np.any(profile.omega_sq(ts) <= 0):
        raise DomainError("Omega^2 is not positive on the whole window")


def _constant_evaluator(omega0: float, t0: float):
    w = 2.0 * omega0

    def ev(t):
        s = w * (t - t0)
        c, sn = np.cos(s), np.sin(s)
        return c, sn, -w * sn, w * c

    return ev


_LN2 = math.log(2.0)


def tanh_q1(profile: TanhFrequency, t):
    """Complex hypergeometric solution q1(t) and its time derivative."""
    k = profile.slope
    rp, rm, mu = profile.r_plus, profile.r_minus, profile.mu
    t = np.asarray(t, dtype=float)
    x = 2 * k * t
    lse = np.logaddexp(0.0, x)
    log_1mT = _LN2 - lse
    log_1pT = _LN2 + x - lse
    u = expit(-x)
    T = np.tanh(k * t)
    pref = np.exp(-0.5j * rp * log_1mT - 0.5j * rm * log_1pT)
    a, b, c = -1j * mu, 1 - 1j * mu, 1 - 1j * rp
    F = hyp2f1(a, b, c, u)
    dF = a * b / c * hyp2f1(a + 1, b + 1, c + 1, u)
    dpref = pref * (0.5j * k) * (rp * (1 + T) - rm * (1 - T))
    du = -2 * k * u * (1 - u)
    return pref * F, dpref * F + pref * dF * du


def _tanh_evaluator(profile: TanhFrequency):
    def ev(t):
        q, dq = tanh_q1(profile, t)
        return q.real, q.imag, dq.real, dq.imag

    return ev


def _ode_evaluator(profile: FrequencyProfile, t0: float, window, y0, rtol=_RTOL, atol=_ATOL):
    def rhs(t, y):
        w = -4.0 * profile.omega_sq(t)
        return [y[2], y[3], w * y[0], w * y[1]]

    pieces = []
    lo, hi = window
    if hi > t0:
        pieces.append(solve_ivp(rhs, (t0, hi), y0, method="DOP853", rtol=rtol, atol=atol, dense_output=True))
    if lo < t0:
        pieces.append(solve_ivp(rhs, (t0, lo), y0, method="DOP853", rtol=rtol, atol=atol, dense_output=True))
    for p in pieces:
        if not p.success:
            raise NumericalError(f"linear-basis integration failed: {p.message}")
    fwd = pieces[0] if hi > t0 else None
    bwd = pieces[-1] if lo < t0 else None
    y0 = np.asarray(y0, dtype=float)

    def ev(t):
        t_arr = np.asarray(t, dtype=float)
        flat = np.atleast_1d(t_arr).ravel()
        out = np.repeat(y0[:, None], flat.size, axis=1)
        up, down = flat > t0, flat < t0
        if up.any():
            out[:, up] = fwd.sol(flat[up])
        if down.any():
            out[:, down] = bwd.sol(flat[down])
        if t_arr.ndim == 0:
            return tuple(float(o[0]) for o in out)
        return tuple(o.reshape(t_arr.shape) for o in out)

    return ev


def integrate_linear_basis(profile: FrequencyProfile, t0: float, window, initial, rtol=_RTOL, atol=_ATOL) -> LinearBasis:
    """Numerically integrated basis from ``initial = (q1, q2, q1', q2')`` at t0."""
    window = (float(window[0]), float(window[1]))
    y0 = [float(v) for v in initial]
    W0 = y0[0] * y0[3] - y0[2] * y0[1]
    if W0 == 0:
        raise ConstraintError("initial data are linearly dependent")
    ev = _ode_evaluator(profile, float(t0), window, y0, rtol, atol)
    return LinearBasis(profile, float(t0), window, W0, ev, kind="integrated")


def solve_linear_basis(profile: FrequencyProfile, t0: float, window) -> LinearBasis:
    """Real fundamental pair for the given frequency profile.

    Constant: q1 = cos 2 Omega0 (t - t0), q2 = sin 2 Omega0 (t - t0), W0 = 2 Omega0.
    Tanh: real and imaginary parts of the hypergeometric solution, so that
    W0 = q1 q2' - q1' q2 = slope * r_plus (> 0). The reference time does not
    enter the closed form.
    Tabulated: integrated from q1 = 1, q2 = 0, q1' = 0, q2' = 2 Omega(t0).
    """
    lo, hi = float(window[0]), float(window[1])
    if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
        raise DomainError("window must be a finite interval with lo < hi")
    if isinstance(profile, TabulatedFrequency):
        if lo < profile.t_start - 1e-12 or hi > profile.t_end + 1e-12:
            raise RangeError("window exceeds the tabulated time range")
    if not lo <= t0 <= hi:
        raise RangeError("reference time t0 must lie inside the window")
    _check_positive(profile, (lo, hi))

    if isinstance(profile, ConstantFrequency):
        om = math.sqrt(profile.omega0_sq)
        return LinearBasis(profile, float(t0), (lo, hi), 2 * om, _constant_evaluator(om, float(t0)))

    if isinstance(profile, TanhFrequency):
        ev = _tanh_evaluator(profile)
        W0 = profile.slope * profile.r_plus
        try:
            ev(np.linspace(lo, hi, 9))
        except NumericalError:
            warnings.warn("hypergeometric series did not converge; integrating numerically", RuntimeWarning)
            q, dq = _tanh_at_reference(profile, t0)
            b = integrate_linear_basis(profile, t0, (lo, hi), (q.real, q.imag, dq.real, dq.imag))
            return LinearBasis(profile, float(t0), (lo, hi), b.W0, b.evaluator, kind="integrated", fallback=True)
        return LinearBasis(profile, float(t0), (lo, hi), W0, ev)

    om0 = math.sqrt(float(profile.omega_sq(t0)))
    b = integrate_linear_basis(profile, t0, (lo, hi), (1.0, 0.0, 0.0, 2 * om0))
    return b


def _tanh_at_reference(profile: TanhFrequency, t0: float):
    # the reference point itself may sit where the series struggles; evaluate
    # at the nearest point of moderate argument and integrate back
    q, dq = tanh_q1(profile, 0.0)
    if t0 == 0.0:
        return q, dq
    b = integrate_linear_basis(profile, 0.0, (min(0.0, t0), max(0.0, t0)), (q.real, q.imag, dq.real, dq.imag))
    q1, q2, d1, d2 = b(t0)
    return complex(q1, q2), complex(d1, d2)


def tanh_real_coefficients(profile: TanhFrequency, a: float) -> tuple[float, float]:
    """Map the symmetric complex-basis weight a to real-basis (a', c').

    With q = X + iY the nodeless combination
    2a Re(q^2) + 2 sqrt(a^2 + 1/(k r+)^2) |q|^2 equals a' X^2 + c' Y^2.
    """
    kr = profile.slope * profile.r_plus
    B = 2.0 * math.sqrt(a * a + 1.0 / (kr * kr))
    return 2 * a + B, B - 2 * a


@dataclass(frozen=True)
class ErmakovSolution:
    basis: LinearBasis
    a: float
    b: float
    c: float

    def sigma_sq(self, t):
        q1, q2, _, _ = self.basis(t)
        return self.a * q1 * q1 + self.b * q1 * q2 + self.c * q2 * q2

    def derivatives(self, t):
        """(sigma, sigma', sigma'') from the analytic derivatives of the basis."""
        q1, q2, d1, d2 = self.basis(t)
        w = -4.0 * self.basis.omega_sq(t)
        a, b, c = self.a, self.b, self.c
        S = a * q1 * q1 + b * q1 * q2 + c * q2 * q2
        dS = 2 * a * q1 * d1 + b * (d1 * q2 + q1 * d2) + 2 * c * q2 * d2
        ddS = (
            2 * a * (d1 * d1 + w * q1 * q1)
            + b * (2 * w * q1 * q2 + 2 * d1 * d2)
            + 2 * c * (d2 * d2 + w * q2 * q2)
        )
        s = np.sqrt(S)
        ds = dS / (2 * s)
        dds = ddS / (2 * s) - dS * dS / (4 * s**3)
        return s, ds, dds

    def __call__(self, t):
        s, ds, _ = self.derivatives(t)
        return s, ds

    def residual(self, t):
        s, _, dds = self.derivatives(t)
        return dds + 4 * self.basis.omega_sq(t) * s - 4 / s**3

    def omega_sq(self, t):
        return self.basis.omega_sq(t)

    @property
    def window(self):
        return self.basis.window


def make_ermakov(basis: LinearBasis, a: float, c: float, sign_b: int = 1) -> ErmakovSolution:
    """Nodeless Ermakov solution with b = sign_b * sqrt(4ac - 16/W0^2)."""
    if sign_b not in (1, -1):
        raise ConstraintError("sign_b must be +1 or -1")
    if not (a > 0 and c > 0):
        raise ConstraintError(f"need a, c > 0 (got a={a}, c={c})")
    W0 = basis.W0
    rad = 4 * a * c - 16 / W0**2
    if rad < 0:
        if rad > -1e-12 * 4 * a * c:
            rad = 0.0  # rounding at the boundary ac = 4/W0^2
        else:
            raise ConstraintError(f"need ac >= 4/W0^2 = {4 / W0**2:.6g}, got ac = {a * c:.6g}")
    return ErmakovSolution(basis, float(a), sign_b * math.sqrt(rad), float(c))


def sigma(sol: ErmakovSolution, t):
    """(sigma, sigma') at t."""
    return sol(t)


def _inv_sigma_sq(sol: ErmakovSolution):
    def f(t):
        return 1.0 / float(sol.sigma_sq(t))

    return f


def phase_theta(sol: ErmakovSolution, lam: float, t: float, t_ref: float) -> float:
    """theta(t) = -Lambda * integral_{t_ref}^{t} dt'/sigma^2 by adaptive quadrature."""
    if lam == 0:
        sol.basis._check(np.array([t, t_ref]))
        return 0.0
    sol.basis._check(np.array([t, t_ref]))
    if t == t_ref:
        return 0.0
    # split long intervals so quad sees a bounded number of oscillations
    lo, hi = sorted((float(t_ref), float(t)))
    n = max(1, int(math.ceil((hi - lo) / 0.5)))
    edges = np.linspace(lo, hi, n + 1)
    f = _inv_sigma_sq(sol)
    total = 0.0
    for e0, e1 in zip(edges[:-1], edges[1:]):
        val, _ = quad(f, e0, e1, epsabs=1e-14, epsrel=1e-13, limit=200)
        total += val
    if t < t_ref:
        total = -total
    return -lam * total


def phase_integral_arctan(sol: ErmakovSolution, t, t_ref: float, samples_per_unit: int = 400):
    """Closed-form integral of 1/sigma^2 using the arctan antiderivative.

    int dt/sigma^2 = (1/2) arctan[(W0/2)(c q2/q1 + b/2)] + const. The arctan
    jumps by pi wherever q1 vanishes; those jumps are removed by unwrapping
    along a fine path from t_ref to each requested t.
    """
    W0 = sol.basis.W0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    lo, hi = min(t.min(), t_ref), max(t.max(), t_ref)
    n = max(64, int(math.ceil((hi - lo) * samples_per_unit)) + 1)
    path = np.union1d(np.linspace(lo, hi, n), np.append(t, t_ref))
    q1, q2, _, _ = sol.basis(path)
    ang = np.arctan2(0.5 * W0 * (sol.c * q2 + 0.5 * sol.b * q1), q1)
    # the vector (q1, ...) never vanishes, so its polar angle is continuous
    ang = np.unwrap(ang)
    F = 0.5 * ang
    ref = F[np.searchsorted(path, t_ref)]
    out = F[np.searchsorted(path, t)] - ref
    return out if out.size > 1 else float(out[0])
