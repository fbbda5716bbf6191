"""Quantum invariant, ladder operators and zero modes on a spatial grid.

Frame conventions. With z = x/sigma and y = sqrt(lambda) z, every state is
written as

    phi(x, t) = exp(i sigma' x^2 / (4 sigma)) sigma^{-1/2} K(y).

The operator D = sigma d/dx - i sigma' x / 2 acts on such states as d/dz on
K, and the invariant reads I1 = -D^2 + z^2 + R1(z). All first-order
building blocks are D plus a real function of z; the ladder operators are
compositions of them:

    Q^dag = D + W,  Q = -D + W,  M1^dag = D + W1, M1 = -D + W1 (same for W2)
    M = D^2 + 2 G D + C          (regular form of M2 M1)
    A^dag = Q^dag M,  A = M^dag Q

x-derivatives are sixth-order finite differences; z-dependent coefficients
are analytic.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .ermakov import ErmakovSolution
from .errors import AccuracyError, ConstraintError, ResolutionError, SingularSolutionError
from .painleve4 import (
    Erfc,
    NonlinearBound,
    Okamoto,
    PainleveSolution,
    PhysicalParams,
    PseudoHermite,
    RiccatiGeneral,
    eta_series,
    okamoto_zero_mode_numerators,
    w_series,
)
from .stencils import derivative
from .taylor import Taylor, polynomial, variable

__all__ = [
    "SuperpotentialSet",
    "Grid",
    "GridFunction",
    "ZeroMode",
    "build_superpotentials",
    "make_grid",
    "decay_rate",
    "mode_at",
    "grid_function",
    "check_resolution",
    "high_band_fraction",
    "apply_D",
    "apply_I1",
    "apply_I0",
    "apply_I2",
    "apply_Q",
    "apply_Qdag",
    "apply_M1",
    "apply_M1dag",
    "apply_M2",
    "apply_M2dag",
    "apply_M",
    "apply_Mdag",
    "apply_A",
    "apply_Adag",
    "eigen_residual",
    "zero_modes",
    "generate_sequence",
    "raise_series",
    "raised_profiles",
    "raised_state",
    "termination_ratio",
    "gram_matrix",
    "inner",
    "norm",
    "node_count",
    "export_states",
    "SCHEMA_VERSION",
]

SCHEMA_VERSION = "1.0"
DEFAULT_POINTS = 4096
_EDGE_Y = 8.5  # Gaussian tails e^{-y^2/2} are ~1e-16 here


# ---------------------------------------------------------------------------
# superpotentials


@dataclass(frozen=True)
class SuperpotentialSet:
    """z-dependent coefficient functions built from a Painleve solution.

    G = sqrt(lam) w / 2, W = -2G - lam z, R1 from z^2 + R1 = W' + W^2,
    R2 = R1 + 4 G', B = 2G^2 + G' - (z^2 + R2) + gamma, and
    W1,2 = -G +- (G' - sqrt(-d)) / (2G) where G does not vanish.
    """

    solution: PainleveSolution
    g_nodeless: bool
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def phys(self) -> PhysicalParams:
        return self.solution.phys

    @property
    def lam(self) -> float:
        return self.phys.lam

    @property
    def eps1(self) -> float:
        return self.phys.eps1

    @property
    def eps2(self) -> float:
        return self.phys.eps2

    def _jet(self, z):
        z = np.asarray(z, dtype=float)
        key = (z.shape, hash(z.tobytes()))
        hit = self._cache.get(key)
        if hit is not None and np.array_equal(hit[0], z):
            return hit
        y = math.sqrt(self.lam) * z
        w, dw, d2w = self.solution.jet(y)
        out = (z, y, w, dw, d2w)
        if len(self._cache) > 16:
            self._cache.clear()
        self._cache[key] = out
        return out

    def G(self, z):
        _, _, w, _, _ = self._jet(z)
        return 0.5 * math.sqrt(self.lam) * w

    def G_z(self, z):
        _, _, _, dw, _ = self._jet(z)
        return 0.5 * self.lam * dw

    def W(self, z):
        _, y, w, _, _ = self._jet(z)
        return -math.sqrt(self.lam) * (w + y)

    def W_z(self, z):
        _, _, _, dw, _ = self._jet(z)
        return -self.lam * (dw + 1)

    def R1(self, z):
        """Deformation of the oscillator part: z^2 + R1 = W' + W^2."""
        z = np.asarray(z, dtype=float)
        W = self.W(z)
        return self.W_z(z) + W * W - z * z

    def R2(self, z):
        z = np.asarray(z, dtype=float)
        return self.R1(z) + 4 * self.G_z(z)

    def B(self, z):
        z = np.asarray(z, dtype=float)
        G = self.G(z)
        return 2 * G * G + self.G_z(z) - (z * z + self.R2(z)) + self.phys.gamma

    def _W12(self, z, sign):
        z = np.asarray(z, dtype=float)
        G = self.G(z)
        if np.any(G == 0) or not self.g_nodeless:
            raise SingularSolutionError("G has real zeros; W1 and W2 are undefined (use the regular M)")
        return -G + sign * (self.G_z(z) - self.phys.sqrt_neg_d) / (2 * G)

    def W1(self, z):
        return self._W12(z, +1)

    def W2(self, z):
        return self._W12(z, -1)

    def C(self, z):
        """Zeroth-order coefficient of M = D^2 + 2 G D + C."""
        z = np.asarray(z, dtype=float)
        G, Gz, lam = self.G(z), self.G_z(z), self.lam
        return -2 * G * G + Gz - 4 * lam * z * G - lam * lam * z * z + self.phys.gamma + lam

    def Cdag(self, z):
        """Zeroth-order coefficient of M^dag = D^2 - 2 G D + C^dag."""
        z = np.asarray(z, dtype=float)
        G, Gz, lam = self.G(z), self.G_z(z), self.lam
        return -2 * G * G - Gz - 4 * lam * z * G - lam * lam * z * z + self.phys.gamma + lam


def build_superpotentials(sol: PainleveSolution, scan_halfwidth: float = 12.0) -> SuperpotentialSet:
    """Superpotential set; records whether G is nodeless on a wide scan."""
    y = np.linspace(-scan_halfwidth, scan_halfwidth, 24001)
    w = sol.w(y)
    nodeless = bool(np.all(w > 0) or np.all(w < 0))
    v = sol.hierarchy.variant
    if isinstance(v, NonlinearBound) and v.N > 0:
        # w = 2 sqrt2 eta^2 touches zero at the N nodes of eta without changing sign
        nodeless = False
    return SuperpotentialSet(sol, nodeless)


# ---------------------------------------------------------------------------
# grid and grid functions


@dataclass(frozen=True)
class Grid:
    x: np.ndarray = field(repr=False)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 1 or x.size < 16:
            raise ConstraintError("grid needs at least 16 points")
        dx = np.diff(x)
        if np.ptp(dx) > 1e-9 * dx[0]:
            raise ConstraintError("grid must be uniform")
        object.__setattr__(self, "x", x)

    @property
    def h(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def L(self) -> float:
        return float(self.x[-1])


def decay_rate(sol: PainleveSolution) -> float:
    """Effective Gaussian width factor of the zero modes in y (1 or 1/3)."""
    return 1.0 / 3.0 if isinstance(sol.hierarchy.variant, Okamoto) else 1.0


def make_grid(
    erm: ErmakovSolution,
    lam: float,
    times=None,
    n: int = DEFAULT_POINTS,
    omega: float = 1.0,
    edge_y: float = _EDGE_Y,
) -> Grid:
    """Symmetric uniform grid wide enough for the widest sigma over ``times``.

    L = edge_y * max sigma / sqrt(lam * omega); omega is the Gaussian
    exponent of the slowest-decaying mode (e^{-omega y^2 / 2}).
    """
    if times is None:
        lo, hi = erm.window
        times = np.linspace(lo, hi, 401)
    s, _ = erm(np.asarray(times, dtype=float))
    smax = float(np.max(s))
    L = edge_y * smax / math.sqrt(lam * omega)
    return Grid(np.linspace(-L, L, n))


@dataclass(frozen=True)
class GridFunction:
    values: np.ndarray = field(repr=False)
    grid: Grid = field(repr=False)
    t: float
    erm: ErmakovSolution = field(repr=False)

    def with_values(self, v) -> "GridFunction":
        return GridFunction(np.asarray(v, dtype=complex), self.grid, self.t, self.erm)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        return self.with_values(self.values - other.values)

    def __mul__(self, c) -> "GridFunction":
        return self.with_values(self.values * c)

    __rmul__ = __mul__

    def normalized(self) -> "GridFunction":
        return self.with_values(self.values / norm(self))


def grid_function(values, grid: Grid, t: float, erm: ErmakovSolution) -> GridFunction:
    v = np.asarray(values, dtype=complex)
    if v.shape != grid.x.shape:
        raise ConstraintError("values do not match the grid")
    if not np.all(np.isfinite(v)):
        raise ConstraintError("grid function has non-finite samples")
    return GridFunction(v, grid, float(t), erm)


def inner(a: GridFunction, b: GridFunction) -> complex:
    """<a|b> by the trapezoid rule."""
    return complex(np.trapezoid(np.conj(a.values) * b.values, dx=a.grid.h))


def norm(a: GridFunction) -> float:
    return math.sqrt(max(inner(a, a).real, 0.0))


def high_band_fraction(psi: GridFunction) -> float:
    """Fraction of spectral power in the upper half of the resolvable band."""
    spec = np.abs(np.fft.fft(psi.values)) ** 2
    k = np.abs(np.fft.fftfreq(spec.size))
    total = spec.sum()
    return float(spec[k > 0.25].sum() / total) if total > 0 else 0.0


def check_resolution(psi: GridFunction, tol: float = 1e-12) -> float:
    """Raise ResolutionError when the high-band power fraction exceeds ``tol``.

    Sixth-order stencils need the sampled function to be far from Nyquist.
    """
    frac = high_band_fraction(psi)
    if frac > tol:
        raise ResolutionError(
            f"grid too coarse: {frac:.2e} of the spectral power lies above half Nyquist; increase grid points"
        )
    return frac


# ---------------------------------------------------------------------------
# operators


def _frame(psi: GridFunction):
    s, ds = psi.erm(psi.t)
    return float(s), float(ds), psi.grid.x


def apply_D(psi: GridFunction) -> GridFunction:
    s, ds, x = _frame(psi)
    v = psi.values
    return psi.with_values(s * derivative(v, psi.grid.h, 1) - 0.5j * ds * x * v)


def _D2(psi: GridFunction) -> np.ndarray:
    """D^2 applied with analytic expansion (avoids nesting first-derivative stencils)."""
    s, ds, x = _frame(psi)
    v, h = psi.values, psi.grid.h
    return s * s * derivative(v, h, 2) - 1j * s * ds * x * derivative(v, h, 1) - (0.5j * s * ds + 0.25 * ds * ds * x * x) * v


def _invariant(psi: GridFunction, R_j: np.ndarray) -> GridFunction:
    s, ds, x = _frame(psi)
    v, h = psi.values, psi.grid.h
    R = (0.25 * ds * ds + 1 / (s * s)) * x * x + 0.5j * ds * s
    out = -s * s * derivative(v, h, 2) + 1j * x * s * ds * derivative(v, h, 1) + (R + R_j) * v
    return psi.with_values(out)


def apply_I1(S: SuperpotentialSet, erm: ErmakovSolution, psi: GridFunction) -> GridFunction:
    """-sigma^2 psi'' + i x sigma sigma' psi' + [R(x,t) + R1(x/sigma)] psi."""
    s, _, x = _frame(psi)
    return _invariant(psi, S.R1(x / s))


def apply_I0(erm: ErmakovSolution, psi: GridFunction) -> GridFunction:
    """Parametric-oscillator invariant -D^2 + z^2."""
    return _invariant(psi, 0.0)


def apply_I2(S: SuperpotentialSet, erm: ErmakovSolution, psi: GridFunction) -> GridFunction:
    s, _, x = _frame(psi)
    return _invariant(psi, S.R2(x / s))


def _first_order(psi: GridFunction, sign: int, F: Callable) -> GridFunction:
    s, _, x = _frame(psi)
    Dpsi = apply_D(psi).values
    return psi.with_values(sign * Dpsi + F(x / s) * psi.values)


def apply_Qdag(S, erm, psi):
    return _first_order(psi, +1, S.W)


def apply_Q(S, erm, psi):
    return _first_order(psi, -1, S.W)


def apply_M1dag(S, erm, psi):
    return _first_order(psi, +1, S.W1)


def apply_M1(S, erm, psi):
    return _first_order(psi, -1, S.W1)


def apply_M2dag(S, erm, psi):
    return _first_order(psi, +1, S.W2)


def apply_M2(S, erm, psi):
    return _first_order(psi, -1, S.W2)


def apply_M(S, erm, psi):
    """Second-order block M = M2 M1 in regular form D^2 + 2 G D + C."""
    s, _, x = _frame(psi)
    z = x / s
    Dpsi = apply_D(psi).values
    return psi.with_values(_D2(psi) + 2 * S.G(z) * Dpsi + S.C(z) * psi.values)


def apply_Mdag(S, erm, psi):
    s, _, x = _frame(psi)
    z = x / s
    Dpsi = apply_D(psi).values
    return psi.with_values(_D2(psi) - 2 * S.G(z) * Dpsi + S.Cdag(z) * psi.values)


def apply_Adag(S, erm, psi):
    """Creation operator A^dag = Q^dag M."""
    return apply_Qdag(S, erm, apply_M(S, erm, psi))


def apply_A(S, erm, psi):
    """Annihilation operator A = M^dag Q."""
    return apply_Mdag(S, erm, apply_Q(S, erm, psi))


def eigen_residual(S: SuperpotentialSet, erm: ErmakovSolution, psi: GridFunction, lam_value: float) -> float:
    """||(I1 - Lambda) psi|| / ||psi||."""
    r = apply_I1(S, erm, psi) - psi * lam_value
    return norm(r) / norm(psi)


# ---------------------------------------------------------------------------
# zero modes
#
# Every zero-mode profile K(y) is written as a Taylor-series expression in
# y, so the same code gives plain values (order 0) and exact derivatives for
# raising. A^dag then acts on the series with analytic coefficients; only the
# final eigen-residual check uses grid stencils.


@dataclass(frozen=True)
class ZeroMode:
    psi: GridFunction
    Lam: float
    kind: str  # "A", "Adag" or "both": which ladder operator annihilates it
    node_count: int
    label: str = ""
    series: Callable = field(default=None, repr=False, compare=False)  # (y, order) -> Taylor
    residual: float = float("nan")

    def profile(self, y):
        return np.asarray(self.series(np.asarray(y, dtype=float), 0).value, dtype=float)


@dataclass(frozen=True)
class _Candidate:
    label: str
    E: float  # eigenvalue in units of lambda
    kind: str
    series: Callable  # (y, order) -> Taylor of the real profile K

    def profile(self, y):
        return np.asarray(self.series(np.asarray(y, dtype=float), 0).value, dtype=float)


def _phase_state(profile: Callable, S: SuperpotentialSet, erm: ErmakovSolution, grid: Grid, t: float) -> GridFunction:
    s, ds = erm(t)
    s, ds = float(s), float(ds)
    x = grid.x
    y = math.sqrt(S.lam) * x / s
    K = profile(y)
    v = np.exp(0.25j * ds * x * x / s) / math.sqrt(s) * K
    psi = GridFunction(np.asarray(v, dtype=complex), grid, float(t), erm)
    nrm = norm(psi)
    if not np.isfinite(nrm) or nrm == 0:
        raise SingularSolutionError("zero-mode profile is not normalizable on the grid")
    return psi * (1.0 / nrm)


def _clipped_exp(f: Taylor) -> Taylor:
    return f.exp(np.exp(np.clip(f.value, -745.0, 700.0)))


def _antiderivative_series(sol: PainleveSolution, y, order: int) -> Taylor:
    I0 = sol.antiderivative(y)
    if order == 0:
        return Taylor(np.asarray(I0, dtype=float)[None])
    return w_series(sol, y, order - 1).integ(I0)


def _candidates(sol: PainleveSolution) -> list[_Candidate]:
    v = sol.hierarchy.variant
    lam, gamma = sol.phys.lam, sol.phys.gamma

    def K0(y, p):
        Y = variable(y, p)
        return _clipped_exp(-0.5 * (Y * Y) - _antiderivative_series(sol, y, p))

    def gauss(y, p, width=1.0):
        Y = variable(y, p)
        return (-0.5 / width * (Y * Y)).exp()

    if isinstance(v, (RiccatiGeneral, Erfc, PseudoHermite)):
        mu = sol.data.get("mu", -1)
        if mu == 1:
            # the mu = +1 family is a shifted oscillator; its ground state is
            # the Gaussian and the universal Q-kernel candidate diverges
            return [
                _Candidate("phi_0;1", 0.0, "A", K0),
                _Candidate("oscillator", 4.0 + 2 * gamma / lam, "A", gauss),
            ]

        def K1(y, p):
            return (w_series(sol, y, p) + 2 * variable(y, p)) * gauss(y, p)

        return [
            _Candidate("phi_0", 0.0, "both", K0),
            _Candidate("phi_1", 2 * (gamma / lam + 1), "A", K1),
        ]
    if isinstance(v, Okamoto):
        Q = sol.data["Q_hi"].to_float()
        out = []
        for i, (E, P) in enumerate(okamoto_zero_mode_numerators(v.M)):
            def K(y, p, P=P.to_float()):
                return gauss(y, p, 3.0) * polynomial(P, y, p) / polynomial(Q, y, p)

            out.append(_Candidate(f"phi_0;{i + 1}", float(E), "A", K))
        return out
    if isinstance(v, NonlinearBound):
        N = v.N
        r2 = math.sqrt(2.0)

        def KN(y, p):
            return _clipped_exp(-0.5 * _antiderivative_series(sol, y, p)) * eta_series(sol, y, p)

        def KN1(y, p):
            # (xi eta + 2 eta^3 - 2 d eta/d xi) / 2 with xi = sqrt2 y
            e = eta_series(sol, y, p + 1)
            P = r2 * variable(y, p) * e + 2 * (e * e * e) - r2 * e.deriv()
            return _clipped_exp(0.5 * _antiderivative_series(sol, y, p)) * (0.5 * P)

        if N == 0:
            return [_Candidate("phi_0", 0.0, "both", K0), _Candidate("phi_1", 2.0, "A", KN1)]
        return [
            _Candidate("phi_0", 0.0, "A", K0),
            _Candidate(f"phi_{N}", 2.0 * N, "Adag", KN),
            _Candidate(f"phi_{N + 1}", 2.0 * (N + 1), "A", KN1),
        ]
    raise TypeError(f"no zero-mode construction for {v!r}")


def _finite_norm(profile: Callable, y_edge: float) -> bool:
    """Norm converges iff widening the window leaves it unchanged."""
    with np.errstate(over="ignore", invalid="ignore"):
        y1 = np.linspace(-y_edge, y_edge, 1201)
        y2 = np.linspace(-2 * y_edge, 2 * y_edge, 2401)
        n1 = np.trapezoid(profile(y1) ** 2, y1)
        n2 = np.trapezoid(profile(y2) ** 2, y2)
    if not (np.isfinite(n1) and np.isfinite(n2)) or n1 <= 0:
        return False
    return abs(n2 - n1) <= 1e-8 * n1


def zero_modes(
    S: SuperpotentialSet,
    erm: ErmakovSolution,
    sol: PainleveSolution,
    t: float,
    grid: Grid | None = None,
    report: list | None = None,
) -> list[ZeroMode]:
    """Finite-norm closed-form zero modes of the hierarchy at time t.

    Candidates whose norm keeps growing with the window are dropped and,
    if ``report`` is a list, recorded there as (label, "infinite-norm").
    """
    if grid is None:
        grid = make_grid(erm, S.lam, omega=decay_rate(sol))
    s_t = float(erm(t)[0])
    y_edge = math.sqrt(S.lam) * grid.L / s_t
    modes = []
    for c in _candidates(sol):
        if not _finite_norm(c.profile, max(y_edge, 10.0)):
            if report is not None:
                report.append((c.label, "infinite-norm"))
            continue
        psi = _phase_state(c.profile, S, erm, grid, t)
        Lam = c.E * S.lam
        res = eigen_residual(S, erm, psi, Lam)
        modes.append(ZeroMode(psi, Lam, c.kind, node_count(psi), c.label, c.series, res))
    return modes


def mode_at(mode: ZeroMode, S: SuperpotentialSet, erm: ErmakovSolution, t: float, grid: Grid | None = None) -> GridFunction:
    """Re-evaluate a zero mode's closed form at another time."""
    return _phase_state(mode.profile, S, erm, grid or mode.psi.grid, t)


def raise_series(S: SuperpotentialSet, K: Taylor, w: Taylor, y) -> Taylor:
    """A^dag on a profile series: (d/dz + W)(d^2/dz^2 + 2G d/dz + C) K.

    ``w`` is the series of the transcendent at the same points y and must
    have at least K's order plus one; the result has three orders fewer.
    """
    lam, r = S.lam, math.sqrt(S.lam)
    p = K.order
    Y = variable(y, p)
    z = Y * (1.0 / r)
    G = (0.5 * r) * w.truncate(p)
    Gz = (0.5 * lam) * w.truncate(p + 1).deriv()
    C = -2 * (G * G) + Gz - (4 * lam) * (z * G) - (lam * lam) * (z * z) + (S.phys.gamma + lam)
    W = -r * (w.truncate(p) + Y)
    dK = r * K.deriv()
    MK = r * dK.deriv() + 2 * (G * dK) + C * K
    return r * MK.deriv() + W * MK


def raised_profiles(S: SuperpotentialSet, mode: ZeroMode, y, count: int) -> list[np.ndarray]:
    """Profiles K, A^dag K, ..., (A^dag)^count K evaluated at y (unnormalized)."""
    y = np.asarray(y, dtype=float)
    p = 3 * count
    K = mode.series(y, p)
    w = w_series(S.solution, y, p + 1)
    out = [np.asarray(K.value, dtype=float)]
    for _ in range(count):
        K = raise_series(S, K, w, y)
        out.append(np.asarray(K.value, dtype=float))
    return out


def _gauge(erm: ErmakovSolution, grid: Grid, t: float):
    s, ds = erm(t)
    s, ds = float(s), float(ds)
    return np.exp(0.25j * ds * grid.x**2 / s) / math.sqrt(s), s


def raised_state(
    S: SuperpotentialSet, erm: ErmakovSolution, mode: ZeroMode, n: int, t: float, grid: Grid | None = None
) -> GridFunction:
    """Normalized (A^dag)^n applied to a zero mode, evaluated at time t."""
    grid = grid or mode.psi.grid
    g, s = _gauge(erm, grid, t)
    K = raised_profiles(S, mode, math.sqrt(S.lam) * grid.x / s, n)[-1]
    psi = GridFunction(g * K, grid, float(t), erm)
    nrm = norm(psi)
    if nrm == 0 or not np.isfinite(nrm):
        raise SingularSolutionError(f"(A^dag)^{n} annihilates {mode.label}")
    return psi * (1.0 / nrm)


def generate_sequence(
    S: SuperpotentialSet,
    erm: ErmakovSolution,
    mode: ZeroMode,
    count: int,
    tol: float = 1e-5,
    stop_ratio: float = 1e-5,
) -> list[tuple[GridFunction, float]]:
    """[(psi_n, Lambda_n)] from repeated A^dag, starting with the zero mode.

    Raising acts on the Taylor series of the profile, so it adds no
    stencil error; each raised state is checked against the grid I1. The
    list holds at most count + 1 states and stops early when
    ||A^dag psi|| / ||psi|| < stop_ratio (a finite sequence terminating).
    """
    psi0 = mode.psi
    t, grid = psi0.t, psi0.grid
    g, s = _gauge(erm, grid, t)
    profiles = raised_profiles(S, mode, math.sqrt(S.lam) * grid.x / s, count)
    out = [(psi0.normalized(), mode.Lam)]
    prev = norm(GridFunction(g * profiles[0], grid, t, erm))
    Lam = mode.Lam
    for K in profiles[1:]:
        st = GridFunction(g * K, grid, t, erm)
        nrm = norm(st)
        if nrm / prev < stop_ratio:
            break
        psi, Lam = st * (1.0 / nrm), Lam + 2 * S.lam
        res = eigen_residual(S, erm, psi, Lam)
        if res > tol:
            raise AccuracyError(
                f"eigen-residual {res:.2e} at Lambda={Lam:g} exceeds {tol:.0e}; refine the grid (more points)"
            )
        out.append((psi, Lam))
        prev = nrm
    return out


def termination_ratio(S: SuperpotentialSet, erm: ErmakovSolution, mode: ZeroMode, n: int) -> float:
    """||A^dag psi_n|| / ||psi_n|| for psi_n = (A^dag)^n of the zero mode."""
    psi0 = mode.psi
    g, s = _gauge(erm, psi0.grid, psi0.t)
    prof = raised_profiles(S, mode, math.sqrt(S.lam) * psi0.grid.x / s, n + 1)
    a = norm(GridFunction(g * prof[-1], psi0.grid, psi0.t, erm))
    b = norm(GridFunction(g * prof[-2], psi0.grid, psi0.t, erm))
    return a / b


def gram_matrix(states) -> np.ndarray:
    """|<psi_i|psi_j>| by trapezoid quadrature."""
    n = len(states)
    G = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            G[i, j] = abs(inner(states[i], states[j]))
    return G


def node_count(psi: GridFunction, floor: float = 1e-9) -> int:
    """Sign changes of the real profile after stripping the gauge and global phases."""
    s, ds, x = _frame(psi)
    v = psi.values * np.exp(-0.25j * ds * x * x / s)
    i = int(np.argmax(np.abs(v)))
    if v[i] == 0:
        return 0
    r = (v * np.conj(v[i]) / abs(v[i])).real
    keep = np.abs(r) > floor * np.max(np.abs(r))
    sg = np.sign(r[keep])
    return int(np.count_nonzero(sg[1:] != sg[:-1]))


# ---------------------------------------------------------------------------
# export


def export_states(states, labels, lams, directory: str | Path, meta: dict | None = None) -> list[Path]:
    """One CSV per state (x, Re, Im, |psi|^2) plus a JSON summary."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths = []
    summary = {"schema_version": SCHEMA_VERSION, "states": [], **(meta or {})}
    for psi, lab, L in zip(states, labels, lams):
        p = d / f"mode_{lab}.csv"
        with open(p, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["x", "re_psi", "im_psi", "abs_psi_sq"])
            for xv, v in zip(psi.grid.x, psi.values):
                wr.writerow([f"{xv:.17g}", f"{v.real:.17g}", f"{v.imag:.17g}", f"{abs(v) ** 2:.17g}"])
        paths.append(p)
        summary["states"].append({"label": lab, "Lambda": L, "t": psi.t, "nodes": node_count(psi), "file": p.name})
    jp = d / "modes.json"
    jp.write_text(json.dumps(summary, indent=2))
    paths.append(jp)
    return paths
