"""Solutions of the fourth Painleve equation used to deform the oscillator.

    w'' = (w')^2 / (2w) + 3/2 w^3 + 4 y w^2 + 2 (y^2 - alpha) w + beta / w

Three families are built here: the Riccati family (with the erfc and
pseudo-Hermite special cases), the Okamoto rational family and the
nonlinear bound states generated by a Backlund recursion. Every solution
exposes w, w', w'' analytically together with the antiderivative
int_0^y w, which is what the zero modes need.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Union

import numpy as np
from scipy.special import gamma as gamma_fn

from .errors import AccuracyError, BranchError, ConstraintError, SingularSolutionError
from .specfun import ExactPolynomial, erfc, kummer_1F1, okamoto, pseudo_hermite
from .taylor import Taylor, polynomial, solve_polynomial_ode

__all__ = [
    "PhysicalParams",
    "PainleveParams",
    "RiccatiGeneral",
    "Erfc",
    "PseudoHermite",
    "Okamoto",
    "NonlinearBound",
    "Hierarchy",
    "PainleveSolution",
    "params_from_physical",
    "riccati_physical",
    "riccati_ratio_bound",
    "riccati_solution",
    "erfc_solution",
    "pseudo_hermite_solution",
    "okamoto_solution",
    "nonlinear_bound_solution",
    "build_solution",
    "seed_jet",
    "backlund_step",
    "nonlinear_bound_jet",
    "okamoto_zero_mode_numerators",
    "w_series",
    "eta_series",
    "residual",
    "CERT_WINDOW",
]

CERT_WINDOW = (-6.0, 6.0)
_CERT_POINTS = 1000
_SCAN_HALFWIDTH = 12.0
_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class PhysicalParams:
    lam: float
    gamma: float
    d: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ConstraintError(f"lambda must be positive, got {self.lam}")
        if self.d > 1e-12 * max(1.0, self.lam**2):
            raise ConstraintError(f"reducible factorization needs d <= 0, got {self.d}")

    @property
    def sqrt_neg_d(self) -> float:
        return math.sqrt(max(-self.d, 0.0))

    @property
    def eps1(self) -> float:
        return self.gamma - self.sqrt_neg_d

    @property
    def eps2(self) -> float:
        return self.gamma + self.sqrt_neg_d


@dataclass(frozen=True)
class PainleveParams:
    alpha: float
    beta: float


def params_from_physical(phys: PhysicalParams) -> PainleveParams:
    return PainleveParams(phys.gamma / phys.lam + 1.0, 2.0 * phys.d / phys.lam**2)


@dataclass(frozen=True)
class RiccatiGeneral:
    mu: int
    k_a: float
    k_b: float


@dataclass(frozen=True)
class Erfc:
    k: float


@dataclass(frozen=True)
class PseudoHermite:
    N: int


@dataclass(frozen=True)
class Okamoto:
    M: int


@dataclass(frozen=True)
class NonlinearBound:
    """Level-N bound state with level-N amplitude k (seed amplitude k*sqrt(N!))."""

    N: int
    k: float

    @property
    def k0(self) -> float:
        return self.k * math.sqrt(math.factorial(self.N))


Variant = Union[RiccatiGeneral, Erfc, PseudoHermite, Okamoto, NonlinearBound]


@dataclass(frozen=True)
class Hierarchy:
    variant: Variant
    phys: PhysicalParams

    @property
    def name(self) -> str:
        return type(self.variant).__name__


@dataclass(frozen=True)
class PainleveSolution:
    """w(y) with analytic derivatives and antiderivative.

    ``jet(y)`` returns (w, w', w''); ``antiderivative(y)`` returns int_0^y w.
    ``data`` holds family-specific pieces (polynomials, Riccati linear
    solution, bound-state evaluator) used by the zero-mode constructors.
    """

    hierarchy: Hierarchy
    params: PainleveParams
    jet: Callable = field(repr=False, compare=False)
    antiderivative: Callable = field(repr=False, compare=False)
    data: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def phys(self) -> PhysicalParams:
        return self.hierarchy.phys

    def w(self, y):
        return self.jet(y)[0]

    def dw(self, y):
        return self.jet(y)[1]

    def d2w(self, y):
        return self.jet(y)[2]

    def residual(self, y=None) -> float:
        if y is None:
            y = np.linspace(*CERT_WINDOW, _CERT_POINTS)
        w, dw, d2w = self.jet(np.asarray(y, dtype=float))
        return _residual_values(w, dw, d2w, self.params, np.asarray(y, dtype=float))

    def certify(self, tol: float = 1e-7, y=None) -> float:
        r = self.residual(y)
        if not r < tol:
            raise AccuracyError(f"Painleve IV residual {r:.3e} exceeds {tol:.1e} for {self.hierarchy.name}")
        return r

    def export_csv(self, path: str | Path, y) -> None:
        y = np.asarray(y, dtype=float)
        w, dw, _ = self.jet(y)
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["y", "w", "dw_dy"])
            for row in zip(y, w, dw):
                wr.writerow([f"{v:.17g}" for v in row])


# ---------------------------------------------------------------------------
# residual


def _residual_values(w, dw, d2w, params: PainleveParams, y) -> float:
    if np.any(w == 0) or not np.all(np.isfinite(w)):
        raise SingularSolutionError("w vanishes on the residual grid (pole in the residual)")
    rhs = dw * dw / (2 * w) + 1.5 * w**3 + 4 * y * w**2 + 2 * (y * y - params.alpha) * w + params.beta / w
    return float(np.max(np.abs(d2w - rhs)))


_D2_WEIGHTS = np.array([1 / 90, -3 / 20, 3 / 2, -49 / 18, 3 / 2, -3 / 20, 1 / 90])


def residual(w, dw, params: PainleveParams, y, d2w=None, h: float = 5e-3) -> float:
    """Max-abs Painleve IV residual of callables w, dw on the grid y.

    Without an analytic ``d2w`` the second derivative is taken from a
    sixth-order central difference of ``w`` with step ``h``.
    """
    y = np.asarray(y, dtype=float)
    wv, dwv = np.asarray(w(y), dtype=float), np.asarray(dw(y), dtype=float)
    if d2w is not None:
        d2v = np.asarray(d2w(y), dtype=float)
    else:
        d2v = sum(c * np.asarray(w(y + (j - 3) * h), dtype=float) for j, c in enumerate(_D2_WEIGHTS)) / h**2
    return _residual_values(wv, dwv, d2v, params, y)


# ---------------------------------------------------------------------------
# rational log-derivative helpers


def _logderiv_jet(p: ExactPolynomial, y):
    """(L, L', L'') with L = p'/p, evaluated in floating point."""
    p0, p1, p2, p3 = (p.derivative(k)(y) for k in range(4))
    if np.any(p0 == 0):
        raise SingularSolutionError("polynomial vanishes on the evaluation grid")
    L = p1 / p0
    L1 = p2 / p0 - L * L
    L2 = p3 / p0 - 3 * p2 * p1 / p0**2 + 2 * L**3
    return L, L1, L2


def _log_abs_ratio(p: ExactPolynomial, y):
    return np.log(np.abs(p(y) / float(p.coeffs[0]))) if p.coeffs and p.coeffs[0] != 0 else np.log(np.abs(p(y)))


# ---------------------------------------------------------------------------
# Riccati family


def riccati_physical(lam: float, gamma: float, mu: int) -> PhysicalParams:
    """Physical parameters with d fixed by the Riccati constraint."""
    return PhysicalParams(lam, gamma, -((lam * (1 + mu) + mu * gamma) ** 2))


def riccati_ratio_bound(lam: float, gamma: float, mu: int = -1) -> float:
    """Lower bound on |k_a/k_b| for a nodeless linear solution u.

    Both basis functions grow with the same power (times e^{y^2} for mu=+1);
    u keeps one sign at y -> +-inf iff |k_a| times the even amplitude beats
    |k_b| times the odd one.
    """
    g = gamma / lam
    if mu == -1:
        a_even, a_odd = 0.5 + 0.5 * g, 1.0 + 0.5 * g
    else:
        a_even, a_odd = 1.0 + 0.5 * g, 1.5 + 0.5 * g
    # a non-positive integer argument makes 1/Gamma vanish: that basis
    # function is a polynomial and never dominates
    if any(a <= 0 and float(a).is_integer() for a in (a_even, a_odd)):
        return 0.0
    return abs(gamma_fn(1.5) * gamma_fn(a_even) / (gamma_fn(0.5) * gamma_fn(a_odd)))


def _riccati_linear(lam: float, gamma: float, mu: int, k_a: float, k_b: float):
    """Evaluator y -> (u, u') for the linear problem behind the Riccati family."""
    g = gamma / lam
    if mu == -1:
        # u'' + 2y u' - 2g u = 0
        a1, a2, s = -0.5 * g, 0.5 - 0.5 * g, -1.0
    else:
        # u'' - 2y u' - 2(2+g) u = 0
        a1, a2, s = 1.0 + 0.5 * g, 1.5 + 0.5 * g, 1.0

    def ev(y):
        y = np.asarray(y, dtype=float)
        x = s * y * y
        u = np.zeros_like(y)
        du = np.zeros_like(y)
        if k_a != 0:
            u = u + k_a * kummer_1F1(a1, 0.5, x).real
            du = du + k_a * (2 * s * y) * (a1 / 0.5) * kummer_1F1(a1 + 1, 1.5, x).real
        if k_b != 0:
            f = kummer_1F1(a2, 1.5, x).real
            u = u + k_b * y * f
            du = du + k_b * (f + y * (2 * s * y) * (a2 / 1.5) * kummer_1F1(a2 + 1, 2.5, x).real)
        return u, du

    return ev


def riccati_solution(phys: PhysicalParams, mu: int, k_a: float, k_b: float, variant: Variant | None = None) -> PainleveSolution:
    """w = -(1/mu) u'/u with u = k_a u1 + k_b u2.

    w' and w'' follow from the Riccati relation
    w' = mu (w^2 + 2 y w) - 2 (1 + mu alpha), not from differencing.
    """
    if mu not in (1, -1):
        raise ConstraintError("Riccati sign mu must be +1 or -1")
    lam, gamma = phys.lam, phys.gamma
    d_req = -((lam * (1 + mu) + mu * gamma) ** 2)
    if abs(phys.d - d_req) > 1e-12 * max(1.0, abs(d_req)):
        raise ConstraintError(f"Riccati family needs d = {d_req:.12g}, got {phys.d:.12g}")
    if k_a == 0 and k_b == 0:
        raise ConstraintError("k_a and k_b cannot both vanish")
    if k_b != 0:
        bound = riccati_ratio_bound(lam, gamma, mu)
        if k_a == 0 or abs(k_a / k_b) <= bound:
            raise ConstraintError(f"|k_a/k_b| must exceed {bound:.6g} for a nodeless solution")
    params = params_from_physical(phys)
    lin = _riccati_linear(lam, gamma, mu, k_a, k_b)

    ys = np.linspace(-_SCAN_HALFWIDTH, _SCAN_HALFWIDTH, 4801)
    us, _ = lin(ys)
    if np.any(np.sign(us) != np.sign(us[len(us) // 2])) or np.any(us == 0):
        raise SingularSolutionError("linear solution u has a real zero; w would have a pole")
    u0 = float(lin(np.array([0.0]))[0][0])
    c0 = 2.0 * (1.0 + mu * params.alpha)

    def jet(y):
        y = np.asarray(y, dtype=float)
        u, du = lin(y)
        w = -mu * du / u
        dw = mu * (w * w + 2 * y * w) - c0
        d2w = mu * (2 * w * dw + 2 * w + 2 * y * dw)
        return w, dw, d2w

    def antiderivative(y):
        u, _ = lin(np.asarray(y, dtype=float))
        return -mu * np.log(u / u0)

    variant = variant or RiccatiGeneral(mu, k_a, k_b)
    return PainleveSolution(Hierarchy(variant, phys), params, jet, antiderivative, {"mu": mu, "linear": lin})


def erfc_solution(k: float, lam: float = 1.0) -> PainleveSolution:
    """w = 2 sqrt2 k^2 e^{-y^2} / (1 - sqrt(2 pi) k^2 erfc(y)), (alpha, beta) = (1, 0).

    Nodeless iff 2 sqrt(2 pi) k^2 < 1 (erfc reaches 2 at y -> -inf).
    """
    if k == 0:
        raise ConstraintError("erfc hierarchy needs k != 0")
    if not 2 * _SQRT2PI * k * k < 1:
        raise BranchError(f"erfc hierarchy needs k^2 < 1/(2 sqrt(2 pi)) = {1 / (2 * _SQRT2PI):.6g}")
    phys = PhysicalParams(lam, 0.0, 0.0)
    params = params_from_physical(phys)
    c = _SQRT2PI * k * k

    def jet(y):
        y = np.asarray(y, dtype=float)
        den = 1.0 - c * erfc(y)
        w = 2 * _SQRT2 * k * k * np.exp(-y * y) / den
        dw = -(w * w + 2 * y * w)  # Riccati relation with mu = -1, gamma = 0
        d2w = -(2 * w * dw + 2 * w + 2 * y * dw)
        return w, dw, d2w

    def antiderivative(y):
        y = np.asarray(y, dtype=float)
        return np.log((1.0 - c * erfc(y)) / (1.0 - c))

    k_a = (1.0 - c) / (2 * _SQRT2)
    data = {"mu": -1, "k_a": k_a, "k_b": k * k}
    return PainleveSolution(Hierarchy(Erfc(k), phys), params, jet, antiderivative, data)


def pseudo_hermite_solution(N: int, lam: float = 1.0) -> PainleveSolution:
    """u = H_{2N} (pseudo-Hermite), w = u'/u = 4N H_{2N-1}/H_{2N}."""
    if N < 0:
        raise ConstraintError("N must be non-negative")
    gamma = 2.0 * N * lam
    phys = PhysicalParams(lam, gamma, -gamma * gamma)
    params = params_from_physical(phys)
    u = pseudo_hermite(2 * N)
    if u.count_real_roots() != 0:
        raise SingularSolutionError("even pseudo-Hermite polynomial has real zeros")

    def jet(y):
        y = np.asarray(y, dtype=float)
        if N == 0:
            z = np.zeros_like(y)
            return z, z, z
        return _logderiv_jet(u, y)

    def antiderivative(y):
        return _log_abs_ratio(u, np.asarray(y, dtype=float))

    return PainleveSolution(Hierarchy(PseudoHermite(N), phys), params, jet, antiderivative, {"mu": -1, "u": u})


def okamoto_solution(M: int, lam: float = 1.0) -> PainleveSolution:
    """w_M = -2y/3 + d/dy ln(Q_{M+1}/Q_M), (alpha, beta) = (2M, -2/9)."""
    if M < 1:
        raise ConstraintError("Okamoto family needs M >= 1")
    phys = PhysicalParams(lam, (2 * M - 1) * lam, -(lam * lam) / 9.0)
    params = PainleveParams(2.0 * M, -2.0 / 9.0)
    q_hi, q_lo = okamoto(M + 1), okamoto(M)
    for q in (q_hi, q_lo):
        if q.count_real_roots() != 0:
            raise SingularSolutionError("Okamoto polynomial has real zeros")

    def jet(y):
        y = np.asarray(y, dtype=float)
        a0, a1, a2 = _logderiv_jet(q_hi, y)
        b0, b1, b2 = _logderiv_jet(q_lo, y)
        return -2 * y / 3 + a0 - b0, -2.0 / 3 + a1 - b1, a2 - b2

    def antiderivative(y):
        y = np.asarray(y, dtype=float)
        return -y * y / 3 + _log_abs_ratio(q_hi, y) - _log_abs_ratio(q_lo, y)

    return PainleveSolution(Hierarchy(Okamoto(M), phys), params, jet, antiderivative, {"Q_hi": q_hi, "Q_lo": q_lo})


# ---------------------------------------------------------------------------
# nonlinear bound states


def seed_jet(xi, k0: float):
    """Level-0 bound state and its first three xi-derivatives, in closed form.

    eta = k0 e^{-xi^2/4} / sqrt(1 - sqrt(2 pi) k0^2 erfc(xi/sqrt2)), for which
    eta'/eta = -xi/2 - eta^2.
    """
    xi = np.asarray(xi, dtype=float)
    rad = 1.0 - _SQRT2PI * k0 * k0 * erfc(xi / _SQRT2)
    if np.any(rad <= 0):
        raise BranchError("seed radicand is non-positive; need k0^2 < 1/(2 sqrt(2 pi))")
    e = k0 * np.exp(-xi * xi / 4) / np.sqrt(rad)
    L = -xi / 2 - e * e
    e1 = e * L
    L1 = -0.5 - 2 * e * e1
    e2 = e * (L1 + L * L)
    L2 = -2 * e1 * e1 - 2 * e * e2
    e3 = e1 * (L1 + L * L) + e * (L2 + 2 * L * L1)
    return e, e1, e2, e3


def _ode_d2(e, e1, xi, nu):
    return 3 * e**5 + 2 * xi * e**3 + (xi * xi / 4 - nu - 0.5) * e


def _ode_d3(e, e1, xi, nu):
    return 15 * e**4 * e1 + 2 * e**3 + 6 * xi * e * e * e1 + 0.5 * xi * e + (xi * xi / 4 - nu - 0.5) * e1


def backlund_step(jet, xi, N: int):
    """Map the level-N bound-state jet (eta, eta', eta'', eta''') to level N+1.

    Returns (eta, eta', eta'') at level N+1 plus the radicand D. The new
    second derivative comes from differentiating the recursion twice, so it
    is independent of the level-(N+1) equation it is later checked against.
    """
    e, e1, e2, e3 = jet
    xi = np.asarray(xi, dtype=float)
    P = xi * e + 2 * e**3 - 2 * e1
    D = N + 1 + 2 * e * e1 - xi * e * e - 2 * e**4
    if np.any(D <= 0):
        raise BranchError(f"Backlund radicand non-positive at level {N} -> {N + 1}; amplitude too large")
    P1 = e + xi * e1 + 6 * e * e * e1 - 2 * e2
    P2 = 2 * e1 + xi * e2 + 12 * e * e1 * e1 + 6 * e * e * e2 - 2 * e3
    D1 = 2 * e1 * e1 + 2 * e * e2 - e * e - 2 * xi * e * e1 - 8 * e**3 * e1
    D2 = 6 * e1 * e2 + 2 * e * e3 - 4 * e * e1 - 2 * xi * e1 * e1 - 2 * xi * e * e2 - 24 * e * e * e1 * e1 - 8 * e**3 * e2
    sD = np.sqrt(D)
    f = P / (2 * sD)
    f1 = P1 / (2 * sD) - P * D1 / (4 * D * sD)
    f2 = P2 / (2 * sD) - P1 * D1 / (2 * D * sD) - P * D2 / (4 * D * sD) + 3 * P * D1 * D1 / (8 * D * D * sD)
    return f, f1, f2, D


def nonlinear_bound_jet(xi, N: int, k0: float, full: bool = False):
    """(eta, eta', eta'') of the level-N bound state with seed amplitude k0.

    Levels below N carry their third derivative from the bound-state
    equation; the top level's second derivative comes from the recursion.
    With ``full`` the list of per-level (eta, eta') pairs and the final
    radicand are returned too.
    """
    xi = np.asarray(xi, dtype=float)
    jet = seed_jet(xi, k0)
    levels = [(jet[0], jet[1])]
    if N == 0:
        out = (jet[0], jet[1], jet[2])
        return (out, levels, None) if full else out
    D = None
    for n in range(N):
        f, f1, f2, D = backlund_step(jet, xi, n)
        levels.append((f, f1))
        if n + 1 < N:
            e2 = _ode_d2(f, f1, xi, n + 1)
            jet = (f, f1, e2, _ode_d3(f, f1, xi, n + 1))
    out = (f, f1, f2)
    return (out, levels, D) if full else out


_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)


def _cumulative_from_zero(func, y, max_step: float = 0.05):
    """int_0^y func for every entry of y via composite Gauss-Legendre."""
    y = np.asarray(y, dtype=float)
    flat = y.ravel()
    knots = np.unique(np.concatenate([flat, [0.0]]))
    # refine long gaps
    pieces = [knots[:1]]
    for a, b in zip(knots[:-1], knots[1:]):
        n = max(1, int(math.ceil((b - a) / max_step)))
        pieces.append(np.linspace(a, b, n + 1)[1:])
    nodes = np.concatenate(pieces)
    a, b = nodes[:-1], nodes[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    pts = mid[:, None] + half[:, None] * _GL_X[None, :]
    seg = (func(pts.ravel()).reshape(pts.shape) * _GL_W[None, :]).sum(axis=1) * half
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    i0 = np.searchsorted(nodes, 0.0)
    cum = cum - cum[i0]
    idx = np.searchsorted(nodes, flat)
    return cum[idx].reshape(y.shape)


def nonlinear_bound_solution(N: int, k: float, lam: float = 1.0) -> PainleveSolution:
    """w(y) = 2 sqrt2 eta^2(sqrt2 y; N) with (alpha, beta) = (2N+1, 0).

    ``k`` is the level-N amplitude; the seed amplitude is k sqrt(N!) and must
    satisfy k0^2 < 1/(2 sqrt(2 pi)).
    """
    if N < 0:
        raise ConstraintError("N must be non-negative")
    k0 = k * math.sqrt(math.factorial(N))
    if k == 0:
        raise ConstraintError("bound-state amplitude must be non-zero")
    if not k * k < 1.0 / (2 * _SQRT2PI * math.factorial(N)):
        raise BranchError(f"need k^2 < 1/(2 sqrt(2 pi) N!) = {1 / (2 * _SQRT2PI * math.factorial(N)):.6g}")
    phys = PhysicalParams(lam, 2.0 * N * lam, 0.0)
    params = params_from_physical(phys)
    # validates the radicands over a generous window
    nonlinear_bound_jet(np.linspace(-_SCAN_HALFWIDTH * _SQRT2, _SCAN_HALFWIDTH * _SQRT2, 2001), N, k0)

    def jet(y):
        y = np.asarray(y, dtype=float)
        e, e1, e2 = nonlinear_bound_jet(_SQRT2 * y, N, k0)
        w = 2 * _SQRT2 * e * e
        dw = 8 * e * e1
        d2w = 8 * _SQRT2 * (e1 * e1 + e * e2)
        return w, dw, d2w

    def eta(xi):
        return nonlinear_bound_jet(xi, N, k0)

    if N == 0:
        c = _SQRT2PI * k0 * k0

        def antiderivative(y):
            y = np.asarray(y, dtype=float)
            return np.log((1.0 - c * erfc(y)) / (1.0 - c))

    else:

        def antiderivative(y):
            return _cumulative_from_zero(lambda s: jet(s)[0], y)

    data = {"k0": k0, "eta": eta}
    return PainleveSolution(Hierarchy(NonlinearBound(N, k), phys), params, jet, antiderivative, data)


def build_solution(h: Hierarchy) -> PainleveSolution:
    v, lam = h.variant, h.phys.lam
    if isinstance(v, Erfc):
        return erfc_solution(v.k, lam)
    if isinstance(v, PseudoHermite):
        return pseudo_hermite_solution(v.N, lam)
    if isinstance(v, Okamoto):
        return okamoto_solution(v.M, lam)
    if isinstance(v, NonlinearBound):
        return nonlinear_bound_solution(v.N, v.k, lam)
    if isinstance(v, RiccatiGeneral):
        return riccati_solution(h.phys, v.mu, v.k_a, v.k_b)
    raise TypeError(f"unknown hierarchy variant {v!r}")


# ---------------------------------------------------------------------------
# Taylor series of w at arbitrary order


def eta_series(sol: PainleveSolution, y, order: int) -> Taylor:
    """Series of the bound state eta(sqrt2 y) in powers of y.

    Built in xi from eta'' = 3 eta^5 + 2 xi eta^3 + (xi^2/4 - N - 1/2) eta,
    seeded with the pointwise (eta, eta') of the Backlund construction.
    """
    v = sol.hierarchy.variant
    if not isinstance(v, NonlinearBound):
        raise TypeError("eta_series needs a nonlinear bound-state solution")
    xi = _SQRT2 * np.asarray(y, dtype=float)
    e, e1, _ = sol.data["eta"](xi)
    shift = v.N + 0.5

    def rhs(X, f):
        f2 = f * f
        return 3 * (f2 * f2 * f) + 2 * (X * f2 * f) + (X * X * 0.25 - shift) * f

    ser = solve_polynomial_ode([e, e1], rhs, xi, order)
    scale = _SQRT2 ** np.arange(order + 1).reshape((-1,) + (1,) * xi.ndim)
    return Taylor(ser.c * scale)


def w_series(sol: PainleveSolution, y, order: int) -> Taylor:
    """Taylor coefficients of w at every y through ``order``, without differencing."""
    y = np.asarray(y, dtype=float)
    v = sol.hierarchy.variant
    if isinstance(v, NonlinearBound):
        e = eta_series(sol, y, order)
        return 2 * _SQRT2 * (e * e)
    if isinstance(v, Okamoto):
        out = polynomial([0.0, -2.0 / 3.0], y, order)
        for q, sign in ((sol.data["Q_hi"], 1), (sol.data["Q_lo"], -1)):
            P = polynomial(q.to_float(), y, order + 1)
            out = out + sign * (P.deriv() / P.truncate(order))
        return out
    mu = sol.data["mu"]
    c0 = 2.0 * (1.0 + mu * sol.params.alpha)
    return solve_polynomial_ode([sol.w(y)], lambda Y, w: mu * (w * w + 2 * (Y * w)) - c0, y, order)


# ---------------------------------------------------------------------------
# Okamoto zero modes by exact polynomial ansatz


def _nullspace(rows: list[list[Fraction]], ncols: int) -> list[list[Fraction]]:
    """Exact null space by Gauss-Jordan elimination."""
    A = [r[:] for r in rows if any(r)]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(A)) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        pv = A[r][c]
        A[r] = [x / pv for x in A[r]]
        for i in range(len(A)):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
        if r == len(A):
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -A[i][fc]
        basis.append(v)
    return basis


def okamoto_zero_mode_numerators(M: int) -> list[tuple[Fraction, ExactPolynomial]]:
    """Eigenpairs (E, P) with psi = e^{-y^2/6} P / Q_{M+1}.

    psi solves -psi'' + V psi = E psi for the y-frame potential
    V = y^2 - (w' - w^2 - 2 y w + 1) of the Okamoto solution w_M. The
    equation is cleared of denominators and solved exactly for a polynomial
    P of the degree implied by the behaviour at infinity.
    """
    Q, Qm = okamoto(M + 1), okamoto(M)
    y = ExactPolynomial([0, 1])
    s1 = ExactPolynomial([0, Fraction(-1, 3)])  # s = -y^2/6, s' = -y/3
    s2 = ExactPolynomial([Fraction(-1, 3)])
    Nw = Fraction(-2, 3) * y * Q * Qm + Q.derivative() * Qm - Qm.derivative() * Q
    QQ = Q * Qm
    Vt = (y * y) * QQ * QQ - (Nw.derivative() * QQ - Nw * QQ.derivative() - Nw * Nw - 2 * y * Nw * QQ + QQ * QQ)
    Qd, Qdd = Q.derivative(), Q.derivative(2)
    QmQm, QQsq = Qm * Qm, Q * Q * Qm * Qm

    def apply(P: ExactPolynomial, E: Fraction) -> ExactPolynomial:
        P1, P2 = P.derivative(), P.derivative(2)
        T1 = (
            P2 * Q * Q
            - 2 * P1 * Qd * Q
            - P * Qdd * Q
            + 2 * P * Qd * Qd
            + 2 * s1 * Q * (P1 * Q - P * Qd)
            + (s2 + s1 * s1) * Q * Q * P
        )
        return -1 * QmQm * T1 + Vt * P - E * QQsq * P

    cases = [
        (Fraction(0), M * (M - 1)),
        (Fraction(6 * M + 2, 3), (M + 1) ** 2),
        (Fraction(6 * M + 4, 3), M * M + 2 * M + 2),
    ]
    out = []
    for E, deg in cases:
        cols = [apply(ExactPolynomial.monomial(j), E) for j in range(deg + 1)]
        nrows = max((c.degree for c in cols), default=0) + 1
        rows = [[c.coeffs[i] if i < len(c.coeffs) else Fraction(0) for c in cols] for i in range(nrows)]
        ns = _nullspace(rows, deg + 1)
        if len(ns) != 1:
            raise AccuracyError(f"Okamoto zero-mode ansatz gave a {len(ns)}-dimensional solution space at E={E}")
        P = ExactPolynomial(ns[0])
        P = P * (1 / P.leading)
        out.append((E, P))
    return out
