"""Time-dependent potentials and Schrodinger solutions built on the invariant.

The Hamiltonian is H1 = -d^2/dx^2 + V1(x, t) with

    V1 = [Omega^2 + (lam^2 - 1)/sigma^4] x^2 - (lam/sigma^2)[w' - w^2 - 2 y w + 1],

y = sqrt(lam) x / sigma. The same potential is Omega^2 x^2 + R1(x/sigma)/sigma^2
with R1 taken from the superpotential; both routes are exposed so they can be
checked against each other.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import eval_hermite, gammaln

from .ermakov import ErmakovSolution, phase_theta
from .errors import ConstraintError
from .invariant import Grid, GridFunction, SuperpotentialSet

__all__ = [
    "PotentialField",
    "SchrodingerState",
    "potential_V1",
    "potential_V1_deformation",
    "potential_V2",
    "oscillator_potential",
    "schrodinger_state",
    "oscillator_baseline",
    "oscillator_state",
    "write_potential_csv",
    "read_potential_csv",
]


def _frame(erm: ErmakovSolution, t):
    s, _ = erm(t)
    return np.asarray(s, dtype=float), np.asarray(erm.omega_sq(t), dtype=float)


def potential_V1(S: SuperpotentialSet, erm: ErmakovSolution, x, t):
    """V1 from the Painleve transcendent and its analytic derivative."""
    s, om2 = _frame(erm, t)
    lam = S.lam
    x = np.asarray(x, dtype=float)
    y = math.sqrt(lam) * x / s
    w, dw, _ = S.solution.jet(y)
    return (om2 + (lam * lam - 1) / s**4) * x * x - (lam / s**2) * (dw - w * w - 2 * y * w + 1)


def potential_V1_deformation(S: SuperpotentialSet, erm: ErmakovSolution, x, t):
    """V1 = Omega^2 x^2 + R1(x/sigma)/sigma^2 with R1 = W' + W^2 - z^2."""
    s, om2 = _frame(erm, t)
    x = np.asarray(x, dtype=float)
    return om2 * x * x + S.R1(x / s) / s**2


def potential_V2(S: SuperpotentialSet, erm: ErmakovSolution, x, t):
    """Partner potential Omega^2 x^2 + R2(x/sigma)/sigma^2."""
    s, om2 = _frame(erm, t)
    x = np.asarray(x, dtype=float)
    return om2 * x * x + S.R2(x / s) / s**2


def oscillator_potential(erm: ErmakovSolution, x, t, lam: float = 1.0):
    """Parametric oscillator [Omega^2 + (lam^2 - 1)/sigma^4] x^2 (plain Omega^2 x^2 at lam = 1)."""
    s, om2 = _frame(erm, t)
    x = np.asarray(x, dtype=float)
    return (om2 + (lam * lam - 1) / s**4) * x * x


@dataclass(frozen=True)
class PotentialField:
    """V1(x, t) for one hierarchy on one Ermakov background.

    ``tabulate`` replaces the analytic R1 with a cubic spline on a fixed z
    range, which makes repeated evaluation (time stepping) cheap.
    """

    S: SuperpotentialSet
    erm: ErmakovSolution
    _spline: object = field(default=None, repr=False, compare=False)

    def omega_sq(self, t):
        return self.erm.omega_sq(t)

    def sigma(self, t):
        return self.erm(t)[0]

    def R1(self, z):
        if self._spline is not None:
            return self._spline(z)
        return self.S.R1(z)

    def __call__(self, x, t):
        if self._spline is None:
            return potential_V1(self.S, self.erm, x, t)
        s, om2 = _frame(self.erm, t)
        x = np.asarray(x, dtype=float)
        return om2 * x * x + self.R1(x / s) / s**2

    def tabulate(self, z_max: float, points: int = 40001) -> "PotentialField":
        from scipy.interpolate import CubicSpline

        z = np.linspace(-z_max, z_max, points)
        return PotentialField(self.S, self.erm, CubicSpline(z, self.S.R1(z)))

    def surface(self, x, times) -> np.ndarray:
        V = np.array([self(x, t) for t in times])
        if np.iscomplexobj(V) or not np.all(np.isfinite(V)):
            raise ConstraintError("potential is not real and finite on the requested grid")
        return V


@dataclass(frozen=True)
class SchrodingerState:
    psi: GridFunction
    Lam: float
    theta: float

    @property
    def values(self) -> np.ndarray:
        return np.exp(1j * self.theta) * self.psi.values


def schrodinger_state(S: SuperpotentialSet, erm: ErmakovSolution, mode, t: float, t_ref: float) -> SchrodingerState:
    """Attach theta(t) = -Lambda * int_{t_ref}^t dt'/sigma^2 to an invariant eigenstate.

    ``mode`` is a (GridFunction, Lambda) pair; the GridFunction must be the
    eigenstate at time t.
    """
    psi, Lam = mode
    if abs(psi.t - t) > 1e-12:
        raise ConstraintError(f"mode is evaluated at t={psi.t}, not t={t}")
    return SchrodingerState(psi, float(Lam), phase_theta(erm, float(Lam), t, t_ref))


def oscillator_baseline(erm: ErmakovSolution, n: int, x, t) -> np.ndarray:
    """Normalized n-th eigenfunction of the parametric-oscillator invariant, Lambda = 2n + 1."""
    if n < 0:
        raise ConstraintError("n must be non-negative")
    s, ds = erm(t)
    s, ds = float(s), float(ds)
    x = np.asarray(x, dtype=float)
    z = x / s
    log_norm = -0.5 * (n * math.log(2.0) + gammaln(n + 1) + 0.5 * math.log(math.pi))
    return (
        math.exp(log_norm)
        / math.sqrt(s)
        * eval_hermite(n, z)
        * np.exp(-0.5 * z * z + 0.25j * ds * x * x / s)
    )


def oscillator_state(erm: ErmakovSolution, n: int, grid: Grid, t: float, t_ref: float = 0.0) -> SchrodingerState:
    psi = GridFunction(oscillator_baseline(erm, n, grid.x, t).astype(complex), grid, float(t), erm)
    Lam = 2.0 * n + 1.0
    return SchrodingerState(psi, Lam, phase_theta(erm, Lam, t, t_ref))


def write_potential_csv(path: str | Path, x, times, V) -> None:
    """Grid CSV: header row 't\\x' then x values; one row per time."""
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["t\\x"] + [f"{v:.17g}" for v in x])
        for t, row in zip(times, V):
            wr.writerow([f"{t:.17g}"] + [f"{v:.17g}" for v in row])


def read_potential_csv(path: str | Path):
    """(x, times, V) from a file written by ``write_potential_csv``."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0] != "t\\x":
        raise ConstraintError(f"{path}: not a potential grid CSV")
    x = np.array([float(v) for v in rows[0][1:]])
    body = np.array([[float(v) for v in r] for r in rows[1:] if r])
    if body.ndim != 2 or body.shape[1] != x.size + 1:
        raise ConstraintError(f"{path}: ragged potential grid")
    return x, body[:, 0], body[:, 1:]
