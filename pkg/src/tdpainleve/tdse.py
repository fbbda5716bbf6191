"""Crank-Nicolson propagation of i psi_t = (-psi_xx + V(x, t)) psi.

This is the independent check of the analytic Schrodinger solutions: an
initial eigenstate is stepped on the grid and compared against
exp(i theta(t)) phi(t).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.linalg import solve_banded

from .errors import BoundaryError, ConstraintError
from .hamiltonian import PotentialField
from .invariant import GridFunction, SuperpotentialSet, apply_I1, inner, norm

__all__ = [
    "PropagatorConfig",
    "Trajectory",
    "propagate",
    "propagate_trajectory",
    "fidelity",
    "invariant_expectation",
    "invariant_drift",
    "export_trajectory",
]

_EDGE_POINTS = 8


@dataclass(frozen=True)
class PropagatorConfig:
    """dt=None picks min(1e-4, 0.1 / max|V|)."""

    dt: float | None = None
    scheme: str = "crank-nicolson"
    boundary: str = "dirichlet"
    edge_tol: float = 1e-6
    initial_edge_tol: float = 1e-10
    check_every: int = 200

    def __post_init__(self):
        if self.scheme != "crank-nicolson":
            raise ConstraintError(f"unsupported scheme {self.scheme!r}")
        if self.boundary != "dirichlet":
            raise ConstraintError(f"unsupported boundary {self.boundary!r}")
        if self.dt is not None and not self.dt > 0:
            raise ConstraintError("dt must be positive")


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: list
    dt: float
    steps: int


def _edge_amplitude(v: np.ndarray) -> float:
    return float(max(np.max(np.abs(v[:_EDGE_POINTS])), np.max(np.abs(v[-_EDGE_POINTS:]))))


def _choose_dt(V: Callable, x: np.ndarray, times: np.ndarray, cfg: PropagatorConfig) -> float:
    if cfg.dt is not None:
        return cfg.dt
    ts = np.linspace(times[0], times[-1], 17)
    vmax = max(float(np.max(np.abs(V(x, t)))) for t in ts)
    return min(1e-4, 0.1 / vmax) if vmax > 0 else 1e-4


def _as_fast(V, x: np.ndarray, times: np.ndarray):
    # tabulate R1 over the z range the trajectory visits
    if isinstance(V, PotentialField) and V._spline is None:
        ts = np.linspace(times[0], times[-1], 401)
        smin = float(np.min(V.erm(ts)[0]))
        return V.tabulate(1.05 * float(np.max(np.abs(x))) / smin)
    return V


def propagate_trajectory(
    psi0: GridFunction,
    V: Callable,
    times,
    cfg: PropagatorConfig | None = None,
) -> Trajectory:
    """States at each of ``times`` (increasing, starting at psi0.t)."""
    cfg = cfg or PropagatorConfig()
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 1 or abs(times[0] - psi0.t) > 1e-12 or np.any(np.diff(times) <= 0):
        raise ConstraintError("times must increase and start at the initial state's time")
    grid = psi0.grid
    x, h, n = grid.x, grid.h, grid.n
    v = np.asarray(psi0.values, dtype=complex).copy()
    amp0 = _edge_amplitude(v) / max(float(np.max(np.abs(v))), 1e-300)
    if amp0 > cfg.initial_edge_tol:
        raise BoundaryError(f"initial state reaches {amp0:.1e} at the grid edge; widen the window")
    V = _as_fast(V, x, times)
    dt_max = _choose_dt(V, x, times, cfg)

    off = -1.0 / (h * h)
    states = [psi0]
    total_steps = 0
    ab = np.empty((3, n), dtype=complex)
    for t_a, t_b in zip(times[:-1], times[1:]):
        m = max(1, int(math.ceil((t_b - t_a) / dt_max - 1e-9)))
        dt = (t_b - t_a) / m
        c = 0.5j * dt
        ab[0, 1:] = c * off
        ab[0, 0] = 0
        ab[2, :-1] = c * off
        ab[2, -1] = 0
        for k in range(m):
            tm = t_a + (k + 0.5) * dt
            diag = 2.0 / (h * h) + V(x, tm)
            # right-hand side (1 - i dt H / 2) v
            rhs = (1 - c * diag) * v
            rhs[1:] -= c * off * v[:-1]
            rhs[:-1] -= c * off * v[1:]
            ab[1] = 1 + c * diag
            v = solve_banded((1, 1), ab, rhs, check_finite=False, overwrite_b=True)
            total_steps += 1
            if total_steps % cfg.check_every == 0:
                _check_edges(v, cfg, tm)
        _check_edges(v, cfg, t_b)
        states.append(GridFunction(v.copy(), grid, float(t_b), psi0.erm))
    return Trajectory(times, states, dt_max, total_steps)


def _check_edges(v, cfg, t):
    if not np.all(np.isfinite(v)):
        raise BoundaryError(f"propagation blew up by t={t:.6g}")
    amp = _edge_amplitude(v)
    if amp > cfg.edge_tol:
        raise BoundaryError(f"amplitude {amp:.1e} reached the grid edge by t={t:.6g}; widen the window")


def propagate(psi0: GridFunction, V: Callable, t0: float, t1: float, cfg: PropagatorConfig | None = None) -> GridFunction:
    if abs(t0 - psi0.t) > 1e-12:
        raise ConstraintError("t0 must equal the initial state's time")
    return propagate_trajectory(psi0, V, [t0, t1], cfg).states[-1]


def fidelity(a: GridFunction, b: GridFunction) -> float:
    """|<a|b>| / (||a|| ||b||)."""
    return abs(inner(a, b)) / (norm(a) * norm(b))


def invariant_expectation(S: SuperpotentialSet, psi: GridFunction) -> float:
    return inner(psi, apply_I1(S, psi.erm, psi)).real / inner(psi, psi).real


def invariant_drift(states, S: SuperpotentialSet, relative: bool | None = None) -> float:
    """max_t |<I1>(t) - <I1>(t0)|, relative to |<I1>(t0)| unless that is ~0."""
    if len(states) < 2:
        raise ConstraintError("need at least two states")
    e = np.array([invariant_expectation(S, p) for p in states])
    ref = e[0]
    if relative is None:
        relative = abs(ref) > 1e-8
    d = float(np.max(np.abs(e - ref)))
    return d / abs(ref) if relative else d


def export_trajectory(traj: Trajectory, path: str | Path, every: int = 1) -> None:
    """Long-format CSV: t, x, Re psi, Im psi, |psi|^2."""
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["t", "x", "re_psi", "im_psi", "abs_psi_sq"])
        for t, psi in zip(traj.times, traj.states):
            for xv, val in zip(psi.grid.x[::every], psi.values[::every]):
                wr.writerow([f"{t:.17g}", f"{xv:.17g}", f"{val.real:.17g}", f"{val.imag:.17g}", f"{abs(val) ** 2:.17g}"])
