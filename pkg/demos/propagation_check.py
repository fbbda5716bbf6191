"""
Checking an analytic solution against a direct propagation
==========================================================

An invariant eigenstate becomes a solution of the time-dependent
Schrodinger equation once it carries the phase -Lambda * int dt / sigma^2.
Here the erfc-hierarchy state is stepped with Crank-Nicolson on the
potential V1(x, t) and compared with the closed form over one period.
"""

import math
import time

import numpy as np

from tdpainleve.ermakov import ConstantFrequency, make_ermakov, solve_linear_basis
from tdpainleve.hamiltonian import PotentialField, schrodinger_state
from tdpainleve.invariant import build_superpotentials, decay_rate, make_grid, mode_at, zero_modes
from tdpainleve.painleve4 import erfc_solution
from tdpainleve.tdse import fidelity, invariant_drift, propagate_trajectory

period = math.pi / 2
erm = make_ermakov(solve_linear_basis(ConstantFrequency(1.0), 0.0, (0.0, 2.0)), 2.0, 1.0)
sol = erfc_solution(0.3)
S = build_superpotentials(sol)
grid = make_grid(erm, S.lam, np.linspace(0, period, 201), omega=decay_rate(sol))

# the excited zero mode, so the phase is not trivial
mode = zero_modes(S, erm, sol, 0.0, grid)[-1]
print(f"propagating {mode.label} with Lambda = {mode.Lam:g} on {grid.n} points")

times = np.linspace(0, period, 9)
start = time.perf_counter()
traj = propagate_trajectory(mode.psi, PotentialField(S, erm), times)
print(f"{traj.steps} steps in {time.perf_counter() - start:.1f}s")

for t, psi in zip(times, traj.states):
    ex = schrodinger_state(S, erm, (mode_at(mode, S, erm, t, grid), mode.Lam), t, 0.0)
    exact = ex.psi.with_values(ex.values)
    phase = np.angle(np.vdot(exact.values, psi.values))
    print(f"t = {t:.3f}  theta = {ex.theta:+.4f}  1 - fidelity = {1 - fidelity(exact, psi):.1e}  phase error = {phase:+.1e}")

print("drift of <I1>: %.1e" % invariant_drift(traj.states, S))
