import csv

import numpy as np
import pytest

from conftest import hierarchy_instances
from tdpainleve.errors import BoundaryError, ConstraintError
from tdpainleve.hamiltonian import PotentialField, oscillator_potential, oscillator_state, schrodinger_state
from tdpainleve.invariant import Grid, GridFunction, build_superpotentials, decay_rate, make_grid, mode_at, norm, zero_modes
from tdpainleve.tdse import (
    PropagatorConfig,
    export_trajectory,
    fidelity,
    invariant_drift,
    invariant_expectation,
    propagate,
    propagate_trajectory,
)


def osc(x, t):
    return x * x


def test_config_validation():
    with pytest.raises(ConstraintError):
        PropagatorConfig(scheme="split-step")
    with pytest.raises(ConstraintError):
        PropagatorConfig(boundary="periodic")
    with pytest.raises(ConstraintError):
        PropagatorConfig(dt=0.0)


def test_times_must_start_at_state(erm_static):
    g = make_grid(erm_static, 1.0, n=512)
    psi = oscillator_state(erm_static, 0, g, 0.0).psi
    with pytest.raises(ConstraintError):
        propagate_trajectory(psi, osc, [0.1, 0.2])
    with pytest.raises(ConstraintError):
        propagate_trajectory(psi, osc, [0.0, 0.2, 0.1])
    with pytest.raises(ConstraintError):
        propagate(psi, osc, 0.5, 1.0)


def test_static_ground_state_picks_up_phase(erm_static):
    # H = -d^2/dx^2 + x^2 has ground energy 1
    g = make_grid(erm_static, 1.0, n=1024)
    psi = oscillator_state(erm_static, 0, g, 0.0).psi
    out = propagate(psi, osc, 0.0, 1.0, PropagatorConfig(dt=1e-3))
    ratio = np.vdot(psi.values, out.values) * g.h
    assert abs(ratio) == pytest.approx(1.0, abs=1e-6)
    assert np.angle(ratio) == pytest.approx(-1.0, abs=1e-4)


def test_norm_is_conserved(erm):
    g = make_grid(erm, 1.0, n=1024)
    psi = (oscillator_state(erm, 0, g, 0.0).psi + oscillator_state(erm, 3, g, 0.0).psi).normalized()
    V = lambda x, t: oscillator_potential(erm, x, t)
    tr = propagate_trajectory(psi, V, np.linspace(0, 0.5, 6), PropagatorConfig(dt=2e-3))
    assert max(abs(norm(s) - 1.0) for s in tr.states) < 1e-10
    assert tr.steps == 250 and len(tr.states) == 6


def test_second_order_in_time(erm):
    g = make_grid(erm, 1.0, n=512)
    psi = oscillator_state(erm, 1, g, 0.0).psi
    V = lambda x, t: oscillator_potential(erm, x, t)
    ref = propagate(psi, V, 0.0, 0.4, PropagatorConfig(dt=2.5e-4)).values
    e1 = np.max(np.abs(propagate(psi, V, 0.0, 0.4, PropagatorConfig(dt=4e-3)).values - ref))
    e2 = np.max(np.abs(propagate(psi, V, 0.0, 0.4, PropagatorConfig(dt=2e-3)).values - ref))
    assert 3.5 < e1 / e2 < 4.5


def test_parametric_oscillator_matches_exact_state(erm):
    V = lambda x, t: oscillator_potential(erm, x, t)
    phase_err = {}
    for n in (1024, 2048, 4096):
        g = make_grid(erm, 1.0, n=n)
        psi0 = oscillator_state(erm, 2, g, 0.0).psi
        tr = propagate_trajectory(psi0, V, np.linspace(0, 0.8, 5), PropagatorConfig(dt=5e-4))
        for t, s in zip(tr.times, tr.states):
            assert fidelity(s, oscillator_state(erm, 2, g, t, 0.0).psi) > 1 - 1e-6
        exact = oscillator_state(erm, 2, g, 0.8, 0.0)
        phase_err[n] = abs(np.angle(np.vdot(exact.values, tr.states[-1].values)))
    # the phase theta is predicted too; its error comes from the three-point Laplacian
    assert phase_err[4096] < 1e-4
    assert phase_err[1024] / phase_err[2048] > 3


def test_zero_mode_follows_exact_solution(erm):
    sol = hierarchy_instances()["erfc"]
    S = build_superpotentials(sol)
    times = np.linspace(0, 0.4, 3)
    g = make_grid(erm, S.lam, times, omega=decay_rate(sol), n=1024)
    m = zero_modes(S, erm, sol, 0.0, g)[0]
    tr = propagate_trajectory(m.psi, PotentialField(S, erm), times)
    for t, s in zip(times, tr.states):
        ex = schrodinger_state(S, erm, (mode_at(m, S, erm, t, g), m.Lam), t, 0.0)
        assert abs(np.vdot(ex.values, s.values) * g.h - 1.0) < 1e-5
    assert invariant_drift(tr.states, S) < 1e-5
    assert invariant_expectation(S, tr.states[0]) == pytest.approx(m.Lam, abs=1e-6)


def test_boundary_errors(erm_static):
    g = Grid(np.linspace(-3, 3, 256))
    wide = oscillator_state(erm_static, 0, g, 0.0).psi
    with pytest.raises(BoundaryError):
        propagate(wide, osc, 0.0, 0.1)
    # a fast packet runs into the edge of a window that initially contains it
    g = Grid(np.linspace(-12, 12, 1024))
    packet = GridFunction(np.exp(-(g.x**2) + 8j * g.x).astype(complex), g, 0.0, erm_static)
    with pytest.raises(BoundaryError):
        propagate(packet, lambda x, t: 0 * x, 0.0, 2.0, PropagatorConfig(dt=1e-3, check_every=10))


def test_invariant_drift_needs_two_states(erm):
    S = build_superpotentials(hierarchy_instances()["erfc"])
    g = make_grid(erm, 1.0, n=256)
    with pytest.raises(ConstraintError):
        invariant_drift([oscillator_state(erm, 0, g, 0.0).psi], S)


def test_export_trajectory(tmp_path, erm_static):
    g = make_grid(erm_static, 1.0, n=64)
    psi = oscillator_state(erm_static, 0, g, 0.0).psi
    tr = propagate_trajectory(psi, osc, [0.0, 0.1], PropagatorConfig(dt=1e-2, initial_edge_tol=1e-6))
    path = tmp_path / "traj.csv"
    export_trajectory(tr, path, every=4)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["t", "x", "re_psi", "im_psi", "abs_psi_sq"]
    assert len(rows) == 1 + 2 * 16
    r = [float(v) for v in rows[1]]
    assert r[4] == pytest.approx(r[2] ** 2 + r[3] ** 2)
