import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import NB_K3, hierarchy_instances, smooth_state
from tdpainleve.errors import AccuracyError, ConstraintError, ResolutionError, SingularSolutionError
from tdpainleve.hamiltonian import oscillator_baseline
from tdpainleve.invariant import (
    Grid,
    GridFunction,
    apply_A,
    apply_Adag,
    apply_I0,
    apply_I1,
    apply_I2,
    apply_M,
    apply_M1,
    apply_M1dag,
    apply_Q,
    apply_Qdag,
    build_superpotentials,
    check_resolution,
    decay_rate,
    eigen_residual,
    export_states,
    generate_sequence,
    gram_matrix,
    grid_function,
    inner,
    make_grid,
    mode_at,
    node_count,
    norm,
    raised_state,
    termination_ratio,
    zero_modes,
)
from tdpainleve.painleve4 import nonlinear_bound_solution, riccati_physical, riccati_solution

INSTANCES = hierarchy_instances()
T = 0.7


def setup(name, erm, n=4096):
    sol = INSTANCES[name]
    S = build_superpotentials(sol)
    g = make_grid(erm, S.lam, omega=decay_rate(sol), n=n)
    return sol, S, g


# ---------------------------------------------------------------------------
# superpotentials


@pytest.mark.parametrize("name", list(INSTANCES))
def test_superpotential_identities(name):
    S = build_superpotentials(INSTANCES[name])
    z = np.linspace(-5, 5, 401)
    lam = S.lam
    assert np.allclose(S.W(z), -2 * S.G(z) - lam * z, atol=1e-13)
    assert np.allclose(S.R2(z) - S.R1(z), 4 * S.G_z(z), atol=1e-12)
    assert np.allclose(S.R2(z) - S.R1(z), -2 * S.W_z(z) - 2 * lam, atol=1e-12)
    # R1 against the closed formula in the transcendent
    y = math.sqrt(lam) * z
    w, dw, _ = S.solution.jet(y)
    ref = (lam * lam - 1) * z * z - lam * (dw - w * w - 2 * y * w + 1)
    assert np.max(np.abs(S.R1(z) - ref)) < 1e-10 * max(1.0, np.max(np.abs(ref)))
    g, d = S.phys.gamma, S.phys.d
    assert S.eps1 == pytest.approx(g - math.sqrt(-d)) and S.eps2 == pytest.approx(g + math.sqrt(-d))


def test_w1_w2_relations_when_g_nodeless():
    for sol in (INSTANCES["erfc"], nonlinear_bound_solution(0, 0.3)):
        S = build_superpotentials(sol)
        assert S.g_nodeless
        z = np.linspace(-5, 5, 201)
        G = S.G(z)
        W1, W2 = S.W1(z), S.W2(z)
        scale = np.abs(W1) + np.abs(W2)
        assert np.all(np.abs(W1 + W2 + 2 * G) <= 1e-14 * scale)
        assert np.allclose((W1 - W2) * G, S.G_z(z) - S.phys.sqrt_neg_d, rtol=1e-10, atol=0)


@pytest.mark.parametrize("name", ["okamoto", "nonlinear_bound"])
def test_w1_undefined_when_g_has_zeros(name):
    # Okamoto w changes sign; the bound-state w touches zero at the nodes of eta
    S = build_superpotentials(INSTANCES[name])
    assert not S.g_nodeless
    with pytest.raises(SingularSolutionError):
        S.W1(np.linspace(-1, 1, 5))


def test_mu_plus_one_deformation_is_harmonic_plus_constant():
    lam, gamma = 1.3, 0.4
    S = build_superpotentials(riccati_solution(riccati_physical(lam, gamma, 1), 1, 1.0, 0.3))
    z = np.linspace(-5, 5, 201)
    diff = S.R1(z) - (lam * lam - 1) * z * z
    assert np.ptp(diff) < 1e-10
    assert diff[0] == pytest.approx(lam * (3 + 2 * gamma / lam), rel=1e-12)


def test_nonlinear_bound_energies_coincide():
    S = build_superpotentials(nonlinear_bound_solution(3, NB_K3))
    assert S.eps1 == S.eps2 == S.phys.gamma == 6.0


# ---------------------------------------------------------------------------
# operators


def test_grid_validation():
    with pytest.raises(ConstraintError):
        Grid(np.linspace(0, 1, 8))
    with pytest.raises(ConstraintError):
        Grid(np.r_[np.linspace(0, 1, 20), 1.2])


def test_grid_function_validation(erm):
    g = Grid(np.linspace(-5, 5, 64))
    with pytest.raises(ConstraintError):
        grid_function(np.ones(10), g, 0.0, erm)
    with pytest.raises(ConstraintError):
        grid_function(np.full(64, np.nan), g, 0.0, erm)


def test_oscillator_invariant_spectrum(erm):
    g = make_grid(erm, 1.0)
    for n in range(6):
        psi = GridFunction(oscillator_baseline(erm, n, g.x, T).astype(complex), g, T, erm)
        assert norm(psi) == pytest.approx(1.0, abs=1e-12)
        r = apply_I0(erm, psi) - psi * (2 * n + 1)
        assert norm(r) < 1e-8
        assert node_count(psi) == n


def test_I1_linearity(erm):
    sol, S, g = setup("okamoto", erm)
    rng = np.random.default_rng(1)
    a, b = smooth_state(rng, g, erm, T, S.lam), smooth_state(rng, g, erm, T, S.lam)
    c1, c2 = 0.3 - 1.2j, 2.1 + 0.4j
    lhs = apply_I1(S, erm, a * c1 + b * c2)
    rhs = apply_I1(S, erm, a) * c1 + apply_I1(S, erm, b) * c2
    assert norm(lhs - rhs) < 1e-12 * norm(lhs)


@pytest.mark.parametrize("name", ["erfc", "okamoto", "nonlinear_bound"])
def test_first_order_adjointness(erm, name):
    sol, S, g = setup(name, erm)
    rng = np.random.default_rng(2)
    u, v = smooth_state(rng, g, erm, T, S.lam), smooth_state(rng, g, erm, T, S.lam)
    assert abs(inner(apply_Qdag(S, erm, u), v) - inner(u, apply_Q(S, erm, v))) < 1e-9
    assert abs(inner(apply_Adag(S, erm, u), v) - inner(u, apply_A(S, erm, v))) < 1e-7 * norm(apply_Adag(S, erm, u))


@pytest.mark.parametrize("name", list(INSTANCES))
def test_intertwining_relations(erm, name):
    sol, S, g = setup(name, erm)
    rng = np.random.default_rng(3)
    two_lam = 2 * S.lam
    for _ in range(5):
        psi = smooth_state(rng, g, erm, T, S.lam)
        Qp = apply_Qdag(S, erm, psi)
        r1 = apply_I1(S, erm, Qp) - apply_Qdag(S, erm, apply_I2(S, erm, psi) + psi * two_lam)
        assert norm(r1) / norm(Qp) < 1e-5
        Mp = apply_M(S, erm, psi)
        r2 = apply_I2(S, erm, Mp) - apply_M(S, erm, apply_I1(S, erm, psi))
        assert norm(r2) / norm(Mp) < 1e-5


@pytest.mark.parametrize("sol", [INSTANCES["erfc"], nonlinear_bound_solution(0, 0.3)], ids=["erfc", "bound0"])
def test_factorization_energy(erm, sol):
    S = build_superpotentials(sol)
    g = make_grid(erm, S.lam)
    rng = np.random.default_rng(4)
    psi = smooth_state(rng, g, erm, T, S.lam)
    lhs = apply_M1dag(S, erm, apply_M1(S, erm, psi)) + psi * S.eps1
    r = lhs - apply_I1(S, erm, psi)
    assert norm(r) / norm(apply_I1(S, erm, psi)) < 1e-5


def test_resolution_check(erm):
    g = Grid(np.linspace(-10, 10, 4096))
    psi = GridFunction(oscillator_baseline(erm, 0, g.x, T).astype(complex), g, T, erm)
    assert check_resolution(psi) < 1e-12
    coarse = Grid(np.linspace(-10, 10, 48))
    psi = GridFunction(oscillator_baseline(erm, 6, coarse.x, T).astype(complex), coarse, T, erm)
    with pytest.raises(ResolutionError):
        check_resolution(psi)


# ---------------------------------------------------------------------------
# zero modes and sequences


def test_okamoto_zero_modes(erm):
    sol, S, g = setup("okamoto", erm)
    modes = zero_modes(S, erm, sol, T, g)
    lam = S.lam
    assert [m.node_count for m in modes] == [0, 3, 4]
    assert [m.Lam for m in modes] == pytest.approx([0.0, 14 * lam / 3, 16 * lam / 3])
    assert all(m.residual < 1e-6 for m in modes)
    G = gram_matrix([m.psi for m in modes])
    assert np.max(np.abs(G - np.eye(3))) < 1e-6


def test_ground_state_annihilated_by_Q(erm):
    for name in ("erfc", "okamoto", "nonlinear_bound", "riccati-"):
        sol, S, g = setup(name, erm)
        phi0 = zero_modes(S, erm, sol, T, g)[0]
        assert phi0.Lam == 0.0
        assert norm(apply_Q(S, erm, phi0.psi)) < 1e-6
        assert norm(apply_A(S, erm, phi0.psi)) < 1e-5


def test_riccati_minus_two_modes(erm):
    sol, S, g = setup("riccati-", erm)
    modes = zero_modes(S, erm, sol, T, g)
    lam, gamma = S.lam, S.phys.gamma
    assert [m.Lam for m in modes] == pytest.approx([0.0, 2 * (gamma + lam)])
    assert all(m.residual < 1e-6 for m in modes)


def test_riccati_plus_reports_infinite_norm(erm):
    sol, S, g = setup("riccati+", erm)
    report = []
    modes = zero_modes(S, erm, sol, T, g, report)
    assert [m.label for m in modes] == ["oscillator"]
    assert report and report[0][1] == "infinite-norm"


def test_riccati_ladder(erm):
    sol, S, g = setup("riccati-", erm)
    m1 = zero_modes(S, erm, sol, T, g)[1]
    seq = generate_sequence(S, erm, m1, 3)
    lam, gamma = S.lam, S.phys.gamma
    assert [L for _, L in seq] == pytest.approx([2 * (gamma + lam * (n + 1)) for n in range(4)])
    assert [node_count(p) for p, _ in seq] == [1, 2, 3, 4]


def test_nonlinear_bound_sequence_terminates(erm):
    sol, S, g = setup("nonlinear_bound", erm)
    modes = zero_modes(S, erm, sol, T, g)
    assert [m.Lam for m in modes] == pytest.approx([0.0, 6.0, 8.0])
    seq = generate_sequence(S, erm, modes[0], 6)
    assert [L for _, L in seq] == pytest.approx([0.0, 2.0, 4.0, 6.0])
    assert termination_ratio(S, erm, modes[0], 3) < 1e-5
    assert [node_count(p) for p, _ in seq] == [0, 1, 2, 3]


def test_sequence_accuracy_error(erm):
    sol, S, g = setup("nonlinear_bound", erm)
    m = zero_modes(S, erm, sol, T, g)[2]
    with pytest.raises(AccuracyError):
        generate_sequence(S, erm, m, 2, tol=1e-14)


def test_raised_state_at_other_time(erm):
    sol, S, g = setup("okamoto", erm)
    m = zero_modes(S, erm, sol, T, g)[1]
    for t in (0.0, 1.1):
        psi = raised_state(S, erm, m, 2, t, g)
        assert eigen_residual(S, erm, psi, m.Lam + 4 * S.lam) < 1e-5
        assert norm(psi) == pytest.approx(1.0, abs=1e-12)


def test_mode_at_is_time_independent_eigenstate(erm):
    sol, S, g = setup("erfc", erm)
    for m in zero_modes(S, erm, sol, 0.0, g):
        for t in np.linspace(0, math.pi / 2, 5):
            assert eigen_residual(S, erm, mode_at(m, S, erm, t, g), m.Lam) < 1e-6


def test_export_states(erm, tmp_path):
    sol, S, g = setup("okamoto", erm, n=512)
    modes = zero_modes(S, erm, sol, T, g)
    paths = export_states([m.psi for m in modes], [m.label for m in modes], [m.Lam for m in modes], tmp_path, {"hierarchy": "okamoto"})
    meta = json.loads(paths[-1].read_text())
    assert meta["hierarchy"] == "okamoto" and [s["nodes"] for s in meta["states"]] == [0, 3, 4]
    rows = paths[0].read_text().splitlines()
    assert rows[0] == "x,re_psi,im_psi,abs_psi_sq" and len(rows) == 513


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), name=st.sampled_from(["erfc", "okamoto", "nonlinear_bound", "pseudo_hermite"]))
def test_shape_invariance_property(erm, seed, name):
    sol, S, g = setup(name, erm)
    psi = smooth_state(np.random.default_rng(seed), g, erm, T, S.lam)
    Ad = apply_Adag(S, erm, psi)
    r = apply_I1(S, erm, Ad) - apply_Adag(S, erm, apply_I1(S, erm, psi) + psi * (2 * S.lam))
    assert norm(r) / norm(Ad) < 1e-5
