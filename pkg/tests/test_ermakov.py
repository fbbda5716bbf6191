import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tdpainleve.errors import ConstraintError, DomainError, RangeError
from tdpainleve.ermakov import (
    ConstantFrequency,
    TabulatedFrequency,
    TanhFrequency,
    integrate_linear_basis,
    load_profile_csv,
    make_ermakov,
    phase_integral_arctan,
    phase_theta,
    sigma,
    solve_linear_basis,
    tanh_real_coefficients,
)

mp.mp.dps = 30
FIG = TanhFrequency(15.0, 10.0, 0.5)


def mp_tanh_q1(t, p=FIG):
    """Hypergeometric solution of q'' + (Omega1 + Omega2 tanh(k t)) q = 0 in mpmath."""
    k = mp.mpf(p.slope)
    O1, O2 = mp.mpf(p.omega1), mp.mpf(p.omega2)
    mu = mp.sqrt((O1 + mp.sqrt(O1**2 - O2**2)) / 2) / k
    rp, rm = mu + O2 / (2 * k**2 * mu), mu - O2 / (2 * k**2 * mu)
    T = mp.tanh(k * t)
    return (1 - T) ** (-0.5j * rp) * (1 + T) ** (-0.5j * rm) * mp.hyp2f1(-1j * mu, 1 - 1j * mu, 1 - 1j * rp, (1 - T) / 2)


def test_constant_basis_closed_form():
    b = solve_linear_basis(ConstantFrequency(1.0), 0.0, (0.0, 10.0))
    t = np.linspace(0, 10, 1001)
    q1, q2, d1, d2 = b(t)
    assert np.allclose(q1, np.cos(2 * t), atol=1e-15) and np.allclose(q2, np.sin(2 * t), atol=1e-15)
    assert b.W0 == 2.0
    assert np.max(np.abs(b.wronskian(t) - 2.0)) < 1e-12


def test_static_solution_is_one(erm_static):
    t = np.linspace(-1, 4, 301)
    s, ds = sigma(erm_static, t)
    assert np.allclose(s, 1.0, atol=1e-15) and np.allclose(ds, 0.0, atol=1e-14)


def test_constant_sigma_matches_closed_form(erm):
    t = np.linspace(-1, 4, 501)
    s, _ = erm(t)
    a, c = 2.0, 1.0
    ref = np.sqrt((a + c) / 2 + math.sqrt(a * c - 1) * np.sin(4 * t) + (a - c) / 2 * np.cos(4 * t))
    assert np.max(np.abs(s - ref)) < 1e-14
    assert float(erm(0.0)[0]) == pytest.approx(math.sqrt(2.0), abs=1e-15)


def test_sigma_period(erm):
    t = np.linspace(-1, 4 - math.pi / 2, 400)
    assert np.max(np.abs(erm(t)[0] - erm(t + math.pi / 2)[0])) < 1e-13


def test_ermakov_residual_dense(erm):
    t = np.linspace(-1, 4, 1000)
    assert np.max(np.abs(erm.residual(t))) < 1e-8
    assert np.min(erm(t)[0]) > 0


def test_sigma_derivative_is_analytic(erm):
    t = np.linspace(0, 3, 31)
    h = 1e-5
    fd = (erm(t + h)[0] - erm(t - h)[0]) / (2 * h)
    assert np.max(np.abs(erm(t)[1] - fd)) < 1e-8


def test_make_ermakov_constraints():
    b = solve_linear_basis(ConstantFrequency(1.0), 0.0, (0.0, 1.0))
    with pytest.raises(ConstraintError):
        make_ermakov(b, 0.5, 1.0)  # ac < 4/W0^2
    with pytest.raises(ConstraintError):
        make_ermakov(b, -1.0, -2.0)
    with pytest.raises(ConstraintError):
        make_ermakov(b, 2.0, 1.0, sign_b=0)
    e = make_ermakov(b, 2.0, 1.0, sign_b=-1)
    assert e.b**2 - 4 * e.a * e.c == pytest.approx(-16 / b.W0**2)


def test_range_and_domain_errors(erm):
    with pytest.raises(RangeError):
        erm(10.0)
    with pytest.raises(DomainError):
        ConstantFrequency(-1.0)
    with pytest.raises(DomainError):
        TanhFrequency(10.0, 15.0, 0.5)
    with pytest.raises(DomainError):
        TabulatedFrequency(0.0, 0.1, (1.0, 1.0, -1.0, 1.0))


def test_tanh_closed_form_matches_mpmath():
    b = solve_linear_basis(FIG, 0.0, (-4.0, 4.0))
    assert not b.fallback
    for t in (-4.0, -1.3, 0.0, 0.7, 4.0):
        q1, q2, _, _ = b(np.array([t]))
        ref = complex(mp_tanh_q1(t))
        assert abs(complex(q1[0], q2[0]) - ref) < 1e-12


def test_tanh_solves_linear_equation():
    b = solve_linear_basis(FIG, 0.0, (-4.0, 4.0))
    t = np.linspace(-3.9, 3.9, 41)
    h = 1e-4
    q = lambda s: b(s)[0]
    dd = (q(t + h) - 2 * q(t) + q(t - h)) / h**2
    assert np.max(np.abs(dd + 4 * FIG.omega_sq(t) * q(t))) < 1e-5
    # the first derivative returned with the basis is analytic
    assert np.max(np.abs(b(t)[2] - (q(t + h) - q(t - h)) / (2 * h))) < 1e-6


def test_tanh_wronskian_sign_and_drift():
    b = solve_linear_basis(FIG, 0.0, (-4.0, 4.0))
    t = np.linspace(-4, 4, 2001)
    W = b.wronskian(t)
    assert b.W0 == pytest.approx(FIG.slope * FIG.r_plus)
    assert np.max(np.abs(W - b.W0)) < 1e-10 * abs(b.W0)


def test_tanh_closed_form_against_rk():
    b = solve_linear_basis(FIG, 0.0, (-4.0, 4.0))
    num = integrate_linear_basis(FIG, 0.0, (-4.0, 4.0), b(0.0))
    t = np.linspace(-4, 4, 1001)
    diff = np.max(np.abs(np.array(b(t)) - np.array(num(t))))
    assert diff < 1e-8


def test_tanh_sigma_matches_complex_form():
    b = solve_linear_basis(FIG, 0.0, (-4.0, 4.0))
    a = 0.5
    ap, cp = tanh_real_coefficients(FIG, a)
    e = make_ermakov(b, ap, cp)
    kr = FIG.slope * FIG.r_plus
    for t in (-3.0, 0.0, 2.5):
        q = mp_tanh_q1(t)
        ref = 2 * a * mp.re(q**2) + 2 * mp.sqrt(a * a + 1 / kr**2) * abs(q) ** 2
        assert abs(float(e.sigma_sq(t)) - float(ref)) < 1e-8
    assert np.max(np.abs(e.residual(np.linspace(-4, 4, 1000)))) < 1e-8


def test_tabulated_profile_integration(tmp_path):
    t = np.linspace(-2, 2, 401)
    path = tmp_path / "profile.csv"
    rows = "\n".join(f"{v:.17g},{1.0 + 0.2 * math.sin(v):.17g}" for v in t)
    path.write_text("t,omega_sq\n" + rows + "\n")
    prof = load_profile_csv(path)
    b = solve_linear_basis(prof, 0.0, (-2.0, 2.0))
    e = make_ermakov(b, 1.5, 1.0)
    ts = np.linspace(-2, 2, 500)
    assert np.max(np.abs(b.wronskian(ts) - b.W0)) < 1e-10 * abs(b.W0)
    # the spline interpolant is what the basis solves, so the residual is tight
    assert np.max(np.abs(e.residual(ts))) < 1e-8
    with pytest.raises(RangeError):
        solve_linear_basis(prof, 0.0, (-3.0, 2.0))


def test_ragged_profile_csv_rejected(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("0,1\n0.1,1\n0.3,1\n0.4,1\n")
    with pytest.raises(DomainError):
        load_profile_csv(path)


def test_phase_static_and_zero(erm_static, erm):
    assert phase_theta(erm_static, 2.0, 3.0, 0.5) == pytest.approx(-2.0 * 2.5, abs=1e-12)
    assert phase_theta(erm, 0.0, 3.0, 0.0) == 0.0


def test_phase_matches_arctan_and_mpmath(erm):
    for t in (0.3, 1.0, 2.2, 3.9):
        theta = phase_theta(erm, 1.0, t, 0.0)
        assert theta == pytest.approx(-phase_integral_arctan(erm, t, 0.0), abs=1e-9)
        sq = lambda s: 1 / (1.5 + mp.sin(4 * s) + 0.5 * mp.cos(4 * s))
        assert theta == pytest.approx(-float(mp.quad(sq, [0, t])), abs=1e-11)


@settings(max_examples=25, deadline=None)
@given(t1=st.floats(-0.9, 3.9), t2=st.floats(-0.9, 3.9), t3=st.floats(-0.9, 3.9))
def test_phase_is_additive(erm, t1, t2, t3):
    lhs = phase_theta(erm, 1.7, t3, t1)
    rhs = phase_theta(erm, 1.7, t2, t1) + phase_theta(erm, 1.7, t3, t2)
    assert lhs == pytest.approx(rhs, abs=1e-10)


@settings(max_examples=25, deadline=None)
@given(a=st.floats(0.3, 5.0), ratio=st.floats(1.0, 4.0), om=st.floats(0.3, 3.0), sign=st.sampled_from([1, -1]))
def test_ermakov_property_constant_frequency(a, ratio, om, sign):
    b = solve_linear_basis(ConstantFrequency(om), 0.0, (-2.0, 2.0))
    c = ratio * 4 / (b.W0**2 * a)
    e = make_ermakov(b, a, c, sign)
    t = np.linspace(-2, 2, 400)
    s = e(t)[0]
    assert np.min(s) > 0
    scale = np.max(4 / s**3)
    assert np.max(np.abs(e.residual(t))) < 1e-10 * scale
