import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from tdpainleve.taylor import Taylor, constant, polynomial, solve_polynomial_ode, variable

Y = sp.symbols("y")
ORDER = 8


def sympy_coeffs(expr, y0: float, order: int) -> np.ndarray:
    """c[k] = f^(k)(y0) / k! from sympy."""
    out = []
    d = expr
    for k in range(order + 1):
        out.append(float(d.subs(Y, y0)) / math.factorial(k))
        d = sp.diff(d, Y)
    return np.array(out)


def check(series: Taylor, expr, points, rtol=1e-12):
    for i, y0 in enumerate(points):
        ref = sympy_coeffs(expr, y0, series.order)
        got = np.asarray(series.c[:, i], dtype=float)
        scale = np.maximum(np.abs(ref), 1e-300) + np.max(np.abs(ref)) * 1e-15
        assert np.all(np.abs(got - ref) <= rtol * scale), (y0, got, ref)


POINTS = np.array([-1.3, -0.2, 0.0, 0.7, 2.1])


def test_arithmetic_and_exp_match_sympy():
    y = variable(POINTS, ORDER)
    f = (y * y + 1) / (y * y * y + 3) - 2 * y
    check(f, (Y**2 + 1) / (Y**3 + 3) - 2 * Y, POINTS)
    g = (-0.5 * (y * y)).exp() * (y**3)
    check(g, sp.exp(-Y**2 / 2) * Y**3, POINTS)


def test_deriv_and_integ_are_inverse():
    y = variable(POINTS, ORDER)
    f = (y * 0.3).exp() / (y * y + 2)
    back = f.deriv().integ(f.value)
    assert np.allclose(np.asarray(back.c, float), np.asarray(f.c, float), rtol=1e-15, atol=0)
    check(f.deriv(), sp.diff(sp.exp(0.3 * Y) / (Y**2 + 2), Y), POINTS)


def test_polynomial_helper():
    coeffs = [1.0, -2.0, 0.0, 0.5]
    p = polynomial(coeffs, POINTS, 5)
    check(p, 1 - 2 * Y + sp.Rational(1, 2) * Y**3, POINTS)
    assert np.all(np.asarray(p.c[4:], float) == 0)


def test_exp_value_override_scales_series():
    y = variable(POINTS, 4)
    f = y * y
    e = f.exp(value=np.ones(POINTS.size))
    ref = f.exp()
    # every coefficient carries the same factor 1 / exp(y^2)
    assert np.allclose(np.asarray(e.c * ref.c[0], float), np.asarray(ref.c, float), rtol=1e-14, atol=1e-14)


def test_ode_solver_satisfies_airy_equation():
    # f'' = y f from f(y0) = 1, f'(y0) = 0
    y0 = np.array([0.4])
    f = solve_polynomial_ode([np.array([1.0]), np.array([0.0])], lambda Yv, F: Yv * F, y0, 10)
    c = np.asarray(f.c[:, 0], float)
    # check f'' - y f = 0 order by order
    F = Taylor(c)
    lhs = F.deriv().deriv() - variable(y0, 8) * F.truncate(8)
    assert np.max(np.abs(np.asarray(lhs.c, float))) < 1e-15
    assert c[0] == 1.0 and c[1] == 0.0


def test_division_by_zero_leading_is_not_finite():
    y = variable(np.array([0.0]), 3)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = constant(1.0, 3, (1,)) / y
    assert not np.all(np.isfinite(np.asarray(q.c, float)))


def test_negative_power_rejected():
    with pytest.raises(ValueError):
        variable(POINTS, 3) ** -1


@settings(max_examples=50, deadline=None)
@given(
    a=st.lists(st.floats(-2, 2), min_size=3, max_size=3),
    b=st.lists(st.floats(-2, 2), min_size=3, max_size=3),
    y0=st.floats(-2, 2),
)
def test_product_rule_property(a, b, y0):
    pa = polynomial(a, np.array([y0]), 6)
    pb = polynomial(b, np.array([y0]), 6)
    lhs = (pa * pb).deriv()
    rhs = pa.deriv() * pb.truncate(5) + pa.truncate(5) * pb.deriv()
    assert np.allclose(np.asarray(lhs.c, float), np.asarray(rhs.c, float), rtol=1e-13, atol=1e-13)
