import math

import numpy as np
import pytest

from tdpainleve.ermakov import ConstantFrequency, make_ermakov, solve_linear_basis
from tdpainleve.invariant import GridFunction
from tdpainleve.painleve4 import (
    erfc_solution,
    nonlinear_bound_solution,
    okamoto_solution,
    pseudo_hermite_solution,
    riccati_physical,
    riccati_solution,
)

PERIOD = math.pi / 2  # sigma period for Omega^2 = 1, a = 2, c = 1
NB_K3 = 0.44 / math.sqrt(6)


@pytest.fixture(scope="session")
def erm():
    """Constant frequency Omega^2 = 1 with a = 2, c = 1 (oscillating sigma)."""
    return make_ermakov(solve_linear_basis(ConstantFrequency(1.0), 0.0, (-1.0, 4.0)), 2.0, 1.0)


@pytest.fixture(scope="session")
def erm_static():
    """a = c = 1: sigma is identically one."""
    return make_ermakov(solve_linear_basis(ConstantFrequency(1.0), 0.0, (-1.0, 4.0)), 1.0, 1.0)


def hierarchy_instances():
    """One representative solution per hierarchy, keyed by a short id."""
    return {
        "erfc": erfc_solution(0.3),
        "riccati-": riccati_solution(riccati_physical(1.0, 0.5, -1), -1, 1.0, 0.3),
        "riccati+": riccati_solution(riccati_physical(1.0, 0.5, 1), 1, 1.0, 0.3),
        "pseudo_hermite": pseudo_hermite_solution(2),
        "okamoto": okamoto_solution(2, 2.5),
        "nonlinear_bound": nonlinear_bound_solution(3, NB_K3),
    }


def smooth_state(rng, grid, erm, t, lam, degree=5):
    """Random polynomial times Gaussian in y, with the sigma-dot gauge, normalized."""
    s, ds = (float(v) for v in erm(t))
    y = math.sqrt(lam) * grid.x / s
    c = rng.normal(size=degree + 1) + 1j * rng.normal(size=degree + 1)
    v = sum(c[j] * y**j for j in range(degree + 1)) * np.exp(-y * y / 2 + 0.25j * ds * grid.x**2 / s)
    return GridFunction(v, grid, t, erm).normalized()


# one PASS/FAIL line per acceptance criterion, printed after the run

_ACCEPTANCE: dict[str, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        props = dict(report.user_properties)
        key = props.get("criterion")
        if key is None:
            return
        _ACCEPTANCE[key] = ("PASS" if report.passed else "FAIL", props.get("detail", ""))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE, key=lambda k: int(k.split()[0])):
        status, detail = _ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {status}  {detail}")
