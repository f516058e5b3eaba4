"""First-moment trajectories: closed forms, numeric fallback, and the gap."""

import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from degreeflow.errors import DomainError
from degreeflow.model import ProcessRates, derive_riccati
from degreeflow.riccati import (
    RiccatiCoefficients,
    equilibrium,
    moment_rhs,
    solve_closed_form,
    solve_numeric,
)

FIG2 = ProcessRates(omega_r=1, omega_p=1, l_d=1, l_r=1, l_p=0,
                    n_d=1, n_r=1, n_p=1, m=3)


def _literal(coeffs, g0, ts):
    # independent route: integrate g' = -n_d g^2 - b g + c directly
    def rhs(t, y):
        return [-coeffs.n_d * y[0] ** 2 - coeffs.b * y[0] + coeffs.c]

    sol = solve_ivp(rhs, (0.0, float(ts[-1])), [g0], method="DOP853",
                    rtol=1e-12, atol=1e-14, t_eval=ts)
    assert sol.success
    return sol.y[0]


def test_logistic_reference_values():
    g = solve_closed_form(derive_riccati(FIG2), 2.0)
    assert g(0.0) == pytest.approx(2.0, abs=1e-15)
    # hand-computed from the logistic solution with roots of s^2 + 3 s - 14
    assert g(0.5) == pytest.approx(2.521046657155834, abs=1e-12)
    assert g.equilibrium == pytest.approx((-3.0 + math.sqrt(65.0)) / 2.0, abs=1e-14)


def test_logistic_against_literal_integration():
    co = derive_riccati(FIG2)
    g = solve_closed_form(co, 2.0)
    ts = np.linspace(0.01, 3.0, 40)
    ref = _literal(co, 2.0, ts)
    assert np.max(np.abs(g(ts) - ref)) < 1e-9


def test_numeric_matches_closed_form():
    co = derive_riccati(FIG2)
    g_cf = solve_closed_form(co, 2.0)
    g_num = solve_numeric(co, 2.0, 3.0, tol=1e-11)
    ts = np.linspace(0.0, 3.0, 31)
    assert np.max(np.abs(g_cf(ts) - g_num(ts))) < 5e-9


def test_double_root_branch():
    # n_d > 0 with b = c = 0 decays as g0 / (1 + n_d g0 t)
    co = RiccatiCoefficients(n_d=1.0, b=0.0, c=0.0)
    g = solve_closed_form(co, 1.5)
    ts = np.linspace(0.0, 4.0, 17)
    assert np.max(np.abs(g(ts) - 1.5 / (1.0 + 1.5 * ts))) < 1e-14
    assert g.equilibrium == 0.0


def test_linear_decay_branch():
    co = RiccatiCoefficients(n_d=0.0, b=1.0, c=2.0)
    g = solve_closed_form(co, 5.0)
    ts = np.linspace(0.0, 6.0, 25)
    exact = 2.0 + 3.0 * np.exp(-ts)
    assert np.max(np.abs(g(ts) - exact)) < 1e-13
    assert g.equilibrium == pytest.approx(2.0)


def test_affine_branch_diverges():
    co = RiccatiCoefficients(n_d=0.0, b=0.0, c=2.0)
    g = solve_closed_form(co, 0.5)
    assert g(3.0) == pytest.approx(6.5, abs=1e-14)
    assert math.isinf(g.equilibrium)
    with pytest.raises(DomainError):
        g.gap(1.0)


def test_constant_branch():
    co = RiccatiCoefficients(n_d=0.0, b=0.0, c=0.0)
    g = solve_closed_form(co, 1.25)
    assert g(10.0) == 1.25


def test_rejects_nonpositive_start():
    co = derive_riccati(FIG2)
    for g0 in (0.0, -1.0):
        with pytest.raises(DomainError):
            solve_closed_form(co, g0)


def test_derivative_satisfies_equation():
    co = derive_riccati(FIG2)
    g = solve_closed_form(co, 2.0)
    ts = np.linspace(0.0, 3.0, 13)
    lhs = g.derivative(ts)
    rhs = moment_rhs(co, g(ts))
    assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_gap_matches_subtraction_when_accurate():
    g = solve_closed_form(derive_riccati(FIG2), 2.0)
    for t in (0.0, 0.25, 0.5, 1.0):
        direct = g(t) - g.equilibrium
        assert g.gap(t) == pytest.approx(direct, abs=1e-12)


def test_gap_keeps_relative_accuracy_late():
    # subtraction dies at machine epsilon; the gap keeps the exponential law
    co = derive_riccati(FIG2)
    g = solve_closed_form(co, 2.0)
    sigma = math.sqrt(co.b**2 + 4.0 * co.n_d * co.c)
    for t in (2.0, 3.0):
        ratio = g.gap(t) / g.gap(t + 1.0)
        assert math.log(abs(ratio)) == pytest.approx(sigma, abs=1e-5)
    late = g.gap(30.0)
    assert late != 0.0
    assert abs(late) < 1e-100


def test_equilibrium_function_branches():
    assert equilibrium(RiccatiCoefficients(0.0, 2.0, 8.0)) == pytest.approx(4.0)
    assert equilibrium(RiccatiCoefficients(1.0, 0.0, 0.0)) == 0.0
    assert math.isinf(equilibrium(RiccatiCoefficients(0.0, 0.0, 3.0)))
    # cancellation-free root: b dominant, tiny n_d*c
    val = equilibrium(RiccatiCoefficients(1e-12, 1.0, 1.0))
    assert val == pytest.approx(1.0, rel=1e-10)
