"""Initial generating functions and their coefficient views."""

import numpy as np
import pytest

from degreeflow.errors import ValidationError
from degreeflow.initial import InitialCondition


def test_polynomial_square():
    h = InitialCondition.polynomial([0, 0, 1])
    assert h(0.5) == 0.25
    assert h(1.0) == 1.0
    assert h.derivative(0.5) == pytest.approx(1.0)
    assert h.mean_degree == pytest.approx(2.0)
    np.testing.assert_allclose(h.coefficients(4), [0, 0, 1, 0, 0])


def test_polynomial_must_normalize():
    with pytest.raises(ValidationError):
        InitialCondition.polynomial([0.5, 0.2])
    with pytest.raises(ValidationError):
        InitialCondition.polynomial([0.5, -0.1, 0.6])


def test_delta():
    h = InitialCondition.delta(3)
    assert h(0.5) == 0.125
    assert h.mean_degree == pytest.approx(3.0)
    co = h.coefficients(5)
    assert co[3] == 1.0 and co.sum() == 1.0


def test_explicit_head():
    h = InitialCondition.explicit([0.25, 0.5, 0.25])
    assert h(1.0) == pytest.approx(1.0)
    assert h.mean_degree == pytest.approx(1.0)
    # h(x) = 0.25 + 0.5 x + 0.25 x^2
    assert h(0.5) == pytest.approx(0.5625)


def test_geometric():
    # tail p_k proportional to rho**-k gives h(x) = (rho - 1) / (rho - x)
    h = InitialCondition.geometric(3.0)
    assert h(0.0) == pytest.approx(2.0 / 3.0)
    assert h(0.5) == pytest.approx(0.8)
    assert h(1.0) == pytest.approx(1.0)
    assert h.mean_degree == pytest.approx(0.5)
    assert h.radius == pytest.approx(3.0)
    np.testing.assert_allclose(
        h.coefficients(3), [2 / 3, 2 / 9, 2 / 27, 2 / 81], rtol=1e-13
    )


def test_geometric_requires_radius_above_one():
    with pytest.raises(ValidationError):
        InitialCondition.geometric(1.0)
    with pytest.raises(ValidationError):
        InitialCondition.geometric(0.5)


def test_derivative_finite_difference():
    rng = np.random.default_rng(5)
    h = InitialCondition.geometric(2.5)
    for _ in range(20):
        x = rng.uniform(-1, 1)
        fd = (h(x + 1e-6) - h(x - 1e-6)) / 2e-6
        assert h.derivative(x) == pytest.approx(fd, rel=1e-7, abs=1e-8)


def test_mean_degree_matches_slope_at_one():
    for h in (
        InitialCondition.polynomial([0.1, 0.2, 0.3, 0.4]),
        InitialCondition.geometric(4.0),
        InitialCondition.delta(2),
    ):
        fd = (h(1.0) - h(1.0 - 1e-7)) / 1e-7
        assert h.mean_degree == pytest.approx(fd, rel=1e-5)
