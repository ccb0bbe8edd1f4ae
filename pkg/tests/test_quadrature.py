"""Adaptive quadrature: closed forms, scipy cross-checks, failure modes."""

import math

import numpy as np
import pytest
from scipy.integrate import quad as scipy_quad

from anmasym.errors import QuadratureFailure
from anmasym.quadrature import integrate


def test_smooth_exponential():
    e = math.e
    res = integrate(lambda x: np.exp(2 * x) / (e - 1) ** 2, 0, 1)
    truth = (e * e - 1) / (2 * (e - 1) ** 2)
    assert abs(res.value - truth) <= 1e-13
    assert res.error_estimate <= 1e-10


def test_polynomial_exact():
    res = integrate(lambda x: 3 * x ** 2, 0, 1)
    assert res.value == pytest.approx(1.0, abs=1e-14)


def test_endpoint_singularity_x_pow_minus_08():
    # integral of 0.2 x^-0.8 over [0,1] is exactly 1
    res = integrate(lambda x: 0.2 * np.power(x, -0.8), 0, 1)
    assert abs(res.value - 1.0) <= 1e-10
    # the estimate must stay conservative on the singular head
    assert abs(res.value - 1.0) <= res.error_estimate


def test_mildly_singular_sqrt():
    res = integrate(lambda x: 0.5 / np.sqrt(x), 0, 1)
    assert abs(res.value - 1.0) <= 1e-10


def test_matches_scipy_on_nontrivial_integrand():
    f = lambda x: np.exp(-x) * np.sin(7 * x) + np.power(x, 0.3)
    ours = integrate(f, 0, 1).value
    ref, _ = scipy_quad(lambda x: f(np.array([x]))[0], 0, 1, epsabs=1e-12)
    assert ours == pytest.approx(ref, abs=1e-9)


def test_general_interval():
    res = integrate(np.cos, -1.0, 2.5)
    assert res.value == pytest.approx(math.sin(2.5) - math.sin(-1.0),
                                      abs=1e-12)


@pytest.mark.parametrize("f", [
    lambda x: 0.25 * np.power(x, -2.0),   # 1/phi'^2 of pow(2)
    lambda x: np.power(x, -1.6) / 25.0,   # pushforward integrand of pow(5)
    lambda x: 0.5 / x,                    # log-divergent
])
def test_divergent_integrands_raise(f):
    with pytest.raises(QuadratureFailure):
        integrate(f, 0, 1)


def test_budget_exhaustion_raises_with_partial_value():
    # a sharp spike needs more than 45 nodes
    f = lambda x: 1.0 / (1e-8 + (x - 0.37) ** 2)
    with pytest.raises(QuadratureFailure) as err:
        integrate(f, 0, 1, tol=1e-12, max_nodes=45)
    assert err.value.nodes is not None


def test_empty_interval_raises():
    with pytest.raises(QuadratureFailure):
        integrate(np.sin, 1.0, 1.0)
