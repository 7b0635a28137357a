import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stopping.analytic_rbm import (
    RbmParams,
    kappa_roots,
    perry_lt_driftless,
    rbm_lt,
    rbm_lt_complex,
    rbm_lt_driftless,
)

SECH1 = 1 / math.cosh(1.0)

params = st.builds(
    RbmParams,
    mu=st.floats(-2, 3),
    sigma=st.floats(0.2, 3),
    x=st.floats(0, 3),
    delta=st.floats(0.05, 4),
)


@pytest.mark.parametrize(
    "mu,sigma,theta,expected",
    [(0, 1, 0.5, (-1, 1)), (1, 1, 0, (0, 2)), (1, 2, 1, (-0.5, 1.0))],
)
def test_kappa_roots(mu, sigma, theta, expected):
    k = kappa_roots(RbmParams(mu, sigma), theta)
    assert k.kappa_minus == pytest.approx(expected[0], abs=1e-15)
    assert k.kappa_plus == pytest.approx(expected[1], abs=1e-15)


def test_kappa_roots_solve_quadratic():
    p = RbmParams(0.7, 1.3)
    for th in (0.1, 1.0, 10.0):
        for k in kappa_roots(p, th):
            assert 0.5 * p.sigma**2 * k**2 - p.mu * k - th == pytest.approx(0, abs=1e-12)


def test_known_values():
    assert rbm_lt(RbmParams(0, 1, 0, 1), 0.5) == pytest.approx(SECH1, abs=1e-15)
    assert rbm_lt_driftless(1, 1, 0) == 1
    assert rbm_lt_driftless(1, 1, 0.5) == pytest.approx(0.6480543, abs=1e-7)
    assert rbm_lt_driftless(2, 2, 0.5) == pytest.approx(0.6480543, abs=1e-7)
    assert perry_lt_driftless(1, 0) == 1
    assert perry_lt_driftless(1, 1) == pytest.approx(SECH1, abs=1e-15)
    assert perry_lt_driftless(1, 2) == pytest.approx(1 / math.cosh(math.sqrt(2)), abs=1e-15)
    assert rbm_lt_driftless(1, 1, 1) == pytest.approx(0.4591, abs=1e-4)


def test_generator_ode():
    # u(y) = E_y[exp(-theta tau)] solves (sigma^2/2) u'' + mu u' = theta u, u'(0) = 0, u(barrier) = 1
    mu, sigma, delta, theta = 0.8, 1.2, 1.5, 0.7
    b = delta

    def u(y):
        return rbm_lt(RbmParams(mu, sigma, y, b - y), theta)

    h = 1e-4
    for y in (0.3, 0.7, 1.1):
        d1 = (u(y + h) - u(y - h)) / (2 * h)
        d2 = (u(y + h) - 2 * u(y) + u(y - h)) / h**2
        assert 0.5 * sigma**2 * d2 + mu * d1 - theta * u(y) == pytest.approx(0, abs=1e-5)
    assert (u(h) - u(0)) / h == pytest.approx(0, abs=1e-3)


def test_no_overflow_for_large_arguments():
    v = rbm_lt(RbmParams(1.0, 0.1, 0.0, 50.0), 1e4)
    assert v == 0.0 or (0 < v < 1e-300)
    assert math.isfinite(rbm_lt(RbmParams(-1.0, 0.1, 5.0, 50.0), 1e3))


def test_complex_and_vector_evaluation():
    p = RbmParams(0.5, 1.0, 0.2, 1.0)
    th = np.array([0.0, 0.5, 2.0])
    np.testing.assert_allclose(rbm_lt_complex(p, th).real, [rbm_lt(p, t) for t in th], rtol=1e-14)
    # transform of a real measure: F(conj z) = conj F(z)
    z = 1.3 + 2.1j
    assert rbm_lt_complex(p, np.conj(z)) == pytest.approx(np.conj(rbm_lt_complex(p, z)), rel=1e-13)


@pytest.mark.parametrize(
    "kwargs",
    [dict(mu=0, sigma=0), dict(mu=0, sigma=-1), dict(mu=0, sigma=1, x=-1), dict(mu=0, sigma=1, delta=-1),
     dict(mu=math.nan, sigma=1)],
)
def test_invalid_params(kwargs):
    with pytest.raises(ValueError):
        RbmParams(**kwargs)


def test_negative_theta_rejected():
    with pytest.raises(ValueError):
        rbm_lt(RbmParams(0, 1), -0.1)


@given(params)
def test_theta_zero_is_one(p):
    assert rbm_lt(p, 0.0) == 1.0


@given(params.map(lambda p: RbmParams(p.mu, p.sigma, p.x, 0.0)), st.floats(0, 50))
def test_zero_delta_is_one(p, theta):
    assert rbm_lt(p, theta) == 1.0


@given(params, st.floats(1e-3, 20), st.floats(1.01, 5))
def test_decreasing_in_theta(p, theta, factor):
    a, b = rbm_lt(p, theta), rbm_lt(p, theta * factor)
    assert 0 <= b <= a <= 1
    if a > 1e-250:
        assert b < a


@given(params, st.floats(0.01, 5))
def test_convex_in_theta(p, theta):
    h = 1e-3 * theta
    second = rbm_lt(p, theta + h) - 2 * rbm_lt(p, theta) + rbm_lt(p, theta - h)
    assert second >= -1e-12


@given(st.floats(0.2, 3), st.floats(0.05, 4), st.floats(0.01, 10))
def test_small_drift_limit(sigma, delta, theta):
    near = rbm_lt(RbmParams(1e-6, sigma, 0.0, delta), theta)
    assert abs(near - rbm_lt_driftless(sigma, delta, theta)) < 1e-4


@given(st.floats(0.2, 3), st.floats(0.05, 4), st.floats(0, 10))
def test_driftless_matches_general_formula(sigma, delta, theta):
    assert rbm_lt(RbmParams(0.0, sigma, 0.0, delta), theta) == pytest.approx(
        rbm_lt_driftless(sigma, delta, theta), rel=1e-12, abs=1e-300)


@given(params, st.floats(0.01, 5), st.floats(0, 1))
def test_strong_markov_factorisation(p, theta, frac):
    # hitting x + delta means first hitting every intermediate level
    mid = p.delta * frac
    whole = rbm_lt(p, theta)
    first = rbm_lt(RbmParams(p.mu, p.sigma, p.x, mid), theta)
    rest = rbm_lt(RbmParams(p.mu, p.sigma, p.x + mid, p.delta - mid), theta)
    assert whole == pytest.approx(first * rest, rel=1e-9, abs=1e-300)
