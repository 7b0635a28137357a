import math

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from stopping.levy_scale import (
    BmDrift,
    CaballeroChaumont,
    CppExp,
    boundary_asymptotics,
    cpp_printed_rate,
    drawdown_rate,
    drawdown_survival_levy,
    levy_exponent,
    mean_max_before_drawdown,
    scale_function,
    scale_laplace_check,
    scale_w,
    scale_w_prime,
    two_sided_exit,
)

MODELS = [BmDrift(1.0, 1.0), CppExp(2.0, 1.0, 1.0), CaballeroChaumont(1.5)]

models = st.one_of(
    st.builds(BmDrift, st.floats(0.1, 3), st.floats(0.2, 3)),
    st.builds(lambda c, lam, j: CppExp(c, lam, j), st.floats(1.5, 4), st.floats(0.1, 1.0), st.floats(1.0, 3)),
    st.builds(CaballeroChaumont, st.floats(1.05, 1.95)),
)


def test_exponent_values():
    assert levy_exponent(BmDrift(1, 1), 2.0) == pytest.approx(4.0, abs=1e-15)
    assert levy_exponent(CaballeroChaumont(1.5), 1.0) == pytest.approx(1.5, rel=1e-14)
    assert levy_exponent(CppExp(2, 1, 1), 1.0) == pytest.approx(1.5, abs=1e-15)


def test_scale_values():
    assert scale_w(CaballeroChaumont(1.5), 1.0) == pytest.approx(math.sqrt(1 - math.exp(-1)), rel=1e-15)
    assert scale_w(CaballeroChaumont(1.5), 1.0) == pytest.approx(0.795060, abs=1e-6)
    assert scale_w(BmDrift(1, 1), 1.0) == pytest.approx(1 - math.exp(-2), abs=1e-15)
    assert scale_w(CppExp(2, 1, 1), 0.0) == pytest.approx(0.5, abs=1e-15)
    f = scale_function(CppExp(2, 1, 1))
    assert f(0.0) == f.w0 == 0.5
    assert f.prime(1.0) == scale_w_prime(CppExp(2, 1, 1), 1.0)


@pytest.mark.parametrize("m", MODELS)
@pytest.mark.parametrize("theta", [0.5, 1.0, 2.0, 5.0])
def test_laplace_identity(m, theta):
    chk = scale_laplace_check(m, theta)
    assert chk.rel_err < 1e-6
    assert chk.rhs == pytest.approx(1 / levy_exponent(m, theta), rel=1e-15)


@pytest.mark.parametrize("m", MODELS)
def test_laplace_identity_at_one(m):
    assert scale_laplace_check(m, 1.0).lhs == pytest.approx(1 / 1.5, rel=1e-8)


def test_two_sided_exit_values():
    assert two_sided_exit(BmDrift(1, 1), 1, 1) == pytest.approx((1 - math.exp(-2)) / (1 - math.exp(-4)), rel=1e-14)
    assert two_sided_exit(BmDrift(1, 1), 1, 1) == pytest.approx(0.880797, abs=1e-6)
    for m in MODELS:
        assert two_sided_exit(m, 1.0, 1e-12) == pytest.approx(1.0, abs=1e-9)


def test_rates():
    assert drawdown_rate(CaballeroChaumont(1.5), 1.0) == pytest.approx(0.5 / math.expm1(1), rel=1e-14)
    assert drawdown_rate(CaballeroChaumont(1.5), 1.0) == pytest.approx(0.2910, abs=1e-4)
    assert drawdown_rate(BmDrift(1, 1), 1.0) == pytest.approx(2 / math.expm1(2), rel=1e-14)
    assert drawdown_rate(BmDrift(1, 1), 1.0) == pytest.approx(0.3130353, abs=1e-7)
    # rate written out from the scale function of the compound Poisson model
    c, lam, mu, d = 2.0, 1.0, 1.0, 1.0
    rho = mu - lam / c
    expected = (lam / c) * math.exp(-rho * d) / (1 + lam / (c * mu - lam) * (1 - math.exp(-rho * d)))
    assert drawdown_rate(CppExp(c, lam, mu), d) == pytest.approx(expected, rel=1e-14)
    assert mean_max_before_drawdown(CaballeroChaumont(1.5), 1.0) == pytest.approx(math.expm1(1) / 0.5, rel=1e-14)


def test_survival():
    m = CaballeroChaumont(1.5)
    assert drawdown_survival_levy(m, 1.0, 0.0) == 1.0
    assert drawdown_survival_levy(m, 1.0, 1.0) == pytest.approx(math.exp(-0.5 / math.expm1(1)), rel=1e-14)
    assert drawdown_survival_levy(m, 1.0, 1.0) == pytest.approx(0.7475, abs=1e-4)


def test_printed_rate_disagrees():
    m = CppExp(2.0, 1.0, 1.0)
    assert cpp_printed_rate(m, 1.0) == pytest.approx(0.7707470412683991, rel=1e-14)
    assert drawdown_rate(m, 1.0) == pytest.approx(0.21763329919679192, rel=1e-14)
    with pytest.raises(TypeError):
        cpp_printed_rate(BmDrift(1, 1), 1.0)


def test_boundary_asymptotics():
    assert boundary_asymptotics(CppExp(2, 1, 1)) == (0.5, False)
    assert boundary_asymptotics(CaballeroChaumont(1.5)) == (0.0, True)
    assert boundary_asymptotics(BmDrift(1, 1)) == (0.0, False)
    assert scale_w(CaballeroChaumont(1.5), 1e-12) < 1e-5


def test_validation():
    for bad in (lambda: BmDrift(0, 1), lambda: CppExp(1, 2, 1), lambda: CaballeroChaumont(2.5)):
        with pytest.raises(ValueError):
            bad()
    with pytest.raises(ValueError):
        scale_w(MODELS[0], -1.0)
    with pytest.raises(ValueError):
        levy_exponent(MODELS[0], 0.0)
    with pytest.raises(TypeError):
        scale_w("bm", 1.0)


def _fd_log_derivative(m, delta, h=1e-6):
    return (math.log(scale_w(m, delta + h)) - math.log(scale_w(m, delta - h))) / (2 * h)


@pytest.mark.parametrize("m", MODELS)
@pytest.mark.parametrize("delta", [0.25, 1.0, 4.0])
def test_rate_is_log_derivative(m, delta):
    assert drawdown_rate(m, delta) == pytest.approx(_fd_log_derivative(m, delta), rel=1e-6)


@given(models, st.floats(0.25, 4))
def test_rate_is_log_derivative_random(m, delta):
    # central differences resolve log W' only to ~1e-10 absolute
    assume(drawdown_rate(m, delta) > 1e-3)
    assert drawdown_rate(m, delta) == pytest.approx(_fd_log_derivative(m, delta), rel=1e-6)


@given(models, st.floats(0.1, 3), st.floats(0.1, 3), st.floats(1.05, 2))
def test_exit_monotone(m, x, y, k):
    p = two_sided_exit(m, x, y)
    assert 0 < p <= 1
    assert two_sided_exit(m, x * k, y) >= p
    assert two_sided_exit(m, x, y * k) <= p


@given(st.floats(1.05, 1.95), st.floats(0.1, 5))
def test_caballero_closed_form(beta, delta):
    m = CaballeroChaumont(beta)
    assert drawdown_rate(m, delta) == pytest.approx((beta - 1) / math.expm1(delta), rel=1e-12)
