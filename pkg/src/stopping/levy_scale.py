"""Scale functions of spectrally negative Levy processes and the drawdown law.

Three models with closed-form scale functions are provided:

* ``BmDrift``: ``mu*t + sigma*B_t``, ``W(x) = (1 - exp(-2 mu x / sigma^2)) / mu``
* ``CppExp``: ``c*t - (compound Poisson, rate lam, Exp(jump_mu) jumps)``
* ``CaballeroChaumont``: pure-jump, infinite variation, ``W(x) = (1 - e^-x)^(beta-1)``

For each, ``W`` satisfies ``int_0^inf exp(-theta x) W(x) dx = 1/Psi(theta)``,
the probability of leaving ``[-x, y]`` upwards is ``W(x)/W(x+y)``, and the
maximum before a drawdown of size ``delta`` is exponential with rate
``W'(delta)/W(delta)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Union

from scipy import integrate, special

__all__ = [
    "BmDrift",
    "CppExp",
    "CaballeroChaumont",
    "LevyModel",
    "ScaleFunction",
    "LaplaceCheck",
    "BoundaryAsymptotics",
    "NonConvergentIntegral",
    "levy_exponent",
    "scale_w",
    "scale_w_prime",
    "scale_function",
    "scale_laplace_check",
    "two_sided_exit",
    "drawdown_rate",
    "drawdown_survival_levy",
    "mean_max_before_drawdown",
    "boundary_asymptotics",
    "cpp_printed_rate",
]


class NonConvergentIntegral(ArithmeticError):
    pass


@dataclass(frozen=True)
class BmDrift:
    mu: float
    sigma: float

    def __post_init__(self):
        if not (self.mu > 0 and self.sigma > 0):
            raise ValueError(f"BmDrift needs mu > 0 and sigma > 0, got {self}")

    @property
    def _k(self) -> float:
        return 2.0 * self.mu / self.sigma**2


@dataclass(frozen=True)
class CppExp:
    """Drift ``c`` minus compound Poisson jumps at rate ``lam``, sizes Exp(``jump_mu``)."""

    c: float
    lam: float
    jump_mu: float

    def __post_init__(self):
        if not (self.c > 0 and self.lam > 0 and self.jump_mu > 0):
            raise ValueError(f"CppExp parameters must be positive, got {self}")
        if not self.c - self.lam / self.jump_mu > 0:
            raise ValueError("CppExp needs c - lam/jump_mu > 0")

    @property
    def rho(self) -> float:
        return self.jump_mu - self.lam / self.c


@dataclass(frozen=True)
class CaballeroChaumont:
    beta: float

    def __post_init__(self):
        if not 1 < self.beta < 2:
            raise ValueError(f"beta must lie in (1, 2), got {self.beta}")


LevyModel = Union[BmDrift, CppExp, CaballeroChaumont]


def _check_model(m) -> None:
    if not isinstance(m, (BmDrift, CppExp, CaballeroChaumont)):
        raise TypeError(f"unsupported Levy model {m!r}")


def levy_exponent(m: LevyModel, theta: float) -> float:
    """Laplace exponent ``Psi(theta) = log E[exp(theta X_1)]`` for ``theta > 0``."""
    _check_model(m)
    if not theta > 0:
        raise ValueError(f"theta must be > 0, got {theta}")
    if isinstance(m, BmDrift):
        return m.mu * theta + 0.5 * m.sigma**2 * theta**2
    if isinstance(m, CppExp):
        return m.c * theta - m.lam * theta / (m.jump_mu + theta)
    b = m.beta
    return math.exp(special.gammaln(theta + b) - special.gammaln(theta) - special.gammaln(b))


def scale_w(m: LevyModel, x: float) -> float:
    _check_model(m)
    if x < 0:
        raise ValueError("scale function is only defined for x >= 0")
    if isinstance(m, BmDrift):
        return -math.expm1(-m._k * x) / m.mu
    if isinstance(m, CppExp):
        return (1.0 - m.lam / (m.c * m.jump_mu - m.lam) * math.expm1(-m.rho * x)) / m.c
    return (-math.expm1(-x)) ** (m.beta - 1.0)


def scale_w_prime(m: LevyModel, x: float) -> float:
    _check_model(m)
    if not x > 0:
        raise ValueError("W' is evaluated on x > 0 only")
    if isinstance(m, BmDrift):
        return (2.0 / m.sigma**2) * math.exp(-m._k * x)
    if isinstance(m, CppExp):
        return m.lam / m.c**2 * math.exp(-m.rho * x)
    b = m.beta
    return (b - 1.0) * math.exp(-x) * (-math.expm1(-x)) ** (b - 2.0)


@dataclass(frozen=True)
class ScaleFunction:
    """``W`` and ``W'`` of a model bundled together."""

    model: LevyModel

    def __call__(self, x: float) -> float:
        return scale_w(self.model, x)

    def prime(self, x: float) -> float:
        return scale_w_prime(self.model, x)

    @property
    def w0(self) -> float:
        return scale_w(self.model, 0.0)


def scale_function(m: LevyModel) -> ScaleFunction:
    _check_model(m)
    return ScaleFunction(m)


class LaplaceCheck(NamedTuple):
    lhs: float
    rhs: float
    rel_err: float


def scale_laplace_check(m: LevyModel, theta: float) -> LaplaceCheck:
    """Compare ``int_0^inf e^{-theta x} W(x) dx`` (quadrature) with ``1/Psi(theta)``.

    The integral is split at ``x = 1`` so the algebraic singularity of
    Caballero-Chaumont ``W'`` at 0 sits at an endpoint, and the tail is taken
    to a point where the neglected tail ``W(inf) e^{-theta L}/theta`` is
    below 1e-17 of the answer.
    """
    _check_model(m)
    if not theta > 0:
        raise NonConvergentIntegral(f"theta = {theta}: the Laplace integral of W diverges")
    rhs = 1.0 / levy_exponent(m, theta)
    w_inf = _w_limit(m)
    length = max(1.0, (math.log(w_inf / (theta * rhs)) + 40.0) / theta)

    def f(x):
        return math.exp(-theta * x) * scale_w(m, x)

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            pieces = [
                integrate.quad(f, a, b, epsabs=0.0, epsrel=1e-13, limit=400)[0]
                for a, b in ((0.0, min(1.0, length)), (min(1.0, length), length))
            ]
        except integrate.IntegrationWarning as exc:
            raise NonConvergentIntegral(str(exc)) from exc
    lhs = math.fsum(pieces)
    return LaplaceCheck(lhs, rhs, abs(lhs - rhs) / abs(rhs))


def _w_limit(m: LevyModel) -> float:
    """``W(inf)``; finite for all three models since each drifts to +inf."""
    if isinstance(m, BmDrift):
        return 1.0 / m.mu
    if isinstance(m, CppExp):
        return 1.0 / (m.c - m.lam / m.jump_mu)
    return 1.0


def two_sided_exit(m: LevyModel, x: float, y: float) -> float:
    """Probability of leaving ``[-x, y]`` through ``y`` when started at 0."""
    if not (x > 0 and y > 0):
        raise ValueError("x and y must be positive")
    return scale_w(m, x) / scale_w(m, x + y)


def drawdown_rate(m: LevyModel, delta: float) -> float:
    """``W'(delta)/W(delta)``, the exponential rate of the maximum before a drawdown."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    return scale_w_prime(m, delta) / scale_w(m, delta)


def drawdown_survival_levy(m: LevyModel, delta: float, xi: float) -> float:
    if xi < 0:
        raise ValueError("xi must be >= 0")
    return math.exp(-drawdown_rate(m, delta) * xi)


def mean_max_before_drawdown(m: LevyModel, delta: float) -> float:
    return 1.0 / drawdown_rate(m, delta)


def cpp_printed_rate(m: CppExp, delta: float) -> float:
    """A simplified closed form of the compound Poisson drawdown rate.

    ``(lam/c) / (exp(delta*rho) - (lam/c)/rho)``.  It disagrees with
    ``W'(delta)/W(delta)`` and is only reported next to it for comparison.
    """
    if not isinstance(m, CppExp):
        raise TypeError("printed simplified rate exists for CppExp only")
    q = m.lam / m.c
    return q / (math.exp(delta * m.rho) - q / m.rho)


class BoundaryAsymptotics(NamedTuple):
    w_at_zero: float
    w_prime_at_zero_is_infinite: bool


def boundary_asymptotics(m: LevyModel) -> BoundaryAsymptotics:
    """``W(0+)`` and whether ``W'(0+)`` blows up.

    Bounded variation (``CppExp``) gives ``W(0+) = 1/c``; the other two are of
    unbounded variation and start at 0.  ``W'(0+)`` is ``2/sigma^2`` for
    Brownian motion with drift and ``lam/c^2`` for the compound Poisson model;
    only the Caballero-Chaumont jump measure makes it infinite.
    """
    _check_model(m)
    if isinstance(m, CppExp):
        return BoundaryAsymptotics(1.0 / m.c, False)
    if isinstance(m, BmDrift):
        return BoundaryAsymptotics(0.0, False)
    return BoundaryAsymptotics(0.0, m.beta < 2)
