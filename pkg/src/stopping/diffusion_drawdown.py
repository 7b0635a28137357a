"""Law of the maximum before a drawdown for one-dimensional diffusions.

For ``dX = mu(X) dt + sigma(X) dW`` started at 0 on ``[-a, inf)``, let
``gamma = mu / sigma**2`` and ``Phi(x) = exp(-2 * int_0^x gamma)``.  The
running maximum ``M`` at the first time the drawdown ``M - X`` reaches
``delta <= a`` satisfies::

    log P[M >= xi] = -int_0^xi Phi(u) / int_{u-delta}^u Phi(s) ds  du

The integrand is the hazard of ``M``; the law is exponential exactly when the
hazard does not depend on ``u``, which for every ``delta`` happens iff
``gamma`` is constant.

Also here: a method-of-steps solver for the delay equation
``Phi'(xi) = lam * (Phi(xi) - Phi(xi - delta))`` used to build diffusions
whose drawdown law is exponential only for one particular ``delta``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

__all__ = [
    "DiffusionSpec",
    "PhiFunction",
    "SurvivalCurve",
    "ExponentialityDiagnostic",
    "brownian_drift",
    "constant_gamma",
    "linear_phi_example",
    "phi_from_gamma",
    "drawdown_survival",
    "hazard",
    "exponentiality_diagnostic",
    "dde_solve",
    "EXPONENTIAL_RESIDUAL_TOL",
]

#: residual below which an analytic survival curve is called exponential
EXPONENTIAL_RESIDUAL_TOL = 1e-6

_INNER_TOL = 1e-12
_OUTER_TOL = 1e-11
_GAMMA_TOL = 1e-12


@dataclass(frozen=True)
class DiffusionSpec:
    """Coefficients of ``dX = mu(X) dt + sigma(X) dW`` on ``[left_endpoint, inf)``.

    ``mu`` and ``sigma`` are plain scalar callables.  Simulation compiles them
    with numba, so keep them to arithmetic and ``math`` functions.
    ``boundary`` says what happens at a finite left endpoint (``"absorbing"``
    or ``"reflecting"``); the drawdown law only reads ``Phi`` on
    ``(left_endpoint, inf)`` and does not depend on it.
    """

    mu: Callable[[float], float]
    sigma: Callable[[float], float]
    left_endpoint: float = -math.inf
    description: str = ""
    boundary: str = "absorbing"

    def __post_init__(self):
        if not self.left_endpoint <= 0:
            raise ValueError(f"left_endpoint must be <= 0, got {self.left_endpoint}")
        if self.boundary not in ("absorbing", "reflecting"):
            raise ValueError(f"unknown boundary behaviour {self.boundary!r}")

    def gamma(self, x: float) -> float:
        s = self.sigma(x)
        if not s > 0:
            raise ValueError(f"sigma({x}) = {s} is not positive")
        g = self.mu(x) / (s * s)
        if not math.isfinite(g):
            raise ValueError(f"gamma({x}) = {g} is not finite")
        return g


def brownian_drift(mu: float, sigma: float) -> DiffusionSpec:
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    return DiffusionSpec(
        mu=lambda x: mu,
        sigma=lambda x: sigma,
        description=f"Brownian motion with drift mu={mu}, sigma={sigma}",
    )


def constant_gamma(c: float) -> DiffusionSpec:
    """Unit-volatility diffusion with drift ``c`` (so ``gamma == c``)."""
    return brownian_drift(c, 1.0)


def linear_phi_example() -> DiffusionSpec:
    """Diffusion with ``Phi(x) = (x + 2)/2``: unit volatility and drift ``-1/(2(x+2))``."""
    return DiffusionSpec(
        mu=lambda x: -0.5 / (x + 2.0),
        sigma=lambda x: 1.0,
        left_endpoint=-2.0,
        description="gamma(x) = -1/(2(x+2)), Phi(x) = (x+2)/2",
    )


@dataclass(frozen=True)
class PhiFunction:
    """Scale density ``Phi`` on ``valid_range`` with its provenance."""

    eval: Callable[[float], float]
    source: str = "closed_form"
    valid_range: tuple[float, float] = (-math.inf, math.inf)

    def __post_init__(self):
        if self.source not in ("from_gamma", "from_dde", "closed_form"):
            raise ValueError(f"unknown Phi source {self.source!r}")
        lo, hi = self.valid_range
        if not lo < hi:
            raise ValueError("valid_range must be a non-empty interval")

    def __call__(self, x: float) -> float:
        return self.eval(x)

    @property
    def lower(self) -> float:
        return self.valid_range[0]

    @classmethod
    def from_gamma(cls, d: DiffusionSpec) -> "PhiFunction":
        return cls(lambda x: phi_from_gamma(d, x), "from_gamma", (d.left_endpoint, math.inf))

    @classmethod
    def exponential(cls, c: float) -> "PhiFunction":
        """``Phi(x) = exp(-2 c x)``, i.e. constant ``gamma == c``."""
        return cls(lambda x: math.exp(-2.0 * c * x), "closed_form")

    @classmethod
    def linear(cls) -> "PhiFunction":
        return cls(lambda x: 0.5 * (x + 2.0), "closed_form", (-2.0, math.inf))


@dataclass(frozen=True)
class SurvivalCurve:
    xi_grid: np.ndarray
    log_survival: np.ndarray
    delta: float

    def __post_init__(self):
        if len(self.xi_grid) != len(self.log_survival):
            raise ValueError("xi_grid and log_survival differ in length")

    @property
    def survival(self) -> np.ndarray:
        return np.exp(self.log_survival)


@dataclass(frozen=True)
class ExponentialityDiagnostic:
    lambda_hat: float
    max_abs_residual: float

    def is_exponential(self, tol: float = EXPONENTIAL_RESIDUAL_TOL) -> bool:
        return self.max_abs_residual < tol


def phi_from_gamma(d: DiffusionSpec, x: float) -> float:
    """``exp(-2 * int_0^x gamma(u) du)`` by adaptive Gauss-Kronrod quadrature."""
    if x < d.left_endpoint:
        raise ValueError(f"x = {x} lies left of the domain [{d.left_endpoint}, inf)")
    if x == 0:
        return 1.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        val, _ = integrate.quad(d.gamma, 0.0, x, epsabs=_GAMMA_TOL, epsrel=_GAMMA_TOL, limit=200)
    return math.exp(-2.0 * val)


def _check_delta(phi: PhiFunction, delta: float) -> None:
    if not delta > 0 or not math.isfinite(delta):
        raise ValueError(f"delta must be positive, got {delta}")
    a = -phi.lower
    if delta > a:
        raise ValueError(f"delta = {delta} exceeds the domain depth a = {a}")


def _window_integral(phi: PhiFunction, u: float, delta: float) -> float:
    val, _ = integrate.quad(phi, u - delta, u, epsabs=_INNER_TOL, epsrel=_INNER_TOL, limit=200)
    if not val > 0:
        raise ValueError(f"int_(u-delta)^u Phi = {val} <= 0 at u = {u}; Phi is not a valid scale density")
    return val


def hazard(phi: PhiFunction, delta: float, xi: float) -> float:
    """Local exponential rate ``Phi(xi) / int_{xi-delta}^xi Phi`` of ``M``."""
    _check_delta(phi, delta)
    if xi < 0:
        raise ValueError("xi must be >= 0")
    return phi(xi) / _window_integral(phi, xi, delta)


def drawdown_survival(phi: PhiFunction, delta: float, xi_grid: Sequence[float]) -> SurvivalCurve:
    """Log-survival of the maximum before a ``delta`` drawdown on ``xi_grid``.

    The outer integral is accumulated interval by interval between sorted grid
    points, so the cost is linear in the grid size.
    """
    _check_delta(phi, delta)
    xi = np.asarray(xi_grid, dtype=float)
    if xi.ndim != 1 or xi.size == 0:
        raise ValueError("xi_grid must be a non-empty 1-d sequence")
    if np.any(xi < 0) or np.any(np.diff(xi) < 0):
        raise ValueError("xi_grid must be nonnegative and nondecreasing")
    if xi[-1] > phi.valid_range[1]:
        raise ValueError("xi_grid leaves the valid range of Phi")

    def integrand(u):
        return phi(u) / _window_integral(phi, u, delta)

    logs = np.empty_like(xi)
    acc, prev = 0.0, 0.0
    for i, b in enumerate(xi):
        if b > prev:
            piece, _ = integrate.quad(integrand, prev, b, epsabs=_OUTER_TOL, epsrel=_OUTER_TOL, limit=200)
            acc += piece
            prev = b
        logs[i] = -acc
    return SurvivalCurve(xi, logs, float(delta))


def exponentiality_diagnostic(curve: SurvivalCurve) -> ExponentialityDiagnostic:
    """Least-squares rate and worst deviation from a straight log-survival line.

    The line is forced through ``(0, 0)`` when the grid starts at 0, since
    every survival curve starts at 1.
    """
    xi = np.asarray(curve.xi_grid, dtype=float)
    ls = np.asarray(curve.log_survival, dtype=float)
    if xi.size < 3:
        raise ValueError("need at least 3 grid points")
    if np.ptp(xi) == 0:
        raise ValueError("degenerate grid: all xi equal")
    if xi[0] == 0:
        slope = float(xi @ ls / (xi @ xi))
        fit = slope * xi
    else:
        slope, icpt = np.polyfit(xi, ls, 1)
        fit = slope * xi + icpt
    return ExponentialityDiagnostic(float(-slope), float(np.max(np.abs(ls - fit))))


class _DdeSolution:
    """Piecewise dense output of the method of steps."""

    def __init__(self, initial, delta, lam):
        self.initial = initial
        self.delta = delta
        self.lam = lam
        self.knots = [0.0]
        self.pieces = []

    def __call__(self, xi: float) -> float:
        if xi <= 0.0:
            return float(self.initial(xi))
        k = min(int(xi / self.delta), len(self.pieces) - 1)
        # floating point can put xi a hair past the end of piece k
        while k > 0 and xi < self.knots[k]:
            k -= 1
        return float(self.pieces[k](xi)[0])

    def derivative(self, xi: float) -> float:
        return self.lam * (self(xi) - self(xi - self.delta))


def dde_solve(
    initial: PhiFunction,
    lam: float,
    delta: float,
    xi_max: float,
    rtol: float = 1e-13,
    atol: float = 1e-14,
) -> PhiFunction:
    """Solve ``Phi' = lam*(Phi(xi) - Phi(xi - delta))`` on ``[0, xi_max]``.

    ``initial`` supplies ``Phi`` on ``[-delta, 0]``.  Each segment
    ``[k delta, (k+1) delta]`` is a linear ODE forced by the previous segment
    and is integrated with DOP853; the next segment starts exactly at the
    previous endpoint value.
    """
    if not lam > 0:
        raise ValueError("lam must be positive")
    if not delta > 0:
        raise ValueError("delta must be positive")
    if not xi_max > 0:
        raise ValueError("xi_max must be positive")
    if initial.lower > -delta:
        raise ValueError("initial data must cover [-delta, 0]")

    sol = _DdeSolution(initial, delta, lam)
    y0 = float(initial(0.0))
    start = 0.0
    n_steps = int(math.ceil(xi_max / delta - 1e-12))
    for k in range(n_steps):
        end = min((k + 1) * delta, xi_max)

        def rhs(xi, y):
            return [lam * (y[0] - sol(xi - delta))]

        res = integrate.solve_ivp(
            rhs, (start, end), [y0], method="DOP853", rtol=rtol, atol=atol, dense_output=True
        )
        if not res.success:
            raise RuntimeError(f"DDE segment {k} failed: {res.message}")
        sol.pieces.append(res.sol)
        sol.knots.append(end)
        y0 = float(res.y[0, -1])
        start = end
    return PhiFunction(sol, "from_dde", (initial.lower, float(xi_max)))
