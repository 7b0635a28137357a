"""Laplace transform of the first hitting time of reflected Brownian motion.

The process is Brownian motion with drift ``mu`` and volatility ``sigma``,
reflected at 0 and started at ``x >= 0``.  The hitting time ``tau`` is the
first time it reaches the level ``x + delta``.  Writing
``s = sqrt(mu**2 + 2*theta*sigma**2)`` and ``w(y) = y*s/sigma**2``::

    E[exp(-theta*tau)] = exp(delta*mu/sigma**2)
        * (s*cosh(w(x)) + mu*sinh(w(x)))
        / (s*cosh(w(x+delta)) + mu*sinh(w(x+delta)))

The cosh/sinh combinations are evaluated as ``((s+mu) + (s-mu)*exp(-2w)) * exp(w)/2``
so that nothing overflows for large ``theta*delta/sigma**2``.

Negative drift is accepted: the formula stays valid and the hitting time is
still a.s. finite, but the Monte Carlo cross-checks only cover ``mu >= 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "RbmParams",
    "KappaPair",
    "kappa_roots",
    "rbm_lt",
    "rbm_lt_driftless",
    "perry_lt_driftless",
    "rbm_lt_complex",
]


@dataclass(frozen=True)
class RbmParams:
    """Drift, volatility, start point and barrier offset (barrier at x + delta)."""

    mu: float
    sigma: float
    x: float = 0.0
    delta: float = 1.0

    def __post_init__(self):
        for name in ("mu", "sigma", "x", "delta"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite, got {getattr(self, name)!r}")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if self.x < 0:
            raise ValueError(f"x must be >= 0, got {self.x}")
        if self.delta < 0:
            raise ValueError(f"delta must be >= 0, got {self.delta}")

    @property
    def barrier(self) -> float:
        return self.x + self.delta


class KappaPair(NamedTuple):
    kappa_minus: float
    kappa_plus: float


def _check_theta(theta):
    theta = float(theta)
    if not theta >= 0 or not math.isfinite(theta):
        raise ValueError(f"theta must be finite and >= 0, got {theta}")
    return theta


def kappa_roots(p: RbmParams, theta: float) -> KappaPair:
    """Roots of ``sigma**2*k**2/2 - mu*k - theta = 0``, smaller root first."""
    theta = _check_theta(theta)
    mu, s2 = p.mu, p.sigma**2
    s = math.sqrt(mu * mu + 2.0 * theta * s2)
    # pick the cancellation-free branch for the small root
    if mu >= 0:
        k_plus = (mu + s) / s2
        k_minus = -2.0 * theta / (mu + s) if mu + s > 0 else 0.0
    else:
        k_minus = (mu - s) / s2
        k_plus = 2.0 * theta / (s - mu)
    return KappaPair(k_minus, k_plus)


def rbm_lt_complex(p: RbmParams, theta):
    """Vectorised transform for real or complex ``theta`` (used by inversion).

    ``theta`` may be any array-like; complex values use the principal square
    root, which is harmless because the ratio is even in ``s``.
    """
    th = np.asarray(theta)
    is_complex = np.iscomplexobj(th)
    th = th.astype(np.complex128 if is_complex else np.float64)
    if p.delta == 0:
        return np.ones_like(th)
    mu, s2 = p.mu, p.sigma**2
    s = np.sqrt(mu * mu + 2.0 * th * s2)
    with np.errstate(divide="ignore", invalid="ignore"):
        if mu >= 0:
            a = s + mu
            b = 2.0 * th * s2 / a
        else:
            b = s - mu
            a = 2.0 * th * s2 / b
        wx = p.x * s / s2
        wb = p.barrier * s / s2
        num = a + b * np.exp(-2.0 * wx)
        den = a + b * np.exp(-2.0 * wb)
        out = np.exp(-b * p.delta / s2) * num / den
    return np.where(th == 0, 1.0, out)


def rbm_lt(p: RbmParams, theta: float) -> float:
    """``E[exp(-theta*tau)]`` for the reflected process described by ``p``.

    Returns exactly 1 for ``theta == 0`` or ``delta == 0``.
    """
    theta = _check_theta(theta)
    if theta == 0.0 or p.delta == 0.0:
        return 1.0
    return float(rbm_lt_complex(p, theta))


def rbm_lt_driftless(sigma: float, delta: float, theta: float) -> float:
    """``1/cosh((delta/sigma)*sqrt(2*theta))``, the mu = 0, x = 0 transform."""
    if sigma <= 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    if delta < 0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    theta = _check_theta(theta)
    z = (delta / sigma) * math.sqrt(2.0 * theta)
    # 1/cosh(z) = 2 e^{-z} / (1 + e^{-2z}) stays finite for huge z
    return 2.0 * math.exp(-z) / (1.0 + math.exp(-2.0 * z))


def perry_lt_driftless(delta: float, theta: float) -> float:
    """Competing driftless value ``1/cosh(delta*sqrt(theta))`` (sigma = 1).

    Kept only so that simulations can reject it; see ``rbm_lt_driftless``
    for the correct transform.
    """
    if delta < 0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    theta = _check_theta(theta)
    z = delta * math.sqrt(theta)
    return 2.0 * math.exp(-z) / (1.0 + math.exp(-2.0 * z))
