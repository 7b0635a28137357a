"""Numerical Laplace inversion: fixed Talbot contour and Gaver-Stehfest.

Both methods take a transform ``F(theta)`` and return ``f(t)`` on a grid of
positive times.  Talbot evaluates ``F`` at complex points and is the
accurate choice; Gaver-Stehfest needs only real arguments but loses digits
quickly with its order, so orders above 18 are refused in double precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "LtFunction",
    "InversionConfig",
    "IllConditionedError",
    "gaver_stehfest_weights",
    "talbot",
    "gaver_stehfest",
    "invert_density",
    "invert_cdf",
]

#: largest Gaver-Stehfest order usable with 53-bit floats
MAX_GS_ORDER = 18
#: below this time no accuracy is promised
T_MIN_RELIABLE = 1e-6


class IllConditionedError(ValueError):
    """Requested inversion cannot be carried out reliably in double precision."""


@dataclass(frozen=True)
class LtFunction:
    """A Laplace transform ``theta -> F(theta)``.

    ``eval`` must accept numpy arrays; for Talbot inversion it also has to
    accept complex arrays.
    """

    eval: Callable
    domain_note: str = ""

    def __call__(self, theta):
        return self.eval(theta)


@dataclass(frozen=True)
class InversionConfig:
    method: str = "talbot"
    order: int | None = None
    t_grid: Sequence[float] = field(default_factory=lambda: (1.0,))

    def __post_init__(self):
        if self.method not in ("talbot", "gaver_stehfest"):
            raise ValueError(f"unknown inversion method {self.method!r}")
        if self.order is not None and self.order < 1:
            raise ValueError("order must be a positive integer")
        t = np.asarray(self.t_grid, dtype=float)
        if t.ndim != 1 or t.size == 0 or np.any(~np.isfinite(t)) or np.any(t <= 0):
            raise ValueError("t_grid must be a non-empty list of positive times")
        if self.method == "gaver_stehfest":
            n = self.resolved_order
            if n % 2:
                raise ValueError(f"Gaver-Stehfest order must be even, got {n}")
            if n > MAX_GS_ORDER:
                raise IllConditionedError(
                    f"Gaver-Stehfest order {n} > {MAX_GS_ORDER} is ill-conditioned "
                    "in double precision"
                )

    @property
    def resolved_order(self) -> int:
        if self.order is not None:
            return int(self.order)
        return 32 if self.method == "talbot" else 12


@lru_cache(maxsize=None)
def gaver_stehfest_weights(n: int) -> tuple[float, ...]:
    """Stehfest weights ``V_1..V_n``, computed exactly then rounded."""
    if n % 2 or n < 2:
        raise ValueError("order must be a positive even integer")
    half = n // 2
    out = []
    for k in range(1, n + 1):
        acc = Fraction(0)
        for j in range((k + 1) // 2, min(k, half) + 1):
            acc += Fraction(
                j**half * math.factorial(2 * j),
                math.factorial(half - j)
                * math.factorial(j)
                * math.factorial(j - 1)
                * math.factorial(k - j)
                * math.factorial(2 * j - k),
            )
        out.append(float((-1) ** (k + half) * acc))
    return tuple(out)


def gaver_stehfest(F: Callable, t, order: int = 12) -> np.ndarray:
    """Gaver-Stehfest approximation of the inverse transform at times ``t``."""
    if order > MAX_GS_ORDER:
        raise IllConditionedError(
            f"Gaver-Stehfest order {order} > {MAX_GS_ORDER} is ill-conditioned"
        )
    t = np.atleast_1d(np.asarray(t, dtype=float))
    v = np.asarray(gaver_stehfest_weights(order))
    k = np.arange(1, order + 1)
    scale = math.log(2.0) / t
    theta = scale[:, None] * k[None, :]
    vals = np.asarray(F(theta.ravel()), dtype=float).reshape(theta.shape)
    return scale * (vals @ v)


def talbot(F: Callable, t, order: int = 32) -> np.ndarray:
    """Fixed Talbot inversion (Abate-Valko parameters, ``r = 2M/5``)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    m = int(order)
    r = 2.0 * m / 5.0
    phi = np.arange(1, m) * math.pi / m
    cot = 1.0 / np.tan(phi)
    # contour nodes per unit time and their weights
    nodes = np.concatenate([[r + 0j], r * phi * (cot + 1j)])
    sigma = np.concatenate(
        [[0.5 + 0j], 1.0 + 1j * phi * (1.0 + cot**2) - 1j * cot]
    )
    theta = nodes[None, :] / t[:, None]
    vals = np.asarray(F(theta.ravel()), dtype=np.complex128).reshape(theta.shape)
    terms = np.exp(nodes)[None, :] * sigma[None, :] * vals
    return (r / (m * t)) * np.real(terms.sum(axis=1))


def _invert(F: Callable, cfg: InversionConfig) -> np.ndarray:
    t = np.asarray(cfg.t_grid, dtype=float)
    if cfg.method == "talbot":
        return talbot(F, t, cfg.resolved_order)
    return gaver_stehfest(F, t, cfg.resolved_order)


def invert_density(f: LtFunction, cfg: InversionConfig) -> list[tuple[float, float]]:
    """Pointwise density estimates ``[(t, f(t)), ...]`` on ``cfg.t_grid``."""
    vals = _invert(f, cfg)
    return list(zip(map(float, cfg.t_grid), map(float, vals)))


def invert_cdf(f: LtFunction, cfg: InversionConfig) -> list[tuple[float, float]]:
    """CDF estimates from inverting ``F(theta)/theta``, clipped to [0, 1]."""
    vals = _invert(lambda th: f(th) / th, cfg)
    vals = np.clip(vals, 0.0, 1.0)
    return list(zip(map(float, cfg.t_grid), map(float, vals)))
