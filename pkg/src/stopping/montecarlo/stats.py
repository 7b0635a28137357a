"""Estimators and tests applied to simulated samples."""

from __future__ import annotations

import math
from typing import NamedTuple, Sequence

import numpy as np
from scipy import special

from .engine import EmpiricalSample

__all__ = [
    "LtEstimate",
    "KsResult",
    "SurvivalPoint",
    "empirical_lt",
    "ks_exponential_test",
    "empirical_survival",
]


class LtEstimate(NamedTuple):
    estimate: float
    std_error: float
    #: largest possible upward bias from censored paths
    censoring_bias: float


class KsResult(NamedTuple):
    statistic: float
    p_value: float
    n: int


class SurvivalPoint(NamedTuple):
    xi: float
    survival: float
    std_error: float


def empirical_lt(s: EmpiricalSample, theta: float) -> LtEstimate:
    """Mean of ``exp(-theta * tau)`` and its CLT standard error.

    Censored paths enter with ``exp(-theta * t_max)``, an upper bound on their
    true contribution; ``censoring_bias`` bounds the resulting overshoot.
    """
    if s.kind != "first_passage_time":
        raise ValueError("empirical_lt needs a first-passage sample")
    if not theta >= 0:
        raise ValueError("theta must be >= 0")
    if theta == 0:
        return LtEstimate(1.0, 0.0, 0.0)
    e = np.exp(-theta * s.values)
    est = float(e.mean())
    se = float(e.std(ddof=1) / math.sqrt(s.n)) if s.n > 1 else 0.0
    bias = s.censored_fraction * math.exp(-theta * s.config.t_max)
    return LtEstimate(est, se, bias)


def ks_exponential_test(s: EmpiricalSample | Sequence[float], rate: float) -> KsResult:
    """One-sample Kolmogorov-Smirnov test against ``Exp(rate)``.

    The p-value is the asymptotic Kolmogorov tail ``P[K > sqrt(n) D]``.
    """
    values = s.values if isinstance(s, EmpiricalSample) else np.sort(np.asarray(s, dtype=float))
    n = values.size
    if n < 35:
        raise ValueError(f"asymptotic KS p-values need n >= 35, got {n}")
    if not rate > 0:
        raise ValueError("rate must be positive")
    if np.any(values <= 0):
        raise ValueError("sample contains nonpositive values")
    cdf = -np.expm1(-rate * values)
    i = np.arange(1, n + 1)
    d = max(float(np.max(i / n - cdf)), float(np.max(cdf - (i - 1) / n)))
    return KsResult(d, float(special.kolmogorov(math.sqrt(n) * d)), int(n))


def empirical_survival(s: EmpiricalSample, xi: Sequence[float]) -> list[SurvivalPoint]:
    """``P[value >= xi]`` with binomial standard errors."""
    out = []
    for x in xi:
        p = float(np.count_nonzero(s.values >= x)) / s.n
        out.append(SurvivalPoint(float(x), p, math.sqrt(p * (1.0 - p) / s.n)))
    return out
