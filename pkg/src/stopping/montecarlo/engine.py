"""Simulation front end: configuration, samples and parallel dispatch."""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any

import numba as nb
import numpy as np

from ..analytic_rbm import RbmParams
from ..diffusion_drawdown import DiffusionSpec
from ..levy_scale import CppExp
from . import kernels

__all__ = [
    "SCHEMES",
    "SimulationConfig",
    "EmpiricalSample",
    "ExitSample",
    "RunQualityWarning",
    "RunQualityError",
    "simulate_rbm_first_passage",
    "simulate_diffusion_drawdown",
    "simulate_cpp_drawdown",
    "simulate_cpp_exit",
]

log = logging.getLogger(__name__)

SCHEMES = ("reflect_abs", "xi_sign", "event_driven")
#: censored fraction above which a run is flagged
MAX_CENSORED_FRACTION = 1e-3


class RunQualityWarning(UserWarning):
    pass


class RunQualityError(RuntimeError):
    pass


@dataclass(frozen=True)
class SimulationConfig:
    """Monte Carlo run settings.

    ``bridge`` switches on the Brownian-bridge correction of barrier and
    drawdown monitoring in the grid schemes; without it the discrete
    monitoring bias is of order ``sqrt(dt)``.  ``n_workers`` only changes
    wall-clock time, never the sample.
    """

    n_paths: int
    seed: int
    dt: float = 1e-3
    t_max: float = 1e3
    scheme: str = "reflect_abs"
    bridge: bool = True
    n_workers: int = 1

    def __post_init__(self):
        if int(self.n_paths) != self.n_paths or self.n_paths < 100:
            raise ValueError(f"n_paths must be an integer >= 100, got {self.n_paths}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not (self.t_max > 0 and math.isfinite(self.t_max)):
            raise ValueError(f"t_max must be positive, got {self.t_max}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.n_workers < 1:
            raise ValueError("n_workers must be >= 1")

    @property
    def accuracy_graded(self) -> bool:
        return self.dt <= 1e-3

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class EmpiricalSample:
    """Sorted Monte Carlo draws plus provenance.

    Censored paths (no event before ``t_max``) stay in ``values`` holding a
    bound: ``t_max`` for hitting times, the running maximum reached so far
    for drawdown maxima.  ``censored`` is aligned with ``values``.
    """

    values: np.ndarray
    censored: np.ndarray
    kind: str
    config: SimulationConfig
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("first_passage_time", "drawdown_max"):
            raise ValueError(f"unknown sample kind {self.kind!r}")

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def n_censored(self) -> int:
        return int(self.censored.sum())

    @property
    def censored_fraction(self) -> float:
        return self.n_censored / self.n

    @property
    def uncensored(self) -> np.ndarray:
        return self.values[~self.censored]

    def check_quality(self, max_censored: float = MAX_CENSORED_FRACTION) -> None:
        if self.censored_fraction > max_censored:
            raise RunQualityError(
                f"{self.censored_fraction:.3%} of paths censored at t_max={self.config.t_max}"
            )


@dataclass(frozen=True)
class ExitSample:
    """Outcomes of a two-sided exit experiment."""

    exited_up: np.ndarray
    censored: np.ndarray
    config: SimulationConfig
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return int(self.exited_up.size)

    @property
    def frequency(self) -> float:
        return float(self.exited_up.mean())

    @property
    def std_error(self) -> float:
        p = self.frequency
        return math.sqrt(p * (1.0 - p) / self.n)


def _chunks(n: int, workers: int) -> list[tuple[int, int]]:
    bounds = np.linspace(0, n, min(workers, n) + 1).astype(np.int64)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def _dispatch(run_chunk, n: int, workers: int) -> None:
    parts = _chunks(n, workers)
    if len(parts) == 1:
        run_chunk(*parts[0])
        return
    with ThreadPoolExecutor(max_workers=len(parts)) as pool:
        for fut in [pool.submit(run_chunk, a, b) for a, b in parts]:
            fut.result()


def _sorted_sample(values, cens, kind, cfg, meta) -> EmpiricalSample:
    order = np.argsort(values, kind="stable")
    sample = EmpiricalSample(values[order], cens[order], kind, cfg, meta)
    if sample.censored_fraction > MAX_CENSORED_FRACTION:
        warnings.warn(
            f"{sample.n_censored} of {sample.n} paths censored at t_max={cfg.t_max}",
            RunQualityWarning,
            stacklevel=3,
        )
    return sample


def simulate_rbm_first_passage(p: RbmParams, cfg: SimulationConfig) -> EmpiricalSample:
    """Hitting times of ``x + delta`` by reflected Brownian motion with drift.

    ``reflect_abs`` steps ``X <- |X + mu dt + sigma sqrt(dt) Z|``;
    ``xi_sign`` runs Euler on ``d xi = mu sign(xi) dt + sigma dB`` and
    reports ``|xi|``.
    """
    if cfg.scheme == "event_driven":
        raise ValueError("event_driven scheme only applies to the compound Poisson model")
    scheme = kernels.SCHEME_REFLECT_ABS if cfg.scheme == "reflect_abs" else kernels.SCHEME_XI_SIGN
    out_t = np.empty(cfg.n_paths)
    out_c = np.empty(cfg.n_paths, dtype=np.bool_)

    def run(a, b):
        kernels.rbm_first_passage(
            np.uint64(cfg.seed), a, b, p.mu, p.sigma, p.x, p.barrier, cfg.dt, cfg.t_max,
            scheme, cfg.bridge, out_t, out_c,
        )

    _dispatch(run, cfg.n_paths, cfg.n_workers)
    meta = {"mu": p.mu, "sigma": p.sigma, "x": p.x, "delta": p.delta}
    return _sorted_sample(out_t, out_c, "first_passage_time", cfg, meta)


_JIT_CACHE: dict[Any, Any] = {}


def _jit(fn):
    if isinstance(fn, nb.core.registry.CPUDispatcher):
        return fn
    try:
        return _JIT_CACHE[fn]
    except (KeyError, TypeError):
        pass
    jitted = nb.njit(fn)
    try:
        _JIT_CACHE[fn] = jitted
    except TypeError:
        pass
    return jitted


def simulate_diffusion_drawdown(d: DiffusionSpec, delta: float, cfg: SimulationConfig) -> EmpiricalSample:
    """Running maximum at the first time the drawdown reaches ``delta``.

    The coefficients of ``d`` are compiled with numba.  Paths that leave the
    domain through an absorbing left endpoint are stopped, counted in
    ``meta["n_domain_exits"]`` and marked censored.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    if delta > -d.left_endpoint:
        raise ValueError(f"delta = {delta} exceeds the domain depth {-d.left_endpoint}")
    if cfg.scheme == "event_driven":
        raise ValueError("event_driven scheme only applies to the compound Poisson model")
    mu_fn, sigma_fn = _jit(d.mu), _jit(d.sigma)
    out_m = np.empty(cfg.n_paths)
    out_c = np.empty(cfg.n_paths, dtype=np.bool_)
    out_e = np.empty(cfg.n_paths, dtype=np.bool_)
    left = d.left_endpoint if math.isfinite(d.left_endpoint) else -np.inf

    def run(a, b):
        kernels.diffusion_drawdown(
            np.uint64(cfg.seed), a, b, mu_fn, sigma_fn, float(delta), left,
            d.boundary == "reflecting", cfg.dt, cfg.t_max, cfg.bridge, out_m, out_c, out_e,
        )

    _dispatch(run, cfg.n_paths, cfg.n_workers)
    n_exit = int(out_e.sum())
    if n_exit:
        log.warning("%d paths left the domain through %s", n_exit, d.left_endpoint)
    meta = {"delta": float(delta), "description": d.description, "n_domain_exits": n_exit}
    return _sorted_sample(out_m, out_c, "drawdown_max", cfg, meta)


def _require_event_driven(m, cfg):
    if not isinstance(m, CppExp):
        raise TypeError("event-driven simulation is implemented for CppExp only")
    if cfg.scheme != "event_driven":
        raise ValueError("compound Poisson simulation needs scheme='event_driven'")


def simulate_cpp_drawdown(m: CppExp, delta: float, cfg: SimulationConfig) -> EmpiricalSample:
    """Exact maxima before a ``delta`` drawdown for ``c t - compound Poisson``."""
    _require_event_driven(m, cfg)
    if not delta > 0:
        raise ValueError("delta must be positive")
    out_m = np.empty(cfg.n_paths)
    out_c = np.empty(cfg.n_paths, dtype=np.bool_)

    def run(a, b):
        kernels.cpp_drawdown(np.uint64(cfg.seed), a, b, m.c, m.lam, m.jump_mu, float(delta),
                             cfg.t_max, out_m, out_c)

    _dispatch(run, cfg.n_paths, cfg.n_workers)
    meta = {"c": m.c, "lam": m.lam, "jump_mu": m.jump_mu, "delta": float(delta)}
    return _sorted_sample(out_m, out_c, "drawdown_max", cfg, meta)


def simulate_cpp_exit(m: CppExp, lower: float, upper: float, cfg: SimulationConfig) -> ExitSample:
    """Exit side of ``[-lower, upper]`` for paths started at 0."""
    _require_event_driven(m, cfg)
    if not (lower > 0 and upper > 0):
        raise ValueError("interval ends must be positive")
    up = np.empty(cfg.n_paths, dtype=np.bool_)
    t = np.empty(cfg.n_paths)
    cens = np.empty(cfg.n_paths, dtype=np.bool_)

    def run(a, b):
        kernels.cpp_exit(np.uint64(cfg.seed), a, b, m.c, m.lam, m.jump_mu, float(lower),
                         float(upper), cfg.t_max, up, t, cens)

    _dispatch(run, cfg.n_paths, cfg.n_workers)
    if cens.mean() > MAX_CENSORED_FRACTION:
        warnings.warn(f"{int(cens.sum())} exit paths censored", RunQualityWarning, stacklevel=2)
    meta = {"c": m.c, "lam": m.lam, "jump_mu": m.jump_mu, "lower": lower, "upper": upper}
    return ExitSample(up, cens, cfg, meta)
