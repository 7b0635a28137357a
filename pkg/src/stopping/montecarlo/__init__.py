"""Monte Carlo oracles for the hitting-time and drawdown laws."""

from .engine import (
    SCHEMES,
    EmpiricalSample,
    ExitSample,
    RunQualityError,
    RunQualityWarning,
    SimulationConfig,
    simulate_cpp_drawdown,
    simulate_cpp_exit,
    simulate_diffusion_drawdown,
    simulate_rbm_first_passage,
)
from .stats import KsResult, LtEstimate, empirical_lt, empirical_survival, ks_exponential_test

__all__ = [
    "SCHEMES",
    "EmpiricalSample",
    "ExitSample",
    "KsResult",
    "LtEstimate",
    "RunQualityError",
    "RunQualityWarning",
    "SimulationConfig",
    "empirical_lt",
    "empirical_survival",
    "ks_exponential_test",
    "simulate_cpp_drawdown",
    "simulate_cpp_exit",
    "simulate_diffusion_drawdown",
    "simulate_rbm_first_passage",
]
