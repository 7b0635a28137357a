"""First-passage and drawdown laws for reflected Brownian motion, diffusions
and spectrally negative Levy processes, with Monte Carlo cross-checks."""

from .analytic_rbm import RbmParams, kappa_roots, perry_lt_driftless, rbm_lt, rbm_lt_driftless
from .diffusion_drawdown import (
    DiffusionSpec,
    PhiFunction,
    SurvivalCurve,
    dde_solve,
    drawdown_survival,
    exponentiality_diagnostic,
    hazard,
)
from .laplace_inversion import InversionConfig, LtFunction, invert_cdf, invert_density
from .levy_scale import (
    BmDrift,
    CaballeroChaumont,
    CppExp,
    drawdown_rate,
    scale_function,
    scale_laplace_check,
    two_sided_exit,
)

__version__ = "0.1.0"
