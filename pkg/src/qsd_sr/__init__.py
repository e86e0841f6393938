"""Quasi-stationary distribution of the Generalized Shiryaev-Roberts
diffusion dR = dt + mu R dB killed at a threshold A.

Exact dominant eigenvalue, density, distribution function, moments and mode,
together with order-1/2/3 large-threshold approximations and independent
numerical oracles (discretized eigenproblem, Monte Carlo, quadrature
identities).
"""

from .errors import (
    AmbiguousRootError,
    BracketError,
    ConvergenceError,
    DomainError,
    NoSurvivorsError,
    QsdError,
    ThresholdTooSmallError,
)
from .specfun import (
    ModelParams,
    SpectralIndex,
    WhittakerIndex,
    exp_integral_e1,
    exp_scaled_e1,
    gamma_cx,
    lower_bound_l,
    meijer_g_special,
    speed_density,
    stationary_cdf,
    whittaker_w,
    whittaker_w_scaled,
)
from .eigensolver import (
    EigenBracket,
    EigenResult,
    dominant_eigenvalue,
    eigen_bracket,
    eigenfunction,
    eigenvalue_monotonicity_check,
)
from .qsd import (
    MomentSeries,
    QsdSolution,
    boundary_flux_identity,
    build_solution,
    cdf,
    mean,
    mode,
    moments,
    pdf,
    variance,
)
from .asymptotics import (
    ApproxSolution,
    build_approx,
    index_derivative_identity,
    lambda_order1,
    lambda_order2,
    lambda_order3,
    pdf_approx,
    whittaker_expansion3,
)
from .oracle import (
    EmpiricalLaw,
    GridSolution,
    integral_identity_check,
    norm_identity_check,
    simulate_killed_sr,
    sturm_liouville_eigen,
)

__version__ = "0.1.0"

__all__ = [
    "AmbiguousRootError",
    "ApproxSolution",
    "BracketError",
    "ConvergenceError",
    "DomainError",
    "EigenBracket",
    "EigenResult",
    "EmpiricalLaw",
    "GridSolution",
    "ModelParams",
    "MomentSeries",
    "NoSurvivorsError",
    "QsdError",
    "QsdSolution",
    "SpectralIndex",
    "ThresholdTooSmallError",
    "WhittakerIndex",
    "boundary_flux_identity",
    "build_approx",
    "build_solution",
    "cdf",
    "dominant_eigenvalue",
    "eigen_bracket",
    "eigenfunction",
    "eigenvalue_monotonicity_check",
    "exp_integral_e1",
    "exp_scaled_e1",
    "gamma_cx",
    "index_derivative_identity",
    "integral_identity_check",
    "lambda_order1",
    "lambda_order2",
    "lambda_order3",
    "lower_bound_l",
    "mean",
    "meijer_g_special",
    "mode",
    "moments",
    "norm_identity_check",
    "pdf",
    "pdf_approx",
    "simulate_killed_sr",
    "speed_density",
    "stationary_cdf",
    "sturm_liouville_eigen",
    "variance",
    "whittaker_expansion3",
    "whittaker_w",
    "whittaker_w_scaled",
]
