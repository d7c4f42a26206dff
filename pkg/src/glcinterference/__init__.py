"""Interference prediction for mobile networks with Gaussian linear-control mobility.

Nodes move as ``dx = A x dt + dw`` with positions ``y = C x``. Given states at
time ``s``, the package predicts the mean, variance and moment generating
function of the aggregate interference at a reference node at time ``t``.
It also checks when a Gaussian binomial point process is an adequate
stand-in, and runs Monte Carlo simulations for validation.
"""

from .bpp import (
    BppConditionWarning,
    BppVerdict,
    bpp_approx_mean,
    bpp_approx_mgf,
    brownian_bpp_mean_closed,
    check_bpp_condition,
)
from .cgppf import Integrand, IntegrandKind, PathLoss, SeriesControls, eval_quadrature, eval_series
from .errors import (
    DegenerateCovarianceError,
    DivergenceError,
    DomainError,
    GlcError,
    HomogeneityError,
    InvalidArgumentError,
    MgfDomainError,
    ScenarioValidationError,
    SeriesDivergenceError,
)
from .lindyn import GaussianLocation, GlcModel, NodeState, predict_node_distribution, relative_distribution
from .montecarlo import EmpiricalStats, empirical_statistics, interference_samples, simulate_trajectories
from .predict import (
    FadingModel,
    PredictionResult,
    Scenario,
    mean_interference,
    mgf_interference,
    variance_interference,
)
from .scenarios import ScenarioFile, load_preset, load_scenario, load_scenario_file, write_scenario

__version__ = "0.1.0"

__all__ = [
    "BppConditionWarning",
    "BppVerdict",
    "DegenerateCovarianceError",
    "DivergenceError",
    "DomainError",
    "EmpiricalStats",
    "FadingModel",
    "GaussianLocation",
    "GlcError",
    "GlcModel",
    "HomogeneityError",
    "Integrand",
    "IntegrandKind",
    "InvalidArgumentError",
    "MgfDomainError",
    "NodeState",
    "PathLoss",
    "PredictionResult",
    "Scenario",
    "ScenarioFile",
    "ScenarioValidationError",
    "SeriesControls",
    "SeriesDivergenceError",
    "bpp_approx_mean",
    "bpp_approx_mgf",
    "brownian_bpp_mean_closed",
    "check_bpp_condition",
    "empirical_statistics",
    "eval_quadrature",
    "eval_series",
    "interference_samples",
    "load_preset",
    "load_scenario",
    "load_scenario_file",
    "mean_interference",
    "mgf_interference",
    "predict_node_distribution",
    "relative_distribution",
    "simulate_trajectories",
    "variance_interference",
    "write_scenario",
]
