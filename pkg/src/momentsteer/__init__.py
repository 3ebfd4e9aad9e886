"""Steer agent ensembles between distributions by controlling power moments."""
from .densities import DensitySpec
from .engine import (
    AgentEnsemble,
    SteeringRun,
    propagate_agents,
    run_density_steering,
    run_occupation_steering,
)
from .errors import SteeringError
from .kernels import BACKEND
from .maxent import (
    MaxEntDensity,
    error_report,
    fit_maxent,
    kl_via_entropy,
    shannon_entropy,
    terminal_error_bound,
    tv_from_kl,
)
from .moments import (
    MomentSequence,
    hankel_of,
    is_strictly_positive,
    moments_of_density,
    moments_of_samples,
)
from .planner import SteeringPlan, derive_plan, find_k0
from .realizer import RationalDensity, minimize, realized_moments
from .sampler import RngStream, rejection_constant, sample_ensemble, sample_one
from .system import SystemSchedule, build_system_matrix, propagate, solve_control_moments

__version__ = "0.1.0"

__all__ = [
    "AgentEnsemble", "BACKEND", "DensitySpec", "MaxEntDensity", "MomentSequence",
    "RationalDensity", "RngStream", "SteeringError", "SteeringPlan", "SteeringRun",
    "SystemSchedule", "build_system_matrix", "derive_plan", "error_report", "find_k0",
    "fit_maxent", "hankel_of", "is_strictly_positive", "kl_via_entropy", "minimize",
    "moments_of_density", "moments_of_samples", "propagate", "propagate_agents",
    "realized_moments", "rejection_constant", "run_density_steering",
    "run_occupation_steering", "sample_ensemble", "sample_one", "shannon_entropy",
    "solve_control_moments", "terminal_error_bound", "tv_from_kl",
]
