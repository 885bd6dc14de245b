"""Entire radial solutions of Liouville systems, their masses and the shooting map."""

__version__ = "0.1.0"

from .coeff import CoefficientMatrix, PiResidual, lambda_J, pi_residual, validate_matrix
from .masses_pi import MassVector, SolveReport, TailFit, check_pi, compute_masses, solve_report, tail_fit
from .pohozaev import PohozaevTrace, linear_residual, nonlinear_residual, pohozaev_trace
from .radial_ode import RadialProfile, SolveOptions, evaluate_profile, solve_radial
from .shooting import (
    InversionResult,
    InversionTarget,
    NewtonOptions,
    complete_sigma,
    continuation_solve,
    injectivity_sweep,
    invert_sigma,
)
from .variational import VariationalBasis, jacobian_sigma, kernel_check, solve_linearized

__all__ = [
    "CoefficientMatrix", "PiResidual", "lambda_J", "pi_residual", "validate_matrix",
    "MassVector", "SolveReport", "TailFit", "check_pi", "compute_masses", "solve_report",
    "tail_fit", "PohozaevTrace", "linear_residual", "nonlinear_residual", "pohozaev_trace",
    "RadialProfile", "SolveOptions", "evaluate_profile", "solve_radial", "InversionResult",
    "InversionTarget", "NewtonOptions", "complete_sigma", "continuation_solve",
    "injectivity_sweep", "invert_sigma", "VariationalBasis", "jacobian_sigma", "kernel_check",
    "solve_linearized",
]
