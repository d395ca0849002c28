"""Hessian-quotient curvature equations on graphs: solver and verification tools."""
from .errors import (ConeViolationError, ConfigError, DomainError, HessQuotError, SamplingError,
                     StageFailure, SubsolutionError)
from .estimator import HessianQuotientSolver
from .grid import DomainSpec, Field, Grid, build_grid, discrete_norms, jet_at
from .hypersurface import GraphJet, surface_data
from .pde_operator import OperatorSpec, linearize, residual
from .psi import PsiModel, manufactured_rhs, regularize
from .solver import SolveReport, SolverConfig, builtin_subsolution, newton_stage, solve
from .symcalc import in_cone, quotient_jet, sigma

__all__ = [
    "ConeViolationError", "ConfigError", "DomainError", "HessQuotError", "SamplingError",
    "StageFailure", "SubsolutionError", "HessianQuotientSolver", "DomainSpec", "Field", "Grid",
    "build_grid", "discrete_norms", "jet_at", "GraphJet", "surface_data", "OperatorSpec",
    "linearize", "residual", "PsiModel", "manufactured_rhs", "regularize", "SolveReport",
    "SolverConfig", "builtin_subsolution", "newton_stage", "solve", "in_cone", "quotient_jet", "sigma",
]
__version__ = "0.1.0"
