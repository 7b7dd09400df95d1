"""Spectral Galerkin solver for semilinear parabolic problems on mapped balls.

The trial space is (1 - |x|^2) times polynomials of degree n on the unit disk
or ball; a smooth map phi carries the ball onto the physical domain, and the
coefficient ODE is integrated in time by an adaptive stiff solver.
"""
__version__ = "0.1.0"

from .errors import (AssemblyError, ConfigError, EvaluationError, InvalidArgument,
                     SingularJacobianError, SpectralError, StiffFailure)
from .quadrature import ball_rule, disk_rule, rule_for
from .basis2d import RidgeBasis
from .basis3d import BallBasis
from .geometry import MappedDomain
from .problems import ParabolicProblem, get_problem
from .galerkin import GalerkinSystem
from .timestepper import integrate, solve_ivp

__all__ = [
    "__version__", "SpectralError", "InvalidArgument", "SingularJacobianError",
    "AssemblyError", "EvaluationError", "StiffFailure", "ConfigError",
    "disk_rule", "ball_rule", "rule_for", "RidgeBasis", "BallBasis", "MappedDomain",
    "ParabolicProblem", "get_problem", "GalerkinSystem", "integrate", "solve_ivp",
]
