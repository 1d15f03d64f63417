"""Learned low-dimensional projections for solving families of linear programs."""
from .errors import (AnchorInfeasible, BenchmarkAbort, ConfigError, ConvergenceFailure,
                     DdlpError, InfeasibleProblem, MissingCertificate, NumericalFailure,
                     OracleTooLarge, ParseError, ShapeError, SingularMatrix)
from .lp import LpInstance, LpSolution, SolverConfig, Status, check_feasible, solve_lp
from .projection import ProjectionMatrix, build_projected, evaluate_u, objective_ratio, recover

__version__ = "0.1.0"
