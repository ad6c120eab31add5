"""Desk-scale laboratory for the Lasso: solvers, design conditions, oracle bounds."""

from .core import DesignMatrix, Norms, Support, gram, norms, sign_vector, soft_threshold, support_of
from .errors import (
    ConvergenceError,
    InfeasibleError,
    LassoLabError,
    ParseError,
    PreconditionError,
    RefusalError,
)
from .solver import LassoSolution, SolverOptions, kkt_report, solve_bplp, solve_lasso, solve_noiseless_lasso

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "DesignMatrix",
    "InfeasibleError",
    "LassoLabError",
    "LassoSolution",
    "Norms",
    "ParseError",
    "PreconditionError",
    "RefusalError",
    "SolverOptions",
    "Support",
    "gram",
    "kkt_report",
    "norms",
    "sign_vector",
    "soft_threshold",
    "solve_bplp",
    "solve_lasso",
    "solve_noiseless_lasso",
    "support_of",
]
