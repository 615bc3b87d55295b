"""Shared numeric kernels: linear programming, branch and bound, eigenpairs."""
from .eigen import min_eigenpair
from .milp import MilpResult, MixedIntegerProgram, solve_milp
from .simplex import BasisState, LinearProgram, LpResult, SimplexEngine, solve_lp
from .tolerances import DEFAULT_TOLS, Tolerances

__all__ = [
    "BasisState",
    "DEFAULT_TOLS",
    "LinearProgram",
    "LpResult",
    "MilpResult",
    "MixedIntegerProgram",
    "SimplexEngine",
    "Tolerances",
    "min_eigenpair",
    "solve_lp",
    "solve_milp",
]
