from .core import SolveOutcome, SolverOptions, SolveStatus, solve
from .lp import LPResult, solve_lp
from .oracles import oracle_enumerate, oracle_grid_dp

__all__ = [
    "LPResult",
    "SolveOutcome",
    "SolveStatus",
    "SolverOptions",
    "oracle_enumerate",
    "oracle_grid_dp",
    "solve",
    "solve_lp",
]
