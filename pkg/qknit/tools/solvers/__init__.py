from qknit.tools.solvers.backend import (
    SolveOutcome,
    SolverBackend,
    SolverKind,
    SolveStatus,
    get_solver_kind,
)
from qknit.tools.solvers.exact import solve_exact
from qknit.tools.solvers.external import ExternalResult, solve_external
from qknit.tools.solvers.minimize import minimize

__all__ = [
    "ExternalResult",
    "SolveOutcome",
    "SolveStatus",
    "SolverBackend",
    "SolverKind",
    "get_solver_kind",
    "minimize",
    "solve_exact",
    "solve_external",
]
