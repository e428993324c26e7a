# qknit/tools/solvers/backend.py

import logging
import os
import shlex
import shutil
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

from dotenv import load_dotenv

from qknit.tools.errors import InvalidArgument
from qknit.tools.partition_model import PartitionSolution

load_dotenv()

logger = logging.getLogger(__name__)

DEFAULT_SMT_SOLVER = os.getenv("QKNIT_SMT_SOLVER", "z3")
DEFAULT_SOLVER_TIMEOUT = float(os.getenv("QKNIT_SOLVER_TIMEOUT", "600"))
DEFAULT_INCREMENTAL = os.getenv("QKNIT_SOLVER_INCREMENTAL", "false").lower() == "true"

# argv that puts well-known solvers into "SMT-LIB2 on stdin" mode
KNOWN_SOLVER_ARGS = {
    "z3": "-in -smt2",
    "cvc5": "--lang smt2 --incremental --produce-models",
    "yices-smt2": "--incremental",
}


class SolverKind(Enum):
    EXTERNAL_SMT = "external"
    INTERNAL_EXACT = "internal"


def get_solver_kind() -> str:
    """Backend named by QKNIT_SOLVER, internal by default."""
    return os.environ.get("QKNIT_SOLVER", SolverKind.INTERNAL_EXACT.value).lower()


def default_solver_args(executable: str) -> Tuple[str, ...]:
    configured = os.getenv("QKNIT_SMT_ARGS")
    if configured is not None:
        return tuple(shlex.split(configured))
    name = os.path.basename(executable)
    for known, args in KNOWN_SOLVER_ARGS.items():
        if name.startswith(known):
            return tuple(shlex.split(args))
    return ()


@dataclass(frozen=True)
class SolverBackend:
    kind: SolverKind = SolverKind.INTERNAL_EXACT
    executable: str = DEFAULT_SMT_SOLVER
    args: Tuple[str, ...] = field(default_factory=lambda: default_solver_args(DEFAULT_SMT_SOLVER))
    time_limit: float = DEFAULT_SOLVER_TIMEOUT
    incremental: bool = DEFAULT_INCREMENTAL

    def __post_init__(self):
        if not self.time_limit > 0:
            raise InvalidArgument(f"solver time limit must be > 0, got {self.time_limit}")

    @classmethod
    def external(cls, executable: Optional[str] = None, **kwargs) -> "SolverBackend":
        exe = executable or DEFAULT_SMT_SOLVER
        kwargs.setdefault("args", default_solver_args(exe))
        return cls(kind=SolverKind.EXTERNAL_SMT, executable=exe, **kwargs)

    @classmethod
    def internal(cls, **kwargs) -> "SolverBackend":
        return cls(kind=SolverKind.INTERNAL_EXACT, **kwargs)

    @classmethod
    def from_env(cls) -> "SolverBackend":
        kind = get_solver_kind()
        if kind == SolverKind.EXTERNAL_SMT.value:
            return cls.external()
        if kind != SolverKind.INTERNAL_EXACT.value:
            logger.warning(f"Unsupported solver backend: {kind}, falling back to the internal search")
        return cls.internal()

    @property
    def identity(self) -> str:
        if self.kind is SolverKind.INTERNAL_EXACT:
            return "internal-exact"
        return " ".join([self.executable, *self.args])

    def resolve_executable(self) -> Optional[str]:
        return shutil.which(self.executable)


class SolveStatus(Enum):
    OPTIMAL = "optimal"
    UNSAT = "unsat"
    TIMEOUT = "timeout"  # with an incumbent
    UNKNOWN = "unknown"  # timed out before any model


@dataclass(frozen=True)
class SolveOutcome:
    status: SolveStatus
    solution: Optional[PartitionSolution] = None
    iterations: int = 0
    elapsed: float = 0.0
    backend: str = ""
    message: str = ""

    @property
    def feasible(self) -> bool:
        return self.solution is not None
