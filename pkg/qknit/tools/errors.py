"""
Exception hierarchy shared by the qknit tools.

Every error knows the pipeline stage it was raised in so the command line can
report "encode failed: ..." instead of a bare traceback.
"""

from typing import Any, Dict, List, Optional


class QknitError(Exception):
    stage = "run"

    def __init__(self, message: str, *, stage: Optional[str] = None, **context: Any):
        super().__init__(message)
        if stage is not None:
            self.stage = stage
        self.context: Dict[str, Any] = context

    def to_dict(self) -> Dict[str, Any]:
        return {"error": type(self).__name__, "stage": self.stage, "message": str(self), **self.context}


class InvalidArgument(QknitError, ValueError):
    stage = "input"


class SchemaError(QknitError, ValueError):
    """JSON circuit does not follow the schema; `problems` lists (path, message) pairs."""

    stage = "parse"

    def __init__(self, message: str, problems: Optional[List[Dict[str, str]]] = None):
        super().__init__(message, problems=problems or [])
        self.problems = problems or []


class ParseError(QknitError, ValueError):
    stage = "parse"

    def __init__(self, message: str, *, token: str = "", line: int = 0):
        super().__init__(f"line {line}: {message} (near '{token}')", token=token, line=line)
        self.token = token
        self.line = line


class UnsupportedGate(QknitError):
    stage = "graph"


class UnpricedCut(QknitError):
    stage = "encode"


class IneligibleGroupMember(QknitError, ValueError):
    stage = "cost"


class InvalidProblem(QknitError, ValueError):
    stage = "encode"


class InfeasibleTrivially(QknitError):
    stage = "encode"


class InconsistentModel(QknitError):
    stage = "decode"


class TooLarge(QknitError):
    stage = "solve"


class SolverCrashed(QknitError):
    stage = "solve"


class ModelParseError(QknitError):
    stage = "solve"


class TooWide(QknitError):
    stage = "simulate"


class GroupedCutUnsupported(QknitError):
    stage = "knit"
