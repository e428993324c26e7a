"""
Tiny formula AST for the partition model (Booleans + linear integer arithmetic).

Nodes print as SMT-LIB2 terms and evaluate against a plain {name: value} model, so
the same assertions that go to an external solver can be re-checked in-process.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Dict, FrozenSet, Mapping, Tuple, Union

Value = Union[bool, int]


class Sort(Enum):
    BOOL = "Bool"
    INT = "Int"


class Formula(ABC):
    @abstractmethod
    def to_smt(self) -> str: ...

    @abstractmethod
    def evaluate(self, model: Mapping[str, Value]) -> Value: ...

    @abstractmethod
    def symbols(self) -> FrozenSet[str]: ...

    def __str__(self) -> str:
        return self.to_smt()


@dataclass(frozen=True)
class Const(Formula):
    value: Value

    def to_smt(self) -> str:
        if isinstance(self.value, bool):
            return "true" if self.value else "false"
        return str(self.value) if self.value >= 0 else f"(- {-self.value})"

    def evaluate(self, model):
        return self.value

    def symbols(self):
        return frozenset()


@dataclass(frozen=True)
class Sym(Formula):
    name: str
    sort: Sort = Sort.BOOL

    def to_smt(self) -> str:
        return self.name

    def evaluate(self, model):
        return model[self.name]

    def symbols(self):
        return frozenset({self.name})


def _implies(a, b):
    return (not a) or b


def _distinct(*xs):
    return len(set(xs)) == len(xs)


_EVAL = {
    "and": lambda *xs: all(xs),
    "or": lambda *xs: any(xs),
    "not": lambda x: not x,
    "=>": _implies,
    "=": lambda *xs: all(x == xs[0] for x in xs),
    "distinct": _distinct,
    "ite": lambda c, a, b: a if c else b,
    "+": lambda *xs: sum(xs),
    "<=": lambda a, b: a <= b,
    "<": lambda a, b: a < b,
    ">=": lambda a, b: a >= b,
}


@dataclass(frozen=True)
class App(Formula):
    op: str
    args: Tuple[Formula, ...]

    def to_smt(self) -> str:
        return f"({self.op} {' '.join(a.to_smt() for a in self.args)})"

    def evaluate(self, model):
        if self.op in ("and", "or"):
            # short-circuit keeps partial models usable for ite guards
            values = (a.evaluate(model) for a in self.args)
            return all(values) if self.op == "and" else any(values)
        return _EVAL[self.op](*(a.evaluate(model) for a in self.args))

    def symbols(self):
        out: FrozenSet[str] = frozenset()
        for a in self.args:
            out |= a.symbols()
        return out


TRUE = Const(True)
FALSE = Const(False)
ZERO = Const(0)
ONE = Const(1)


def and_(*args: Formula) -> Formula:
    if not args:
        return TRUE
    return args[0] if len(args) == 1 else App("and", tuple(args))


def or_(*args: Formula) -> Formula:
    if not args:
        return FALSE
    return args[0] if len(args) == 1 else App("or", tuple(args))


def not_(a: Formula) -> Formula:
    return App("not", (a,))


def implies(a: Formula, b: Formula) -> Formula:
    return App("=>", (a, b))


def eq(a: Formula, b: Formula) -> Formula:
    return App("=", (a, b))


def distinct(a: Formula, b: Formula) -> Formula:
    return App("distinct", (a, b))


def ite(c: Formula, a: Formula, b: Formula) -> Formula:
    return App("ite", (c, a, b))


def add(*args: Formula) -> Formula:
    if not args:
        return ZERO
    return args[0] if len(args) == 1 else App("+", tuple(args))


def le(a: Formula, b: Formula) -> Formula:
    return App("<=", (a, b))


def lt(a: Formula, b: Formula) -> Formula:
    return App("<", (a, b))


def ge(a: Formula, b: Formula) -> Formula:
    return App(">=", (a, b))


def count(*conditions: Formula) -> Formula:
    """Number of true conditions as an Int term."""
    return add(*(ite(c, ONE, ZERO) for c in conditions))


def declaration(name: str, sort: Sort) -> str:
    return f"(declare-fun {name} () {sort.value})"


def check(formula: Formula, model: Dict[str, Value]) -> bool:
    return bool(formula.evaluate(model))
