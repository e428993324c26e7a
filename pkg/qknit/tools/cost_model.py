"""
Sampling-overhead cost model.

Per-cut multiplicative overheads (gamma squared) for wire and gate cuts with and
without classical communication (CC) and ancilla qubits, the cost of a group of
simultaneous cuts, and the budget arithmetic turning a sampling frequency and a
runtime into the largest overhead (and cut count) a run can afford.

Encoders and the exact search work on integers: log10 of every cost scaled by 10^6
and rounded up (`to_fixed_point`), so any solution they accept is within budget in
exact arithmetic too.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from qknit.tools.circuit_ir import GateKind
from qknit.tools.errors import IneligibleGroupMember, InvalidArgument, UnpricedCut

logger = logging.getLogger(__name__)

FIXED_POINT_SCALE = 1_000_000
DEFAULT_BASE_SHOTS = 8000
SECONDS_PER_DAY = 86_400


class CutFamily(Enum):
    WIRE = "wire"
    GATE_CNOT = "cnot"
    GATE_CZ = "cz"
    GATE_SWAP = "swap"
    GATE_CR = "cr"

    @property
    def is_gate(self) -> bool:
        return self is not CutFamily.WIRE


# cuts that may join the one simultaneous (Bell-pair) group of a solution
GROUP_ELIGIBLE = frozenset({CutFamily.WIRE, CutFamily.GATE_CNOT, CutFamily.GATE_CZ})
ALL_FAMILIES = frozenset(CutFamily)
GATE_FAMILIES = frozenset(f for f in CutFamily if f.is_gate)
WIRE_ONLY = frozenset({CutFamily.WIRE})


class GroupClass(Enum):
    BELL_GROUP = "bell_group"
    SWAP = "swap"
    CR = "cr"


class BudgetFamily(Enum):
    BELL_GROUP = "bell_group"
    NINE_POW = "nine_pow"
    SIXTEEN_POW = "sixteen_pow"


@dataclass(frozen=True)
class CutKind:
    family: CutFamily
    angle: Optional[float] = None
    cc_available: bool = False
    ancilla_available: bool = False

    def __post_init__(self):
        if self.family is CutFamily.GATE_CR:
            if self.angle is None or not math.isfinite(self.angle):
                raise InvalidArgument(f"CR cut needs a finite angle, got {self.angle}")

    @property
    def group_eligible(self) -> bool:
        return self.family in GROUP_ELIGIBLE


_GATE_FAMILY = {
    GateKind.CNOT: CutFamily.GATE_CNOT,
    GateKind.CZ: CutFamily.GATE_CZ,
    GateKind.SWAP: CutFamily.GATE_SWAP,
    GateKind.CRZ: CutFamily.GATE_CR,
}


def cut_kind_for_gate(
    kind: GateKind,
    angle: Optional[float] = None,
    cc_available: bool = False,
    ancilla_available: bool = False,
) -> CutKind:
    """Cut kind of a gate cut on `kind`. CRZ(l) is priced as CR(l/2)."""
    if kind not in _GATE_FAMILY:
        raise UnpricedCut(f"no quasiprobability decomposition is known for a {kind.value} gate cut")
    family = _GATE_FAMILY[kind]
    theta = angle / 2 if family is CutFamily.GATE_CR else None
    return CutKind(family, theta, cc_available, ancilla_available)


def wire_cut(cc_available: bool = False, ancilla_available: bool = False) -> CutKind:
    return CutKind(CutFamily.WIRE, None, cc_available, ancilla_available)


@dataclass(frozen=True)
class GammaTable:
    """Individual gamma^2 values; defaults are the known minimal overheads."""

    wire_cc: float = 9.0
    wire_no_cc: float = 16.0
    cnot: float = 9.0
    swap_no_cc: float = 49.0
    swap_cc_ancilla: float = 16.0
    cr_cc_bound: float = 4.0

    def gamma_sq(self, kind: CutKind) -> float:
        family = kind.family
        if family is CutFamily.WIRE:
            return self.wire_cc if kind.cc_available else self.wire_no_cc
        if family in (CutFamily.GATE_CNOT, CutFamily.GATE_CZ):
            return self.cnot
        if family is CutFamily.GATE_SWAP:
            return self.swap_cc_ancilla if kind.cc_available and kind.ancilla_available else self.swap_no_cc
        if family is CutFamily.GATE_CR:
            value = (1.0 + 2.0 * abs(math.sin(kind.angle))) ** 2
            # CC never makes a cut dearer; 4 is only an upper bound
            return min(value, self.cr_cc_bound) if kind.cc_available else value
        raise UnpricedCut(f"unpriced cut family {family}")

    def group_cost(self, k: int, group_class: GroupClass = GroupClass.BELL_GROUP) -> float:
        return group_cost(k, group_class)


DEFAULT_GAMMA = GammaTable()


def gamma_sq(kind: CutKind, gamma: GammaTable = DEFAULT_GAMMA) -> float:
    return gamma.gamma_sq(kind)


def group_cost(k: int, group_class: GroupClass = GroupClass.BELL_GROUP) -> int:
    if k < 0:
        raise InvalidArgument(f"group size must be >= 0, got {k}")
    if group_class is GroupClass.BELL_GROUP:
        return (2 ** (k + 1) - 1) ** 2
    if group_class is GroupClass.SWAP:
        return 16**k
    return 4**k


def family_cost(k: int, family: BudgetFamily) -> int:
    """Total overhead of k cuts under one of the three reference cost families."""
    if family is BudgetFamily.BELL_GROUP:
        return group_cost(k, GroupClass.BELL_GROUP)
    if family is BudgetFamily.NINE_POW:
        return 9**k
    return 16**k


def solution_overhead(cuts: Iterable[Tuple[CutKind, bool]], gamma: GammaTable = DEFAULT_GAMMA) -> float:
    """S = product of individual gamma^2 times the cost of the one simultaneous group."""
    individual = 1.0
    grouped = 0
    for kind, is_grouped in cuts:
        if is_grouped:
            if not kind.group_eligible:
                raise IneligibleGroupMember(f"{kind.family.value} cuts cannot be grouped")
            grouped += 1
        else:
            individual *= gamma.gamma_sq(kind)
    return individual * group_cost(grouped, GroupClass.BELL_GROUP)


# ---------------------------------------------------------------------------
# log10 fixed point
# ---------------------------------------------------------------------------


def to_fixed_point(value: float) -> int:
    """ceil(log10(value) * 10^6); the tiny slack keeps exact powers of ten exact."""
    if value < 1:
        raise InvalidArgument(f"overheads are >= 1, got {value}")
    return int(math.ceil(math.log10(value) * FIXED_POINT_SCALE - 1e-6))


def from_fixed_point(n: int) -> float:
    return 10 ** (n / FIXED_POINT_SCALE)


def budget_to_fixed_point(max_overhead: float) -> int:
    """Largest fixed-point cost a solution may reach, rounded down."""
    if max_overhead < 1:
        return -1
    return int(math.floor(math.log10(max_overhead) * FIXED_POINT_SCALE))


def group_cost_table_fp(max_k: int) -> List[int]:
    return [to_fixed_point(group_cost(k)) for k in range(max_k + 1)]


# ---------------------------------------------------------------------------
# Budget
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Budget:
    sampling_frequency: float = 1e6
    runtime: float = float(SECONDS_PER_DAY)
    base_shots: int = DEFAULT_BASE_SHOTS

    def __post_init__(self):
        for name in ("sampling_frequency", "runtime", "base_shots"):
            value = getattr(self, name)
            if not value > 0 or not math.isfinite(value):
                raise InvalidArgument(f"budget {name} must be positive, got {value}")

    @classmethod
    def from_total_samples(cls, total: float, base_shots: int = DEFAULT_BASE_SHOTS) -> "Budget":
        return cls(sampling_frequency=float(total), runtime=1.0, base_shots=base_shots)

    @property
    def max_total_samples(self) -> float:
        return self.sampling_frequency * self.runtime

    @property
    def max_overhead(self) -> float:
        return self.max_total_samples / self.base_shots

    @property
    def max_overhead_fp(self) -> int:
        return budget_to_fixed_point(self.max_overhead)

    def to_dict(self) -> Dict[str, float]:
        return {
            "base_shots": self.base_shots,
            "sampling_frequency": self.sampling_frequency,
            "runtime": self.runtime,
            "max_total_samples": self.max_total_samples,
            "max_overhead": self.max_overhead,
        }


def max_cuts_within_budget(budget: Budget, family: BudgetFamily) -> int:
    k = 0
    while budget.base_shots * family_cost(k + 1, family) <= budget.max_total_samples:
        k += 1
    return k


def budget_table(
    frequencies: Sequence[float],
    runtimes: Sequence[float],
    families: Sequence[BudgetFamily],
    base_shots: int = DEFAULT_BASE_SHOTS,
) -> List[Dict[str, object]]:
    rows = []
    for runtime in runtimes:
        for freq in frequencies:
            budget = Budget(freq, runtime, base_shots)
            for family in families:
                rows.append(
                    {
                        "frequency_hz": freq,
                        "runtime_s": runtime,
                        "family": family.value,
                        "max_cuts": max_cuts_within_budget(budget, family),
                    }
                )
    return rows
