"""
Canonical circuit representation.

A Circuit is an immutable, ordered list of 1- and 2-qubit gates. Everything else
in qknit (parsers, generators, cutting graph, simulator, knitting) speaks this IR.
JSON is the canonical on-disk format; see `parse_json` / `serialize_json`.
"""

import cmath
import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterable, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError

from qknit.tools.errors import InvalidArgument, SchemaError

logger = logging.getLogger(__name__)


class GateKind(Enum):
    H = "h"
    X = "x"
    Z = "z"
    S = "s"
    SDG = "sdg"
    RZ = "rz"
    CNOT = "cnot"
    CZ = "cz"
    SWAP = "swap"
    CRZ = "crz"
    MEASURE_Z = "measure_z"
    RESET = "reset"

    @property
    def num_qubits(self) -> int:
        return 2 if self in TWO_QUBIT_KINDS else 1

    @property
    def has_angle(self) -> bool:
        return self in (GateKind.RZ, GateKind.CRZ)

    @property
    def is_unitary(self) -> bool:
        return self not in (GateKind.MEASURE_Z, GateKind.RESET)


TWO_QUBIT_KINDS = frozenset({GateKind.CNOT, GateKind.CZ, GateKind.SWAP, GateKind.CRZ})

# accepted spellings in JSON input besides the canonical value
KIND_ALIASES: Dict[str, GateKind] = {
    "cx": GateKind.CNOT,
    "measure": GateKind.MEASURE_Z,
    "s_dag": GateKind.SDG,
}


def kind_from_name(name: str) -> GateKind:
    key = name.strip().lower()
    if key in KIND_ALIASES:
        return KIND_ALIASES[key]
    return GateKind(key)


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    qubits: Tuple[int, ...]
    angle: Optional[float] = None
    clbit: Optional[int] = None
    condition: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        if len(self.qubits) != self.kind.num_qubits:
            raise InvalidArgument(
                f"{self.kind.value} acts on {self.kind.num_qubits} qubit(s), got {list(self.qubits)}"
            )
        if len(set(self.qubits)) != len(self.qubits):
            raise InvalidArgument(f"{self.kind.value} qubits must be distinct, got {list(self.qubits)}")
        if self.kind.has_angle:
            if self.angle is None or not math.isfinite(self.angle):
                raise InvalidArgument(f"{self.kind.value} needs a finite angle, got {self.angle}")
        elif self.angle is not None:
            raise InvalidArgument(f"{self.kind.value} takes no angle")
        if self.kind is GateKind.MEASURE_Z and self.clbit is None:
            raise InvalidArgument("measure_z needs a classical target bit")
        if self.kind is not GateKind.MEASURE_Z and self.clbit is not None:
            raise InvalidArgument(f"{self.kind.value} cannot write a classical bit")

    @property
    def is_two_qubit(self) -> bool:
        return self.kind in TWO_QUBIT_KINDS

    def remap(self, qubit_map: Dict[int, int]) -> "Gate":
        return Gate(
            self.kind,
            tuple(qubit_map.get(q, q) for q in self.qubits),
            self.angle,
            self.clbit,
            self.condition,
        )

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"kind": self.kind.value, "qubits": list(self.qubits)}
        if self.angle is not None:
            out["angle"] = self.angle
        if self.clbit is not None:
            out["clbit"] = self.clbit
        if self.condition is not None:
            out["cond"] = list(self.condition)
        return out


def gate(
    kind: str,
    *qubits: int,
    angle: Optional[float] = None,
    clbit: Optional[int] = None,
    condition: Optional[Tuple[int, int]] = None,
) -> Gate:
    """Shorthand: gate("cnot", 0, 1), gate("rz", 2, angle=0.3)."""
    return Gate(kind_from_name(kind), tuple(qubits), angle, clbit, condition)


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    gates: Tuple[Gate, ...] = field(default_factory=tuple)
    num_clbits: int = 0

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.num_qubits < 1:
            raise InvalidArgument(f"circuit needs at least one qubit, got {self.num_qubits}")
        if self.num_clbits < 0:
            raise InvalidArgument("negative classical register size")
        for index, g in enumerate(self.gates):
            for q in g.qubits:
                if not 0 <= q < self.num_qubits:
                    raise InvalidArgument(f"gate {index}: qubit {q} out of range for width {self.num_qubits}")
            if g.clbit is not None and not 0 <= g.clbit < self.num_clbits:
                raise InvalidArgument(f"gate {index}: clbit {g.clbit} out of range ({self.num_clbits} clbits)")
            if g.condition is not None:
                bit, value = g.condition
                if not 0 <= bit < self.num_clbits or value not in (0, 1):
                    raise InvalidArgument(f"gate {index}: bad condition {g.condition}")

    @property
    def two_qubit_gates(self) -> List[Tuple[int, Gate]]:
        return [(i, g) for i, g in enumerate(self.gates) if g.is_two_qubit]

    def count_ops(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for g in self.gates:
            counts[g.kind.value] = counts.get(g.kind.value, 0) + 1
        return dict(sorted(counts.items()))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "qubits": self.num_qubits,
            "clbits": self.num_clbits,
            "gates": [g.to_dict() for g in self.gates],
        }


# ---------------------------------------------------------------------------
# JSON schema
# ---------------------------------------------------------------------------


class GateModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: str
    qubits: List[int]
    angle: Optional[float] = None
    clbit: Optional[int] = None
    cond: Optional[Tuple[int, Literal[0, 1]]] = None


class CircuitModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    qubits: int
    clbits: int = 0
    gates: List[GateModel]


def _format_loc(loc: Iterable[Any]) -> str:
    path = ""
    for part in loc:
        path += f"[{part}]" if isinstance(part, int) else (f".{part}" if path else str(part))
    return path or "$"


def circuit_from_model(model: CircuitModel) -> Circuit:
    problems: List[Dict[str, str]] = []
    if model.qubits < 1:
        problems.append({"path": "qubits", "message": "must be >= 1"})
    if model.clbits < 0:
        problems.append({"path": "clbits", "message": "must be >= 0"})
    gates: List[Gate] = []
    for i, gm in enumerate(model.gates):
        where = f"gates[{i}]"
        try:
            kind = kind_from_name(gm.kind)
        except ValueError:
            problems.append({"path": f"{where}.kind", "message": f"unknown gate kind '{gm.kind}'"})
            continue
        for j, q in enumerate(gm.qubits):
            if not 0 <= q < max(model.qubits, 0):
                problems.append({"path": f"{where}.qubits[{j}]", "message": f"index {q} >= {model.qubits}"})
        if gm.clbit is not None and not 0 <= gm.clbit < model.clbits:
            problems.append({"path": f"{where}.clbit", "message": f"index {gm.clbit} >= {model.clbits}"})
        if gm.cond is not None and not 0 <= gm.cond[0] < model.clbits:
            problems.append({"path": f"{where}.cond", "message": f"bit {gm.cond[0]} >= {model.clbits}"})
        if problems and problems[-1]["path"].startswith(where):
            continue
        try:
            gates.append(Gate(kind, tuple(gm.qubits), gm.angle, gm.clbit, gm.cond))
        except InvalidArgument as e:
            problems.append({"path": where, "message": str(e)})
    if problems:
        first = problems[0]
        raise SchemaError(f"{first['path']}: {first['message']}", problems)
    return Circuit(model.qubits, tuple(gates), model.clbits)


def parse_json(text: str) -> Circuit:
    """Parse the canonical JSON circuit format."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(
            f"line {e.lineno} column {e.colno}: {e.msg}",
            [{"path": f"line {e.lineno}", "message": e.msg}],
        ) from e
    try:
        model = CircuitModel.model_validate(raw)
    except ValidationError as e:
        problems = [{"path": _format_loc(err["loc"]), "message": err["msg"]} for err in e.errors()]
        first = problems[0]
        raise SchemaError(f"{first['path']}: {first['message']}", problems) from e
    circuit = circuit_from_model(model)
    logger.debug(f"[parse_json] {circuit.num_qubits} qubits, {len(circuit.gates)} gates")
    return circuit


def serialize_json(circuit: Circuit) -> str:
    return json.dumps(circuit.to_dict(), sort_keys=True, separators=(",", ":"))


def load_circuit(path: str) -> Circuit:
    """Read a .json or .qasm file."""
    from qknit.tools.qasm import parse_qasm2_subset

    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    if path.lower().endswith(".qasm"):
        return parse_qasm2_subset(text)
    return parse_json(text)


# ---------------------------------------------------------------------------
# Unitaries (shared by the simulator and the QPD validator)
# ---------------------------------------------------------------------------

_SQRT_HALF = 1.0 / math.sqrt(2.0)

_FIXED_MATRICES: Dict[GateKind, np.ndarray] = {
    GateKind.H: np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT_HALF,
    GateKind.X: np.array([[0, 1], [1, 0]], dtype=complex),
    GateKind.Z: np.array([[1, 0], [0, -1]], dtype=complex),
    GateKind.S: np.array([[1, 0], [0, 1j]], dtype=complex),
    GateKind.SDG: np.array([[1, 0], [0, -1j]], dtype=complex),
    # two-qubit matrices are in the basis |q_first q_second>
    GateKind.CNOT: np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    GateKind.CZ: np.diag([1, 1, 1, -1]).astype(complex),
    GateKind.SWAP: np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}


def gate_matrix(kind: GateKind, angle: Optional[float] = None) -> np.ndarray:
    if kind is GateKind.RZ:
        return np.diag([cmath.exp(-0.5j * angle), cmath.exp(0.5j * angle)])
    if kind is GateKind.CRZ:
        return np.diag([1, 1, cmath.exp(-0.5j * angle), cmath.exp(0.5j * angle)])
    if kind not in _FIXED_MATRICES:
        raise InvalidArgument(f"{kind.value} has no unitary matrix")
    return _FIXED_MATRICES[kind]
