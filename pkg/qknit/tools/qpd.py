"""
Quasiprobability decompositions of two-qubit gates into local operations.

A QPD is a list of terms `(a_i, F_i)`; each F_i is a short sequence of local gates on
side 0 (first gate qubit) and side 1 (second gate qubit), optionally with Z
measurements. Measurements either enter the estimator as a sign (-1)^bit
(`sign_bits`) or feed a conditional gate on the other side (classical
communication). `validate_qpd` checks Σ a_i F_i against the gate's channel on all
16 two-qubit Pauli inputs.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from qknit.tools.circuit_ir import Circuit, Gate, GateKind, gate, gate_matrix
from qknit.tools.errors import InvalidArgument, UnpricedCut
from qknit.tools.simulator import PAULI_MATRICES

logger = logging.getLogger(__name__)

QPD_CONFIG = {
    "tolerance": 1e-10,
}

LocalOp = Tuple[int, Gate]  # (side, gate acting on local qubit 0)


@dataclass(frozen=True)
class QPDTerm:
    coefficient: float
    ops: Tuple[LocalOp, ...] = ()
    num_clbits: int = 0
    sign_bits: Tuple[int, ...] = ()

    def fragment(self, side: int) -> Tuple[Gate, ...]:
        return tuple(g for s, g in self.ops if s == side)

    @property
    def linked(self) -> bool:
        """True when a conditional gate reads a bit measured on the other side."""
        written: Dict[int, int] = {}
        for side, g in self.ops:
            if g.kind is GateKind.MEASURE_Z:
                written[g.clbit] = side
            if g.condition is not None and written.get(g.condition[0], side) != side:
                return True
        return False


@dataclass(frozen=True)
class QPD:
    name: str
    target: Optional[GateKind]
    terms: Tuple[QPDTerm, ...]
    angle: Optional[float] = None

    @property
    def kappa(self) -> float:
        return sum(abs(t.coefficient) for t in self.terms)

    @property
    def coefficients(self) -> List[float]:
        return [t.coefficient for t in self.terms]

    @property
    def num_clbits(self) -> int:
        return max((t.num_clbits for t in self.terms), default=0)

    def with_coefficients(self, coefficients: Sequence[float]) -> "QPD":
        if len(coefficients) != len(self.terms):
            raise InvalidArgument(
                f"{self.name}: expected {len(self.terms)} coefficients, got {len(coefficients)}"
            )
        terms = tuple(
            QPDTerm(float(c), t.ops, t.num_clbits, t.sign_bits) for c, t in zip(coefficients, self.terms)
        )
        return QPD(self.name, self.target, terms, self.angle)

    def target_matrix(self) -> np.ndarray:
        if self.target is None:
            return np.eye(4, dtype=complex)
        return gate_matrix(self.target, self.angle)


@dataclass
class QPDValidation:
    passed: bool
    max_deviation: float
    kappa: float
    details: Dict[str, float] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Term building blocks
# ---------------------------------------------------------------------------


def _op(side: int, kind: str, **kwargs) -> LocalOp:
    return side, gate(kind, 0, **kwargs)


def _measure(side: int, bit: int = 0) -> LocalOp:
    return _op(side, "measure_z", clbit=bit)


def _cz_terms(cc: bool) -> List[QPDTerm]:
    """Six-term local decomposition of CZ with κ = 3."""
    terms = [
        QPDTerm(0.5, (_op(0, "s"), _op(1, "s"))),
        QPDTerm(0.5, (_op(0, "sdg"), _op(1, "sdg"))),
    ]
    for measured in (0, 1):
        other = 1 - measured
        if cc:
            # feed-forward: the outcome selects Z on the partner
            terms.append(QPDTerm(0.5, (_measure(measured), _op(other, "z", condition=(0, 1))), 1))
            terms.append(
                QPDTerm(-0.5, (_measure(measured), _op(other, "z"), _op(other, "z", condition=(0, 1))), 1)
            )
        else:
            terms.append(QPDTerm(0.5, (_measure(measured),), 1, (0,)))
            terms.append(QPDTerm(-0.5, (_measure(measured), _op(other, "z")), 1, (0,)))
    return terms


def qpd_cz(cc: bool = False) -> QPD:
    return QPD("cz-cc" if cc else "cz", GateKind.CZ, tuple(_cz_terms(cc)))


def qpd_cnot(cc: bool = False) -> QPD:
    """CNOT = (I ⊗ H) CZ (I ⊗ H); side 0 is the control."""
    wrap = _op(1, "h")
    terms = tuple(
        QPDTerm(t.coefficient, (wrap,) + t.ops + (wrap,), t.num_clbits, t.sign_bits) for t in _cz_terms(cc)
    )
    return QPD("cnot-cc" if cc else "cnot", GateKind.CNOT, terms)


def qpd_crz(angle: float) -> QPD:
    """
    CRZ(λ) = (I ⊗ RZ(λ/2)) · exp(i λ/4 Z⊗Z). The ZZ rotation splits into identity,
    Z⊗Z, and four measure/phase terms, so κ = 1 + 2|sin(λ/2)|.
    """
    theta = angle / 4.0
    c2, s2, cs = math.cos(theta) ** 2, math.sin(theta) ** 2, math.sin(theta) * math.cos(theta)
    tail = (_op(1, "rz", angle=angle / 2.0),)
    candidates = [
        QPDTerm(c2, tail),
        QPDTerm(s2, (_op(0, "z"), _op(1, "z")) + tail),
        QPDTerm(cs, (_measure(0), _op(1, "sdg")) + tail, 1, (0,)),
        QPDTerm(-cs, (_measure(0), _op(1, "s")) + tail, 1, (0,)),
        QPDTerm(cs, (_op(0, "sdg"), _measure(1)) + tail, 1, (0,)),
        QPDTerm(-cs, (_op(0, "s"), _measure(1)) + tail, 1, (0,)),
    ]
    terms = tuple(t for t in candidates if t.coefficient != 0.0)
    return QPD("crz", GateKind.CRZ, terms, angle)


def identity_qpd() -> QPD:
    return QPD("identity", None, (QPDTerm(1.0),))


def qpd_for_gate(g: Gate, cc: bool = False) -> QPD:
    if g.kind is GateKind.CNOT:
        return qpd_cnot(cc)
    if g.kind is GateKind.CZ:
        return qpd_cz(cc)
    if g.kind is GateKind.CRZ:
        return qpd_crz(g.angle)
    raise UnpricedCut(f"no local decomposition shipped for {g.kind.value}", stage="knit")


def move_circuit() -> Circuit:
    """Moves qubit 0's state onto fresh qubit 1: CNOT, H, measure, conditional Z."""
    return Circuit(
        2,
        (
            gate("cnot", 0, 1),
            gate("h", 0),
            gate("measure_z", 0, clbit=0),
            gate("z", 1, condition=(0, 1)),
        ),
        num_clbits=1,
    )


# ---------------------------------------------------------------------------
# Channel evaluation
# ---------------------------------------------------------------------------

_P0 = np.diag([1, 0]).astype(complex)
_P1 = np.diag([0, 1]).astype(complex)
_I2 = np.eye(2, dtype=complex)


def _embed(matrix: np.ndarray, side: int) -> np.ndarray:
    return np.kron(matrix, _I2) if side == 0 else np.kron(_I2, matrix)


def apply_term(rho: np.ndarray, term: QPDTerm) -> np.ndarray:
    """F_i(rho) for a 4×4 operator, summing measurement branches with their signs."""
    branches: List[Tuple[np.ndarray, Tuple[int, ...]]] = [(rho, (0,) * term.num_clbits)]
    for side, g in term.ops:
        nxt = []
        for op, bits in branches:
            if g.condition is not None and bits[g.condition[0]] != g.condition[1]:
                nxt.append((op, bits))
            elif g.kind.is_unitary:
                k = _embed(gate_matrix(g.kind, g.angle), side)
                nxt.append((k @ op @ k.conj().T, bits))
            elif g.kind is GateKind.MEASURE_Z:
                for outcome, proj in ((0, _P0), (1, _P1)):
                    p = _embed(proj, side)
                    nbits = bits[: g.clbit] + (outcome,) + bits[g.clbit + 1:]
                    nxt.append((p @ op @ p, nbits))
            else:
                raise InvalidArgument(f"{g.kind.value} is not allowed inside a decomposition term")
        branches = nxt
    out = np.zeros_like(rho)
    for op, bits in branches:
        parity = sum(bits[i] for i in term.sign_bits) % 2
        out = out + (-1) ** parity * op
    return out


def apply_qpd(rho: np.ndarray, qpd: QPD) -> np.ndarray:
    return sum((t.coefficient * apply_term(rho, t) for t in qpd.terms), np.zeros_like(rho))


def validate_qpd(qpd: QPD, target: Optional[GateKind] = None, angle: Optional[float] = None) -> QPDValidation:
    """
    Compare Σ a_i F_i(P) with U P U† for every two-qubit Pauli P. `target` defaults to
    the QPD's own target; None means the identity channel.
    """
    kind = qpd.target if target is None else target
    theta = qpd.angle if angle is None else angle
    u = np.eye(4, dtype=complex) if kind is None else gate_matrix(kind, theta)

    details: Dict[str, float] = {}
    worst = 0.0
    for a, b in itertools.product("IXYZ", repeat=2):
        pauli = np.kron(PAULI_MATRICES[a], PAULI_MATRICES[b])
        deviation = float(np.max(np.abs(apply_qpd(pauli, qpd) - u @ pauli @ u.conj().T)))
        details[a + b] = deviation
        worst = max(worst, deviation)

    passed = worst <= QPD_CONFIG["tolerance"]
    name = kind.value if kind is not None else "identity"
    if passed:
        logger.debug(f"[knit] {qpd.name} reproduces {name}, κ={qpd.kappa:.6g}")
    else:
        logger.warning(f"[knit] ⚠️ {qpd.name} deviates from {name} by {worst:.3g}")
    return QPDValidation(passed, worst, qpd.kappa, details)
