"""
Dense statevector simulator with exact measurement branching.

Qubit 0 is the most significant bit of a basis label. A MEASURE_Z splits the
running state into both outcome branches (each with its probability and classical
register), RESET likewise, and classically conditioned gates act per branch.
Nothing is sampled here; see `qknit.tools.knitting.sample_expectation` for that.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from qknit.tools.circuit_ir import Circuit, Gate, GateKind, gate_matrix
from qknit.tools.errors import InvalidArgument, TooWide

logger = logging.getLogger(__name__)

SIM_CONFIG = {
    "max_qubits": 20,
    # branches below this probability are dropped
    "min_branch_probability": 1e-16,
}

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

InitialState = Union[None, str, Sequence[complex], np.ndarray]


@dataclass
class Branch:
    probability: float
    state: np.ndarray  # normalized, shape (2,) * n
    clbits: Tuple[int, ...]

    @property
    def amplitudes(self) -> np.ndarray:
        return self.state.reshape(-1)


def _check_width(n: int) -> None:
    if n > SIM_CONFIG["max_qubits"]:
        raise TooWide(f"{n} qubits exceed the simulator limit of {SIM_CONFIG['max_qubits']}")


def initial_state(num_qubits: int, initial: InitialState = None) -> np.ndarray:
    _check_width(num_qubits)
    dim = 2**num_qubits
    if initial is None:
        vec = np.zeros(dim, dtype=complex)
        vec[0] = 1.0
    elif isinstance(initial, str):
        if len(initial) != num_qubits or set(initial) - {"0", "1"}:
            raise InvalidArgument(f"basis label '{initial}' does not fit {num_qubits} qubits")
        vec = np.zeros(dim, dtype=complex)
        vec[int(initial, 2)] = 1.0
    else:
        vec = np.asarray(initial, dtype=complex).reshape(-1)
        if vec.shape[0] != dim:
            raise InvalidArgument(f"expected {dim} amplitudes, got {vec.shape[0]}")
        norm = np.linalg.norm(vec)
        if norm == 0:
            raise InvalidArgument("initial state has zero norm")
        vec = vec / norm
    return vec.reshape((2,) * num_qubits)


def apply_matrix(state: np.ndarray, matrix: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    k = len(qubits)
    tensor = matrix.reshape((2,) * (2 * k))
    moved = np.tensordot(tensor, state, axes=(list(range(k, 2 * k)), list(qubits)))
    return np.moveaxis(moved, list(range(k)), list(qubits))


def _project(state: np.ndarray, qubit: int, outcome: int) -> Tuple[float, np.ndarray]:
    projected = state.copy()
    index = [slice(None)] * state.ndim
    index[qubit] = 1 - outcome
    projected[tuple(index)] = 0
    prob = float(np.vdot(projected, projected).real)
    if prob > 0:
        projected /= np.sqrt(prob)
    return prob, projected


def _step(branch: Branch, g: Gate) -> List[Branch]:
    if g.condition is not None:
        bit, value = g.condition
        if branch.clbits[bit] != value:
            return [branch]
    if g.kind.is_unitary:
        branch.state = apply_matrix(branch.state, gate_matrix(g.kind, g.angle), g.qubits)
        return [branch]

    q = g.qubits[0]
    out = []
    for outcome in (0, 1):
        prob, projected = _project(branch.state, q, outcome)
        total = branch.probability * prob
        if total <= SIM_CONFIG["min_branch_probability"]:
            continue
        clbits = branch.clbits
        if g.kind is GateKind.MEASURE_Z:
            clbits = clbits[: g.clbit] + (outcome,) + clbits[g.clbit + 1:]
        elif outcome == 1:
            projected = apply_matrix(projected, PAULI_MATRICES["X"], (q,))
        out.append(Branch(total, projected, clbits))
    return out


def simulate_statevector(circuit: Circuit, initial: InitialState = None) -> List[Branch]:
    """All measurement branches with their probabilities; they sum to 1."""
    _check_width(circuit.num_qubits)
    branches = [Branch(1.0, initial_state(circuit.num_qubits, initial), (0,) * circuit.num_clbits)]
    for g in circuit.gates:
        nxt: List[Branch] = []
        for b in branches:
            nxt.extend(_step(b, g))
        branches = nxt
    logger.debug(f"[simulate] {circuit.num_qubits} qubits, {len(circuit.gates)} gates, {len(branches)} branches")
    return branches


def final_state(circuit: Circuit, initial: InitialState = None) -> np.ndarray:
    """Amplitudes of a measurement-free circuit."""
    branches = simulate_statevector(circuit, initial)
    if len(branches) != 1:
        raise InvalidArgument("circuit has measurement branches; use simulate_statevector")
    return branches[0].amplitudes


def pauli_expectation(state: np.ndarray, observable: str) -> float:
    if len(observable) != state.ndim:
        raise InvalidArgument(f"observable '{observable}' has length {len(observable)}, state has {state.ndim} qubits")
    applied = state
    for q, letter in enumerate(observable.upper()):
        if letter not in PAULI_MATRICES:
            raise InvalidArgument(f"unknown Pauli letter '{letter}'")
        if letter != "I":
            applied = apply_matrix(applied, PAULI_MATRICES[letter], (q,))
    return float(np.vdot(state, applied).real)


def expectation(
    circuit: Circuit,
    observable: str,
    initial: InitialState = None,
    sign_bits: Iterable[int] = (),
) -> float:
    """
    Exact <O> averaged over measurement branches. Each bit in `sign_bits` multiplies a
    branch's value by (-1)^bit, which is how sign-weighted measurements enter a QPD term.
    """
    signs = tuple(sign_bits)
    total = 0.0
    for b in simulate_statevector(circuit, initial):
        parity = sum(b.clbits[i] for i in signs) % 2
        total += (-1) ** parity * b.probability * pauli_expectation(b.state, observable)
    return total


def reduced_density_matrix(state: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    """Partial trace over every qubit not in `keep` (kept in the given order)."""
    n = state.ndim
    traced = [q for q in range(n) if q not in keep]
    psi = np.transpose(state, list(keep) + traced).reshape(2 ** len(keep), -1)
    return psi @ psi.conj().T


def state_fidelity(rho: np.ndarray, target: np.ndarray) -> float:
    """<t| rho |t> for a pure target vector."""
    t = np.asarray(target, dtype=complex).reshape(-1)
    t = t / np.linalg.norm(t)
    return float(np.vdot(t, rho @ t).real)
