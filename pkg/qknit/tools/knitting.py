"""
Subcircuit generation and recombination for individual cuts.

Gate cuts are replaced by the terms of the gate's QPD. A wire cut inserts the move
circuit in front of the later gate, sending the qubit's state to a fresh ancilla that
carries the qubit from then on, and cuts the move's CNOT. Every combination of terms
becomes one ensemble entry with weight Π a_i; `knit_expectation` sums the weighted
entry values and reproduces the uncut expectation exactly.
"""

import itertools
import json
import logging
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from qknit.tools.circuit_ir import Circuit, Gate, GateKind, gate
from qknit.tools.cutting_graph import CuttingGraph, EdgeKind
from qknit.tools.errors import GroupedCutUnsupported, InconsistentModel, InvalidArgument, UnpricedCut
from qknit.tools.partition_model import PartitionSolution
from qknit.tools.qpd import QPD, qpd_cnot, qpd_for_gate
from qknit.tools.simulator import expectation

logger = logging.getLogger(__name__)

ENSEMBLE_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class CutSite:
    """One cut QPD placed on global qubits (a = side 0, b = side 1)."""

    edge: int
    qpd: QPD
    qubits: Tuple[int, int]
    clbit_base: int


@dataclass(frozen=True)
class EnsembleEntry:
    weight: float
    subcircuits: Tuple[Circuit, ...]
    joint: Circuit
    sign_bits: Tuple[int, ...]
    linked: bool
    terms: Tuple[int, ...]
    sign_owners: Tuple[int, ...] = ()  # partition that measures each sign bit


@dataclass
class SubcircuitEnsemble:
    entries: List[EnsembleEntry]
    num_qubits: int
    owners: Tuple[int, ...]  # partition of every global qubit
    carriers: Tuple[int, ...]  # global qubit holding each original qubit at the end
    qubit_maps: Tuple[Tuple[int, ...], ...]  # global qubits of each partition, local order
    sites: Tuple[CutSite, ...] = ()

    @property
    def normalization(self) -> float:
        return sum(abs(e.weight) for e in self.entries)

    @property
    def widths(self) -> Tuple[int, ...]:
        return tuple(len(m) for m in self.qubit_maps)

    @property
    def num_partitions(self) -> int:
        return len(self.qubit_maps)


def _owner_of_qubit(graph: CuttingGraph, solution: PartitionSolution, q: int) -> int:
    for v in graph.vertices:
        if v.qubit == q:
            return solution.assignment[v.id]
    for p, members in enumerate(solution.partitions):
        if q in members:
            return p
    return 0


def _place(local: Gate, qubit: int, clbit_base: int) -> Gate:
    """A QPD fragment gate moved onto a global qubit and the site's classical bits."""
    clbit = local.clbit + clbit_base if local.clbit is not None else None
    cond = (local.condition[0] + clbit_base, local.condition[1]) if local.condition is not None else None
    return Gate(local.kind, (qubit,), local.angle, clbit, cond)


def generate_subcircuits(
    circuit: Circuit,
    graph: CuttingGraph,
    solution: PartitionSolution,
    cc: bool = True,
    coefficients: Optional[Mapping[int, Sequence[float]]] = None,
) -> SubcircuitEnsemble:
    """
    Ensemble of per-partition subcircuits for `solution`. `coefficients` optionally
    overrides the QPD weights per cut edge id (as read back from a solution file).
    """
    if solution.grouped:
        raise GroupedCutUnsupported(
            f"cuts {list(solution.grouped)} are grouped; only individual cuts can be simulated"
        )
    labels = solution.assignment
    vertices = graph.vertices
    edges = graph.edges
    cut_set = set(solution.cuts)
    coefficients = dict(coefficients or {})

    gate_cut_at: Dict[int, int] = {}
    wire_cuts_before: Dict[int, List[Tuple[int, int]]] = {}
    for eid in solution.cuts:
        e = edges[eid]
        head = vertices[e.head]
        if e.kind is EdgeKind.GATE:
            gate_cut_at[head.gate_index] = eid
        else:
            wire_cuts_before.setdefault(head.gate_index, []).append((head.qubit, eid))

    n = circuit.num_qubits
    owners: List[int] = [_owner_of_qubit(graph, solution, q) for q in range(n)]
    carrier = list(range(n))
    num_clbits = circuit.num_clbits
    # slots: fixed gates or indexes into `sites`
    slots: List[object] = []
    sites: List[CutSite] = []

    def add_site(eid: int, qpd: QPD, a: int, b: int) -> None:
        nonlocal num_clbits
        if eid in coefficients:
            qpd = qpd.with_coefficients(coefficients[eid])
        sites.append(CutSite(eid, qpd, (a, b), num_clbits))
        num_clbits += qpd.num_clbits
        slots.append(len(sites) - 1)

    for index, g in enumerate(circuit.gates):
        for q, eid in wire_cuts_before.get(index, []):
            src = carrier[q]
            anc = len(owners)
            owners.append(labels[edges[eid].head])
            add_site(eid, qpd_cnot(cc), src, anc)
            bit = num_clbits
            num_clbits += 1
            slots.append(gate("h", src))
            slots.append(gate("measure_z", src, clbit=bit))
            slots.append(gate("z", anc, condition=(bit, 1)))
            carrier[q] = anc
            logger.debug(f"[knit] wire cut e{eid}: q{q} moves to ancilla {anc} before gate {index}")

        placed = g.remap({q: carrier[q] for q in g.qubits})
        if index in gate_cut_at:
            eid = gate_cut_at[index]
            add_site(eid, qpd_for_gate(g, cc), placed.qubits[0], placed.qubits[1])
            continue
        if g.is_two_qubit and owners[placed.qubits[0]] != owners[placed.qubits[1]]:
            raise InconsistentModel(
                f"uncut gate {index} spans partitions {owners[placed.qubits[0]]} and {owners[placed.qubits[1]]}",
                stage="knit",
            )
        slots.append(placed)

    if cut_set - {s.edge for s in sites}:
        raise InconsistentModel(f"cuts {sorted(cut_set - {s.edge for s in sites})} were not placed", stage="knit")

    num_partitions = max(len(solution.partitions), max(owners) + 1)
    qubit_maps = tuple(tuple(q for q in range(len(owners)) if owners[q] == p) for p in range(num_partitions))
    total = len(owners)

    entries: List[EnsembleEntry] = []
    for choice in itertools.product(*(range(len(s.qpd.terms)) for s in sites)):
        ops: List[Gate] = []
        signs: List[int] = []
        weight = 1.0
        for slot in slots:
            if isinstance(slot, Gate):
                ops.append(slot)
                continue
            site = sites[slot]
            term = site.qpd.terms[choice[slot]]
            weight *= term.coefficient
            for side, local in term.ops:
                ops.append(_place(local, site.qubits[side], site.clbit_base))
            signs.extend(site.clbit_base + b for b in term.sign_bits)
        entries.append(_build_entry(weight, ops, tuple(signs), choice, owners, qubit_maps, total, num_clbits))

    ensemble = SubcircuitEnsemble(
        entries=entries,
        num_qubits=n,
        owners=tuple(owners),
        carriers=tuple(carrier),
        qubit_maps=qubit_maps,
        sites=tuple(sites),
    )
    logger.info(
        f"[knit] {len(sites)} cut(s) → {len(entries)} entries, widths {list(ensemble.widths)}, "
        f"Σ|w|={ensemble.normalization:.6g}"
    )
    return ensemble


def _build_entry(
    weight: float,
    ops: List[Gate],
    sign_bits: Tuple[int, ...],
    terms: Tuple[int, ...],
    owners: Sequence[int],
    qubit_maps: Sequence[Sequence[int]],
    total: int,
    num_clbits: int,
) -> EnsembleEntry:
    written: Dict[int, int] = {}
    linked = False
    for g in ops:
        owner = owners[g.qubits[0]]
        if g.kind is GateKind.MEASURE_Z:
            written[g.clbit] = owner
        if g.condition is not None and written.get(g.condition[0], owner) != owner:
            linked = True

    subcircuits = []
    for members in qubit_maps:
        local = {q: i for i, q in enumerate(members)}
        gates = [g.remap(local) for g in ops if g.qubits[0] in local]
        subcircuits.append(Circuit(max(1, len(members)), gates, num_clbits))
    joint = Circuit(total, ops, num_clbits)
    sign_owners = tuple(written[b] for b in sign_bits)
    return EnsembleEntry(weight, tuple(subcircuits), joint, sign_bits, linked, terms, sign_owners)


def _global_observable(ensemble: SubcircuitEnsemble, observable: str) -> List[str]:
    if len(observable) != ensemble.num_qubits:
        raise InvalidArgument(
            f"observable '{observable}' has length {len(observable)}, circuit has {ensemble.num_qubits} qubits"
        )
    letters = ["I"] * len(ensemble.owners)
    for q, letter in enumerate(observable.upper()):
        letters[ensemble.carriers[q]] = letter
    return letters


def entry_value(ensemble: SubcircuitEnsemble, entry: EnsembleEntry, letters: Sequence[str]) -> float:
    """Signed expectation of one entry (without its weight)."""
    if entry.linked:
        return expectation(entry.joint, "".join(letters), sign_bits=entry.sign_bits)
    value = 1.0
    for p, members in enumerate(ensemble.qubit_maps):
        local_obs = "".join(letters[q] for q in members) or "I"
        local_signs = [b for b, owner in zip(entry.sign_bits, entry.sign_owners) if owner == p]
        value *= expectation(entry.subcircuits[p], local_obs, sign_bits=local_signs)
        if value == 0.0:
            break
    return value


def knit_expectation(ensemble: SubcircuitEnsemble, observable: str) -> float:
    """Σ_entries weight × entry value; equals the uncut expectation."""
    letters = _global_observable(ensemble, observable)
    total = 0.0
    for entry in ensemble.entries:
        if entry.weight == 0.0:
            continue
        total += entry.weight * entry_value(ensemble, entry, letters)
    logger.debug(f"[knit] <{observable}> = {total:.12g} over {len(ensemble.entries)} entries")
    return total


def sample_expectation(ensemble: SubcircuitEnsemble, observable: str, shots: int, seed: int = 0) -> float:
    """
    Monte-Carlo estimate: draw entries with probability |w|/Σ|w|, draw a ±1 outcome
    from the entry's exact value, rescale by Σ|w| and the weight's sign.
    """
    if shots < 1:
        raise InvalidArgument(f"shots must be positive, got {shots}")
    letters = _global_observable(ensemble, observable)
    norm = ensemble.normalization
    weights = np.array([abs(e.weight) for e in ensemble.entries])
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(ensemble.entries), size=shots, p=weights / norm)

    values: Dict[int, float] = {}
    total = 0.0
    for i in picks:
        entry = ensemble.entries[i]
        if i not in values:
            values[i] = entry_value(ensemble, entry, letters)
        outcome = 1.0 if rng.random() < (1.0 + values[i]) / 2.0 else -1.0
        total += np.sign(entry.weight) * outcome
    return norm * total / shots


def ensemble_to_dict(ensemble: SubcircuitEnsemble) -> Dict[str, object]:
    return {
        "schema_version": ENSEMBLE_SCHEMA_VERSION,
        "normalization": ensemble.normalization,
        "widths": list(ensemble.widths),
        "qubit_maps": [list(m) for m in ensemble.qubit_maps],
        "cuts": [
            {"edge": s.edge, "qpd": s.qpd.name, "qubits": list(s.qubits), "coefficients": s.qpd.coefficients}
            for s in ensemble.sites
        ],
        "entries": [
            {
                "weight": e.weight,
                "terms": list(e.terms),
                "sign_bits": list(e.sign_bits),
                "linked": e.linked,
                "subcircuits": [c.to_dict() for c in e.subcircuits],
            }
            for e in ensemble.entries
        ],
    }


def ensemble_to_json(ensemble: SubcircuitEnsemble) -> str:
    return json.dumps(ensemble_to_dict(ensemble), sort_keys=True, indent=2)


def cut_coefficients(
    circuit: Circuit, graph: CuttingGraph, solution: PartitionSolution, cc: bool = True
) -> Dict[int, List[float]]:
    """QPD weights of every individual cut, keyed by edge id; wire cuts use the move CNOT's QPD."""
    out: Dict[int, List[float]] = {}
    for eid in solution.cuts:
        if eid in solution.grouped:
            continue
        e = graph.edges[eid]
        if e.kind is EdgeKind.WIRE:
            out[eid] = qpd_cnot(cc).coefficients
            continue
        g = circuit.gates[graph.vertices[e.head].gate_index]
        try:
            out[eid] = qpd_for_gate(g, cc).coefficients
        except UnpricedCut:
            # priced but not simulable (swap)
            continue
    return out
