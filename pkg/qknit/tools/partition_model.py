"""
Partitioning model over a cutting graph.

Variables: o_v_p (vertex v sits in partition p), c_e (edge e is cut), b_e (cut e is
part of the simultaneous group), integer Q_p (qubits used by partition p) and the
fixed-point cost. `encode` builds the constraint system, `emit_smtlib2` prints it for
an external solver, `decode` turns a solver model back into a PartitionSolution after
recomputing every derived quantity from the raw o/c/b values.

The pure helpers (`qubit_counts`, `cost_fp`, `build_solution`) are shared with the
exact search in `qknit.tools.solvers.exact`, so both backends use identical arithmetic.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

import networkx as nx
from pydantic import BaseModel, ConfigDict, ValidationError

from qknit.tools import formula as F
from qknit.tools.cost_model import (
    ALL_FAMILIES,
    DEFAULT_GAMMA,
    Budget,
    CutFamily,
    CutKind,
    GammaTable,
    budget_to_fixed_point,
    cut_kind_for_gate,
    group_cost,
    solution_overhead,
    to_fixed_point,
    wire_cut,
)
from qknit.tools.cutting_graph import CutEdge, CuttingGraph, EdgeKind, partition_components
from qknit.tools.errors import (
    InconsistentModel,
    InfeasibleTrivially,
    InvalidProblem,
    SchemaError,
    UnpricedCut,
)

logger = logging.getLogger(__name__)

SOLUTION_SCHEMA_VERSION = 1


class Objective(Enum):
    MIN_SAMPLES = "samples"
    MIN_MAX_QUBITS = "qubits"


@dataclass(frozen=True)
class PartitionProblem:
    graph: CuttingGraph
    num_partitions: int
    max_qubits: int
    budget: Optional[Budget] = None
    allowed_cut_kinds: FrozenSet[CutFamily] = ALL_FAMILIES
    cc_available: bool = True
    ancilla_available: bool = True
    objective: Objective = Objective.MIN_SAMPLES
    max_cuts: Optional[int] = None
    max_samples: Optional[float] = None
    # informational; callers fold it into max_qubits
    ancilla_fraction: float = 0.0
    pins: Mapping[int, int] = field(default_factory=dict, hash=False)
    gamma: GammaTable = DEFAULT_GAMMA

    @property
    def grouping_allowed(self) -> bool:
        return self.cc_available and self.ancilla_available

    @property
    def wire_only(self) -> bool:
        return self.allowed_cut_kinds == frozenset({CutFamily.WIRE})

    @property
    def forbid_empty(self) -> bool:
        return self.objective is Objective.MIN_SAMPLES

    def cut_kind(self, edge: CutEdge) -> Optional[CutKind]:
        """Cut kind of `edge`, or None when the edge may not be cut."""
        if edge.kind is EdgeKind.WIRE:
            kind = wire_cut(self.cc_available, self.ancilla_available)
        else:
            try:
                kind = cut_kind_for_gate(edge.gate_kind, edge.angle, self.cc_available, self.ancilla_available)
            except UnpricedCut:
                logger.warning(f"[encode] {edge.name} ({edge.gate_kind.value}) has no known decomposition, kept uncut")
                return None
        if kind.family not in self.allowed_cut_kinds:
            return None
        return kind

    def edge_weights(self) -> Dict[int, Optional[int]]:
        """Fixed-point gamma^2 per edge id; None for edges that may not be cut."""
        weights: Dict[int, Optional[int]] = {}
        for edge in self.graph.edges:
            kind = self.cut_kind(edge)
            weights[edge.id] = None if kind is None else to_fixed_point(self.gamma.gamma_sq(kind))
        return weights

    def groupable_edges(self) -> List[int]:
        if not self.grouping_allowed:
            return []
        out = []
        for edge in self.graph.edges:
            kind = self.cut_kind(edge)
            if kind is not None and kind.group_eligible:
                out.append(edge.id)
        return out

    @property
    def budget_fp(self) -> Optional[int]:
        """Largest admissible fixed-point cost, or None when unconstrained."""
        limits = []
        if self.budget is not None:
            limits.append(self.budget.max_overhead_fp)
        if self.max_samples is not None:
            limits.append(budget_to_fixed_point(self.max_samples))
        return min(limits) if limits else None

    def validate(self) -> None:
        num_vertices = len(self.graph.vertices)
        if self.num_partitions < 2:
            raise InvalidProblem(f"need at least 2 partitions, got {self.num_partitions}")
        if self.num_partitions > num_vertices:
            raise InvalidProblem(
                f"{self.num_partitions} partitions exceed the {num_vertices} vertices of the cutting graph"
            )
        if self.max_qubits < 1:
            raise InvalidProblem(f"max qubits per partition must be >= 1, got {self.max_qubits}")
        if self.max_cuts is not None and self.max_cuts < 0:
            raise InvalidProblem(f"max_cuts must be >= 0, got {self.max_cuts}")
        for v, p in self.pins.items():
            if not 0 <= v < num_vertices or not 0 <= p < self.num_partitions:
                raise InvalidProblem(f"pin v{v} -> p{p} out of range")

    def check_trivial_feasibility(self) -> None:
        """Cheap necessary conditions; raises InfeasibleTrivially."""
        if len(self.graph.first_vertices) > self.num_partitions * self.max_qubits:
            raise InfeasibleTrivially(
                f"{len(self.graph.first_vertices)} qubits cannot fit into "
                f"{self.num_partitions} x {self.max_qubits} qubits"
            )
        weights = self.edge_weights()
        uncuttable = [e for e in self.graph.edges if weights[e.id] is None or self.max_cuts == 0]
        if self.max_qubits < 2 and any(e.kind is EdgeKind.GATE for e in uncuttable):
            raise InfeasibleTrivially(f"an uncuttable two-qubit gate needs 2 qubits, cap is {self.max_qubits}")
        glued = nx.Graph()
        glued.add_nodes_from(v.id for v in self.graph.vertices)
        glued.add_edges_from(e.endpoints for e in uncuttable)
        components = list(nx.connected_components(glued))
        if self.forbid_empty and len(components) < self.num_partitions:
            raise InfeasibleTrivially(
                f"only {len(components)} separable blocks for {self.num_partitions} nonempty partitions"
            )
        for comp in components:
            labels = {self.pins[v] for v in comp if v in self.pins}
            if len(labels) > 1:
                raise InfeasibleTrivially(f"pins put one uncuttable block into partitions {sorted(labels)}")


# ---------------------------------------------------------------------------
# Shared arithmetic
# ---------------------------------------------------------------------------


def cut_edges_from_labels(graph: CuttingGraph, labels: Sequence[int]) -> List[int]:
    return [e.id for e in graph.edges if labels[e.tail] != labels[e.head]]


def qubit_counts(
    graph: CuttingGraph,
    labels: Sequence[int],
    cuts: Iterable[int],
    grouped: Iterable[int],
    num_partitions: int,
) -> List[int]:
    """
    Q_p = first vertices in p + wire cuts whose head is in p + one per grouped cut
    and touched partition.
    """
    counts = [0] * num_partitions
    for v in graph.first_vertices:
        counts[labels[v]] += 1
    cut_set = set(cuts)
    edges = graph.edges
    for e in graph.wire_edges:
        if e.id in cut_set:
            counts[labels[e.head]] += 1
    for eid in grouped:
        e = edges[eid]
        for p in {labels[e.tail], labels[e.head]}:
            counts[p] += 1
    return counts


def cost_fp(weights: Mapping[int, Optional[int]], cuts: Iterable[int], grouped: Iterable[int]) -> int:
    grouped_set = set(grouped)
    total = 0
    for eid in cuts:
        if eid in grouped_set:
            continue
        w = weights[eid]
        if w is None:
            raise InconsistentModel(f"e{eid} is cut but may not be")
        total += w
    return total + to_fixed_point(group_cost(len(grouped_set)))


def exact_overhead(problem: PartitionProblem, cuts: Iterable[int], grouped: Iterable[int]) -> float:
    grouped_set = set(grouped)
    edges = problem.graph.edges
    items = []
    for eid in cuts:
        kind = problem.cut_kind(edges[eid])
        if kind is None:
            raise UnpricedCut(f"e{eid} is cut but may not be")
        items.append((kind, eid in grouped_set))
    return solution_overhead(items, problem.gamma)


# ---------------------------------------------------------------------------
# Solutions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PartitionSolution:
    assignment: Tuple[int, ...]
    cuts: Tuple[int, ...]
    grouped: Tuple[int, ...]
    qubit_counts: Tuple[int, ...]
    overhead: float
    overhead_fp: int
    objective_value: int
    partitions: Tuple[Tuple[int, ...], ...]
    optimal: bool = True
    backend: str = ""
    solve_time: float = 0.0
    iterations: int = 0

    @property
    def max_qubits(self) -> int:
        return max(self.qubit_counts) if self.qubit_counts else 0

    @property
    def num_cuts(self) -> int:
        return len(self.cuts)

    def with_stats(self, **changes: Any) -> "PartitionSolution":
        data = {f: getattr(self, f) for f in self.__dataclass_fields__}
        data.update(changes)
        return PartitionSolution(**data)


def place_qubits(
    graph: CuttingGraph, labels: Sequence[int], counts: Sequence[int], max_qubits: int
) -> Tuple[Tuple[int, ...], ...]:
    """Original qubits held by each partition; idle qubits go where spare capacity is largest."""
    members: List[Set[int]] = [set() for _ in counts]
    for v in graph.vertices:
        members[labels[v.id]].add(v.qubit)
    spare = [max_qubits - c for c in counts]
    active = {v.qubit for v in graph.vertices}
    for q in range(graph.num_qubits):
        if q in active:
            continue
        p = max(range(len(spare)), key=lambda i: (spare[i], -i))
        members[p].add(q)
        spare[p] -= 1
    return tuple(tuple(sorted(m)) for m in members)


def build_solution(
    problem: PartitionProblem,
    labels: Sequence[int],
    grouped: Iterable[int] = (),
    **stats: Any,
) -> PartitionSolution:
    """Derive cuts, Q_p and cost from a labeling and a group choice."""
    graph = problem.graph
    labels = tuple(int(x) for x in labels)
    cuts = tuple(cut_edges_from_labels(graph, labels))
    grouped = tuple(sorted(grouped))
    counts = tuple(qubit_counts(graph, labels, cuts, grouped, problem.num_partitions))
    fp = cost_fp(problem.edge_weights(), cuts, grouped)
    objective_value = fp if problem.objective is Objective.MIN_SAMPLES else max(counts)
    return PartitionSolution(
        assignment=labels,
        cuts=cuts,
        grouped=grouped,
        qubit_counts=counts,
        overhead=exact_overhead(problem, cuts, grouped),
        overhead_fp=fp,
        objective_value=objective_value,
        partitions=place_qubits(graph, labels, counts, problem.max_qubits),
        **stats,
    )


# ---------------------------------------------------------------------------
# Encoding
# ---------------------------------------------------------------------------


def o_name(v: int, p: int) -> str:
    return f"o_{v}_{p}"


def c_name(e: int) -> str:
    return f"c_{e}"


def b_name(e: int) -> str:
    return f"b_{e}"


def q_name(p: int) -> str:
    return f"Q_{p}"


COST = "cost"
QMAX = "qmax"
GROUP_SIZE = "kb"
GROUP_COST = "gcost"


@dataclass(frozen=True)
class ConstraintSystem:
    problem: PartitionProblem
    declarations: Tuple[Tuple[str, F.Sort], ...]
    assertions: Tuple[F.Formula, ...]
    objective_symbol: str
    weights: Mapping[int, Optional[int]] = field(hash=False)

    @property
    def symbols(self) -> List[str]:
        return [name for name, _ in self.declarations]

    def bound(self, upper_exclusive: int) -> F.Formula:
        """`objective < upper_exclusive`, the assertion tightened by the minimize loop."""
        return F.lt(F.Sym(self.objective_symbol, F.Sort.INT), F.Const(upper_exclusive))


def encode(problem: PartitionProblem) -> ConstraintSystem:
    problem.validate()
    problem.check_trivial_feasibility()
    graph = problem.graph
    P = range(problem.num_partitions)
    weights = problem.edge_weights()
    groupable = set(problem.groupable_edges())

    decls: List[Tuple[str, F.Sort]] = []
    asserts: List[F.Formula] = []

    def o(v: int, p: int) -> F.Formula:
        return F.Sym(o_name(v, p))

    for v in graph.vertices:
        for p in P:
            decls.append((o_name(v.id, p), F.Sort.BOOL))
    for e in graph.edges:
        decls.append((c_name(e.id), F.Sort.BOOL))
    for e in graph.edges:
        decls.append((b_name(e.id), F.Sort.BOOL))
    for p in P:
        decls.append((q_name(p), F.Sort.INT))
    decls += [(GROUP_SIZE, F.Sort.INT), (GROUP_COST, F.Sort.INT), (COST, F.Sort.INT)]
    if problem.objective is Objective.MIN_MAX_QUBITS:
        decls.append((QMAX, F.Sort.INT))

    # exactly one partition per vertex
    for v in graph.vertices:
        asserts.append(F.or_(*(o(v.id, p) for p in P)))
        for p in P:
            for p2 in P:
                if p < p2:
                    asserts.append(F.implies(o(v.id, p), F.not_(o(v.id, p2))))

    # c_e <-> endpoints disagree somewhere; b_e -> c_e
    for e in graph.edges:
        c, b = F.Sym(c_name(e.id)), F.Sym(b_name(e.id))
        asserts.append(F.eq(c, F.or_(*(F.distinct(o(e.tail, p), o(e.head, p)) for p in P))))
        asserts.append(F.implies(b, c))
        if weights[e.id] is None:
            asserts.append(F.not_(c))
        if e.id not in groupable:
            asserts.append(F.not_(b))

    # Q_p
    for p in P:
        terms = [F.ite(o(v, p), F.ONE, F.ZERO) for v in sorted(graph.first_vertices)]
        terms += [F.ite(F.and_(F.Sym(c_name(e.id)), o(e.head, p)), F.ONE, F.ZERO) for e in graph.wire_edges]
        terms += [
            F.ite(F.and_(F.Sym(b_name(e.id)), F.or_(o(e.head, p), o(e.tail, p))), F.ONE, F.ZERO)
            for e in graph.edges
            if e.id in groupable
        ]
        qp = F.Sym(q_name(p), F.Sort.INT)
        asserts.append(F.eq(qp, F.add(*terms)))
        asserts.append(F.le(qp, F.Const(problem.max_qubits)))
        if problem.objective is Objective.MIN_MAX_QUBITS:
            asserts.append(F.ge(F.Sym(QMAX, F.Sort.INT), qp))

    # log-domain cost: individual cuts plus the group term indexed by its size
    kb, gcost, cost = (F.Sym(n, F.Sort.INT) for n in (GROUP_SIZE, GROUP_COST, COST))
    asserts.append(F.eq(kb, F.count(*(F.Sym(b_name(e)) for e in sorted(groupable)))))
    for k in range(len(groupable) + 1):
        asserts.append(F.implies(F.eq(kb, F.Const(k)), F.eq(gcost, F.Const(to_fixed_point(group_cost(k))))))
    individual = [
        F.ite(F.and_(F.Sym(c_name(e.id)), F.not_(F.Sym(b_name(e.id)))), F.Const(weights[e.id]), F.ZERO)
        for e in graph.edges
        if weights[e.id] is not None
    ]
    asserts.append(F.eq(cost, F.add(*individual, gcost)))
    if problem.budget_fp is not None:
        asserts.append(F.le(cost, F.Const(problem.budget_fp)))
    if problem.max_cuts is not None:
        asserts.append(F.le(F.count(*(F.Sym(c_name(e.id)) for e in graph.edges)), F.Const(problem.max_cuts)))

    if problem.pins:
        for v, p in sorted(problem.pins.items()):
            asserts.append(o(v, p))
    elif graph.vertices:
        # relabeling symmetry: vertex 0 opens partition 0, partitions fill in order
        asserts.append(o(0, 0))
        for p in P:
            if p + 1 < problem.num_partitions:
                used_next = F.or_(*(o(v.id, p + 1) for v in graph.vertices))
                used = F.or_(*(o(v.id, p) for v in graph.vertices))
                asserts.append(F.implies(used_next, used))

    if problem.forbid_empty:
        for p in P:
            asserts.append(F.or_(*(o(v.id, p) for v in graph.vertices)))

    objective_symbol = COST if problem.objective is Objective.MIN_SAMPLES else QMAX
    system = ConstraintSystem(problem, tuple(decls), tuple(asserts), objective_symbol, weights)
    logger.info(
        f"[encode] {len(decls)} symbols, {len(asserts)} assertions, |P|={problem.num_partitions} "
        f"Q_max={problem.max_qubits} objective={problem.objective.value}"
    )
    return system


def emit_smtlib2(
    system: ConstraintSystem,
    bound: Optional[int] = None,
    commands: bool = True,
) -> str:
    """
    SMT-LIB2 text of the system. `bound` adds `objective < bound`; with `commands`
    the text ends in check-sat and a get-value over every declared symbol.
    """
    lines = [
        "; qknit partition model",
        "(set-option :produce-models true)",
        "(set-logic QF_LIA)",
    ]
    lines += [F.declaration(name, sort) for name, sort in system.declarations]
    lines += [f"(assert {a.to_smt()})" for a in system.assertions]
    if bound is not None:
        lines.append(f"(assert {system.bound(bound).to_smt()})")
    if commands:
        lines.append("(check-sat)")
        lines.append(f"(get-value ({' '.join(system.symbols)}))")
    return "\n".join(lines) + "\n"


def decode(system: ConstraintSystem, model: Mapping[str, Any], **stats: Any) -> PartitionSolution:
    problem = system.problem
    graph = problem.graph
    missing = [name for name in system.symbols if name not in model]
    if missing:
        raise InconsistentModel(f"model leaves {len(missing)} symbols unassigned, e.g. {missing[:3]}")

    labels = []
    for v in graph.vertices:
        chosen = [p for p in range(problem.num_partitions) if model[o_name(v.id, p)]]
        if len(chosen) != 1:
            raise InconsistentModel(f"v{v.id} assigned to partitions {chosen}")
        labels.append(chosen[0])

    grouped = [e.id for e in graph.edges if model[b_name(e.id)]]
    solution = build_solution(problem, labels, grouped, **stats)

    solver_cuts = tuple(e.id for e in graph.edges if model[c_name(e.id)])
    if solver_cuts != solution.cuts:
        raise InconsistentModel(f"solver cut set {solver_cuts} != recomputed {solution.cuts}")
    solver_q = tuple(int(model[q_name(p)]) for p in range(problem.num_partitions))
    if solver_q != solution.qubit_counts:
        raise InconsistentModel(f"solver Q {solver_q} != recomputed {solution.qubit_counts}")
    if int(model[COST]) != solution.overhead_fp:
        raise InconsistentModel(f"solver cost {model[COST]} != recomputed {solution.overhead_fp}")
    for a in system.assertions:
        if not F.check(a, dict(model)):
            raise InconsistentModel(f"model violates {a.to_smt()[:120]}")
    logger.debug(f"[decode] cuts={list(solution.cuts)} grouped={list(solution.grouped)} Q={list(solution.qubit_counts)}")
    return solution


# ---------------------------------------------------------------------------
# Independent checker
# ---------------------------------------------------------------------------


def validate_solution(problem: PartitionProblem, solution: PartitionSolution) -> List[str]:
    """Itemized violations; empty means valid."""
    graph = problem.graph
    issues: List[str] = []
    labels = solution.assignment
    if len(labels) != len(graph.vertices) or any(not 0 <= p < problem.num_partitions for p in labels):
        return ["every vertex must be assigned exactly one partition"]

    cuts = set(cut_edges_from_labels(graph, labels))
    if cuts != set(solution.cuts):
        issues.append(f"cut set mismatch: derived {sorted(cuts)}, reported {sorted(solution.cuts)}")
    for eid in solution.grouped:
        if eid not in solution.cuts:
            issues.append(f"b implies c: e{eid} grouped but not cut")
    if solution.grouped and not problem.grouping_allowed:
        issues.append("grouped cuts need classical communication and ancilla qubits")

    weights = problem.edge_weights()
    for eid in sorted(set(solution.cuts)):
        edge = graph.edges[eid]
        if weights[eid] is None:
            issues.append(f"forbidden cut on {edge.name} ({edge.kind.value})")
        elif eid in solution.grouped and not problem.cut_kind(edge).group_eligible:
            issues.append(f"ineligible group member {edge.name}")
    if issues:
        return issues

    counts = qubit_counts(graph, labels, solution.cuts, solution.grouped, problem.num_partitions)
    if tuple(counts) != tuple(solution.qubit_counts):
        issues.append(f"qubit count mismatch: derived {counts}, reported {list(solution.qubit_counts)}")
    for p, q in enumerate(counts):
        if q > problem.max_qubits:
            issues.append(f"qubit cap exceeded: partition {p} uses {q} > {problem.max_qubits}")

    fp = cost_fp(weights, solution.cuts, solution.grouped)
    if fp != solution.overhead_fp:
        issues.append(f"fixed-point cost mismatch: derived {fp}, reported {solution.overhead_fp}")
    exact = exact_overhead(problem, solution.cuts, solution.grouped)
    if not math.isclose(exact, solution.overhead, rel_tol=1e-9):
        issues.append(f"overhead mismatch: derived {exact}, reported {solution.overhead}")
    if problem.budget_fp is not None and fp > problem.budget_fp:
        issues.append(f"over budget: cost 10^{fp / 1e6:.6f} exceeds the limit")
    if problem.max_cuts is not None and len(cuts) > problem.max_cuts:
        issues.append(f"too many cuts: {len(cuts)} > {problem.max_cuts}")

    for v, p in problem.pins.items():
        if labels[v] != p:
            issues.append(f"pin violated: v{v} must be in partition {p}")
    if problem.forbid_empty:
        used = set(labels)
        for p in range(problem.num_partitions):
            if p not in used:
                issues.append(f"partition {p} is empty")

    for component in partition_components(graph, solution.cuts):
        spread = {labels[v] for v in component}
        if len(spread) > 1:
            issues.append(f"component of v{component[0]} spans partitions {sorted(spread)}")
    return issues


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


class CutModel(BaseModel):
    model_config = ConfigDict(extra="ignore")

    edge: int
    kind: str
    grouped: bool = False
    gate: Optional[str] = None
    endpoints: Optional[List[int]] = None
    gamma_sq: Optional[float] = None
    coefficients: Optional[List[float]] = None


class SolutionModel(BaseModel):
    model_config = ConfigDict(extra="ignore")

    schema_version: int = SOLUTION_SCHEMA_VERSION
    partitions: List[List[int]]
    assignment: List[int]
    cuts: List[CutModel]
    overhead: float
    log10_overhead_fp: int
    Q: List[int]
    objective_value: Optional[int] = None
    optimal: bool = True
    backend: str = ""


def solution_to_dict(
    problem: PartitionProblem,
    solution: PartitionSolution,
    coefficients: Optional[Mapping[int, Sequence[float]]] = None,
) -> Dict[str, Any]:
    edges = problem.graph.edges
    grouped = set(solution.grouped)
    cuts = []
    for eid in solution.cuts:
        edge = edges[eid]
        kind = problem.cut_kind(edge)
        entry: Dict[str, Any] = {
            "edge": eid,
            "kind": edge.kind.value,
            "gate": edge.gate_kind.value,
            "endpoints": list(edge.endpoints),
            "grouped": eid in grouped,
            "gamma_sq": problem.gamma.gamma_sq(kind) if kind is not None else None,
        }
        if coefficients and eid in coefficients:
            entry["coefficients"] = [float(a) for a in coefficients[eid]]
        cuts.append(entry)
    return {
        "schema_version": SOLUTION_SCHEMA_VERSION,
        "partitions": [list(p) for p in solution.partitions],
        "assignment": list(solution.assignment),
        "cuts": cuts,
        "overhead": solution.overhead,
        "log10_overhead_fp": solution.overhead_fp,
        "Q": list(solution.qubit_counts),
        "objective_value": solution.objective_value,
        "optimal": solution.optimal,
        "backend": solution.backend,
    }


def solution_to_json(problem: PartitionProblem, solution: PartitionSolution, **kwargs: Any) -> str:
    return json.dumps(solution_to_dict(problem, solution, **kwargs), sort_keys=True, indent=2)


def solution_from_dict(
    problem: PartitionProblem, data: Mapping[str, Any]
) -> Tuple[PartitionSolution, Dict[int, List[float]]]:
    """Rebuild a solution (and any stored per-cut coefficients) from its JSON form."""
    try:
        model = SolutionModel.model_validate(data)
    except ValidationError as e:
        problems = [{"path": ".".join(str(x) for x in err["loc"]), "message": err["msg"]} for err in e.errors()]
        raise SchemaError(f"bad solution file: {problems[0]['path']}: {problems[0]['message']}", problems) from e
    if len(model.assignment) != len(problem.graph.vertices):
        raise SchemaError(
            f"solution assigns {len(model.assignment)} vertices, circuit has {len(problem.graph.vertices)}",
            [{"path": "assignment", "message": "length mismatch"}],
        )
    num_partitions = max(problem.num_partitions, len(model.Q))
    solution = PartitionSolution(
        assignment=tuple(model.assignment),
        cuts=tuple(c.edge for c in model.cuts),
        grouped=tuple(c.edge for c in model.cuts if c.grouped),
        qubit_counts=tuple(model.Q) + (0,) * (num_partitions - len(model.Q)),
        overhead=model.overhead,
        overhead_fp=model.log10_overhead_fp,
        objective_value=model.objective_value if model.objective_value is not None else model.log10_overhead_fp,
        partitions=tuple(tuple(p) for p in model.partitions),
        optimal=model.optimal,
        backend=model.backend,
    )
    coefficients = {c.edge: list(c.coefficients) for c in model.cuts if c.coefficients is not None}
    return solution, coefficients


def solution_from_json(problem: PartitionProblem, text: str) -> Tuple[PartitionSolution, Dict[int, List[float]]]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"line {e.lineno} column {e.colno}: {e.msg}", [{"path": f"line {e.lineno}", "message": e.msg}]) from e
    if isinstance(data, dict) and "solution" in data and isinstance(data["solution"], dict):
        data = data["solution"]
    return solution_from_dict(problem, data)
