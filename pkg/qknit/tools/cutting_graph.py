"""
Cutting graph: one vertex per endpoint of every two-qubit gate, a GATE edge joining
the two endpoints of a gate and a WIRE edge joining consecutive two-qubit gates on
the same qubit. Single-qubit gates, measurements and resets leave no trace here.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

import networkx as nx

from qknit.tools.circuit_ir import Circuit, GateKind
from qknit.tools.errors import UnsupportedGate

logger = logging.getLogger(__name__)


class EdgeKind(Enum):
    GATE = "gate"
    WIRE = "wire"


@dataclass(frozen=True)
class CutVertex:
    id: int
    gate_index: int
    qubit: int

    @property
    def label(self) -> str:
        return f"g{self.gate_index}:q{self.qubit}"


@dataclass(frozen=True)
class CutEdge:
    # ids: gate edges first (0..|G|-1), then wire edges
    id: int
    endpoints: Tuple[int, int]
    kind: EdgeKind
    gate_kind: GateKind
    angle: Optional[float] = None

    @property
    def tail(self) -> int:
        return self.endpoints[0]

    @property
    def head(self) -> int:
        return self.endpoints[1]

    @property
    def name(self) -> str:
        return f"e{self.id}"


@dataclass(frozen=True)
class CuttingGraph:
    num_qubits: int
    vertices: Tuple[CutVertex, ...]
    gate_edges: Tuple[CutEdge, ...]
    wire_edges: Tuple[CutEdge, ...]
    first_vertices: FrozenSet[int]
    qubit_of: Dict[int, int] = field(hash=False)
    gate_of: Dict[int, int] = field(hash=False)

    @property
    def edges(self) -> Tuple[CutEdge, ...]:
        return self.gate_edges + self.wire_edges

    @property
    def active_qubits(self) -> List[int]:
        """Qubits carrying at least one two-qubit gate."""
        return sorted({v.qubit for v in self.vertices})

    def partner(self, vertex_id: int) -> int:
        """The other endpoint of the same gate."""
        return vertex_id ^ 1


def build_cutting_graph(circuit: Circuit) -> CuttingGraph:
    vertices: List[CutVertex] = []
    gate_edges: List[CutEdge] = []
    wire_links: List[Tuple[int, int, GateKind]] = []
    last_on_qubit: Dict[int, int] = {}

    for index, g in enumerate(circuit.gates):
        if len(g.qubits) > 2:
            raise UnsupportedGate(f"gate {index} ({g.kind.value}) acts on {len(g.qubits)} qubits")
        if not g.is_two_qubit:
            continue
        ids = []
        for q in g.qubits:
            vid = len(vertices)
            vertices.append(CutVertex(vid, index, q))
            ids.append(vid)
            if q in last_on_qubit:
                wire_links.append((last_on_qubit[q], vid, g.kind))
            last_on_qubit[q] = vid
        gate_edges.append(CutEdge(len(gate_edges), (ids[0], ids[1]), EdgeKind.GATE, g.kind, g.angle))

    offset = len(gate_edges)
    wire_links.sort(key=lambda link: link[1])
    wire_edges = [
        CutEdge(offset + i, (tail, head), EdgeKind.WIRE, kind) for i, (tail, head, kind) in enumerate(wire_links)
    ]
    has_incoming = {e.head for e in wire_edges}
    graph = CuttingGraph(
        num_qubits=circuit.num_qubits,
        vertices=tuple(vertices),
        gate_edges=tuple(gate_edges),
        wire_edges=tuple(wire_edges),
        first_vertices=frozenset(v.id for v in vertices if v.id not in has_incoming),
        qubit_of={v.id: v.qubit for v in vertices},
        gate_of={v.id: v.gate_index for v in vertices},
    )
    logger.debug(f"[graph] {graph_summary(graph)}")
    return graph


def graph_summary(graph: CuttingGraph) -> Dict[str, int]:
    return {
        "vertices": len(graph.vertices),
        "gate_edges": len(graph.gate_edges),
        "wire_edges": len(graph.wire_edges),
        "first_vertices": len(graph.first_vertices),
    }


def to_networkx(graph: CuttingGraph, removed: Iterable[int] = ()) -> nx.Graph:
    """Undirected view of the graph with the given edge ids left out."""
    skip = set(removed)
    g = nx.Graph()
    g.add_nodes_from(v.id for v in graph.vertices)
    g.add_edges_from(e.endpoints for e in graph.edges if e.id not in skip)
    return g


def partition_components(graph: CuttingGraph, cut_edge_ids: Iterable[int]) -> List[List[int]]:
    """Connected components left after removing the cut edges, each sorted, ordered by smallest id."""
    components = nx.connected_components(to_networkx(graph, cut_edge_ids))
    return sorted((sorted(c) for c in components), key=lambda c: c[0])


def export_dot(graph: CuttingGraph, name: str = "cutting_graph") -> str:
    """
    Graphviz text. Vertices of one qubit share a subgraph; GATE edges are red and
    undirected, WIRE edges blue, dashed and directed in execution order.
    """
    lines = [f"digraph {name} {{", "\trankdir=LR;", '\tnode [shape=circle, fontsize=10];']
    rows: Dict[int, List[CutVertex]] = {}
    for v in graph.vertices:
        rows.setdefault(v.qubit, []).append(v)
    for qubit in sorted(rows):
        lines.append(f"\tsubgraph q{qubit} {{")
        for v in rows[qubit]:
            first = ", style=bold" if v.id in graph.first_vertices else ""
            lines.append(f'\t\t"v{v.id}" [label="{v.label}"{first}];')
        lines.append("\t}")
    for e in graph.gate_edges:
        lines.append(
            f'\t"v{e.tail}" -> "v{e.head}" [label="{e.name} {e.gate_kind.value}", color=red, dir=none];'
        )
    for e in graph.wire_edges:
        lines.append(f'\t"v{e.tail}" -> "v{e.head}" [label="{e.name} wire", color=blue, style=dashed];')
    lines.append("}")
    return "\n".join(lines) + "\n"
