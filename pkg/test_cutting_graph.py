#!/usr/bin/env python3
"""
Tests for the cutting graph and its DOT export
"""

import pytest

from qknit.tools.circuit_ir import Circuit, gate
from qknit.tools.cutting_graph import (
    EdgeKind,
    build_cutting_graph,
    export_dot,
    graph_summary,
    partition_components,
)
from qknit.tools.generators import BridgeSpec, generate_bridge, generate_ghz, generate_hea, generate_qaoa_maxcut


def _single_cnot() -> Circuit:
    return Circuit(2, (gate("cnot", 0, 1),))


def test_ghz4_graph():
    graph = build_cutting_graph(generate_ghz(4))
    assert graph_summary(graph) == {"vertices": 6, "gate_edges": 3, "wire_edges": 2, "first_vertices": 4}
    # gate edges come first, wire edges follow in head order
    assert [e.endpoints for e in graph.gate_edges] == [(0, 1), (2, 3), (4, 5)]
    assert [(e.id, e.endpoints) for e in graph.wire_edges] == [(3, (1, 2)), (4, (3, 4))]
    assert graph.first_vertices == frozenset({0, 1, 3, 5})


def test_single_cnot_graph():
    graph = build_cutting_graph(_single_cnot())
    assert graph_summary(graph) == {"vertices": 2, "gate_edges": 1, "wire_edges": 0, "first_vertices": 2}


def test_revisited_pair_graph():
    # (q0,q1), (q1,q2), (q2,q3), (q0,q1): one wire edge per consecutive pair on each qubit
    circuit = Circuit(4, (gate("cnot", 0, 1), gate("cnot", 1, 2), gate("cnot", 2, 3), gate("cz", 0, 1)))
    graph = build_cutting_graph(circuit)
    assert len(graph.gate_edges) == 4
    assert len(graph.wire_edges) == 4
    assert len(graph.first_vertices) == 4


def test_single_qubit_gates_and_measurements_leave_no_trace():
    circuit = Circuit(
        2,
        (gate("h", 0), gate("cnot", 0, 1), gate("rz", 1, angle=0.2), gate("measure_z", 0, clbit=0), gate("reset", 1)),
        num_clbits=1,
    )
    graph = build_cutting_graph(circuit)
    assert len(graph.vertices) == 2
    assert graph.vertices[0].gate_index == 1


@pytest.mark.parametrize(
    "circuit",
    [
        generate_ghz(6),
        generate_hea(5, 3, 2),
        generate_qaoa_maxcut(6, 0.5, 3, 1),
        generate_bridge(BridgeSpec(2, 3, 2, 2)),
    ],
)
def test_edge_count_formulas(circuit):
    graph = build_cutting_graph(circuit)
    touches = {}
    for _, g in circuit.two_qubit_gates:
        for q in g.qubits:
            touches[q] = touches.get(q, 0) + 1
    assert len(graph.gate_edges) == len(circuit.two_qubit_gates)
    assert len(graph.wire_edges) == sum(max(0, t - 1) for t in touches.values())

    incoming, outgoing = {}, {}
    for e in graph.wire_edges:
        assert e.kind is EdgeKind.WIRE
        assert graph.qubit_of[e.tail] == graph.qubit_of[e.head]
        incoming[e.head] = incoming.get(e.head, 0) + 1
        outgoing[e.tail] = outgoing.get(e.tail, 0) + 1
    assert max(incoming.values(), default=0) <= 1
    assert max(outgoing.values(), default=0) <= 1


def test_partition_components():
    graph = build_cutting_graph(generate_ghz(4))
    assert partition_components(graph, []) == [[0, 1, 2, 3, 4, 5]]
    assert partition_components(graph, [1]) == [[0, 1, 2], [3, 4, 5]]
    assert partition_components(graph, [4]) == [[0, 1, 2, 3], [4, 5]]


def test_export_dot():
    single = export_dot(build_cutting_graph(_single_cnot()))
    assert single.count("[label=\"g") == 2
    assert single.count("->") == 1

    ghz = build_cutting_graph(generate_ghz(4))
    text = export_dot(ghz)
    assert text.count("[label=\"g") == 6
    assert text.count("->") == 5
    assert text.count("color=blue") == 2
    assert text.count("color=red") == 3
    assert "g1:q1" in text
    assert text == export_dot(build_cutting_graph(generate_ghz(4)))


if __name__ == "__main__":
    pytest.main([__file__])
