#!/usr/bin/env python3
"""
Tests for the constraint encoding, SMT-LIB2 emission, model decoding and the
independent solution checker
"""

import dataclasses
import json

import numpy as np
import pytest

from qknit.pipeline import build_problem
from qknit.tools.circuit_ir import Circuit, gate
from qknit.tools.cost_model import Budget, group_cost, to_fixed_point
from qknit.tools.cutting_graph import build_cutting_graph
from qknit.tools.errors import InconsistentModel, InfeasibleTrivially, InvalidProblem, SchemaError
from qknit.tools.generators import generate_ghz, generate_hea
from qknit.tools.partition_model import (
    COST,
    GROUP_COST,
    GROUP_SIZE,
    PartitionProblem,
    b_name,
    build_solution,
    c_name,
    decode,
    emit_smtlib2,
    encode,
    o_name,
    q_name,
    solution_from_json,
    solution_to_json,
    validate_solution,
)
from qknit.tools import formula as F

GHZ4 = generate_ghz(4)
# middle CNOT cut: {v0..v2} | {v3..v5}
GATE_CUT_LABELS = [0, 0, 0, 1, 1, 1]
# q2 wire cut between its two CNOTs
WIRE_CUT_LABELS = [0, 0, 0, 0, 1, 1]


def _ghz_problem(max_qubits=2, **kwargs) -> PartitionProblem:
    return build_problem(GHZ4, 2, max_qubits, **kwargs)


def _model_for(problem: PartitionProblem, labels, grouped=()):
    """A full assignment of every declared symbol for the given labeling."""
    solution = build_solution(problem, labels, grouped)
    model = {}
    for v in problem.graph.vertices:
        for p in range(problem.num_partitions):
            model[o_name(v.id, p)] = labels[v.id] == p
    for e in problem.graph.edges:
        model[c_name(e.id)] = e.id in solution.cuts
        model[b_name(e.id)] = e.id in solution.grouped
    for p, q in enumerate(solution.qubit_counts):
        model[q_name(p)] = q
    model[GROUP_SIZE] = len(solution.grouped)
    model[GROUP_COST] = to_fixed_point(group_cost(len(solution.grouped)))
    model[COST] = solution.overhead_fp
    return model, solution


def test_symbol_counts_for_single_cnot():
    problem = build_problem(Circuit(2, (gate("cnot", 0, 1),)), 2, 2)
    system = encode(problem)
    names = system.symbols
    assert len([n for n in names if n.startswith("o_")]) == 4
    assert len([n for n in names if n.startswith("c_")]) == 1
    assert len([n for n in names if n.startswith("b_")]) == 1
    assert len([n for n in names if n.startswith("Q_")]) == 2


def test_emission_is_deterministic():
    text = emit_smtlib2(encode(_ghz_problem()))
    assert text == emit_smtlib2(encode(_ghz_problem()))
    assert text.startswith("; qknit partition model\n")
    assert "(set-logic QF_LIA)" in text
    assert "(declare-fun o_0_0 () Bool)" in text
    assert "(declare-fun cost () Int)" in text
    assert text.rstrip().endswith(")")
    assert "(check-sat)" in text


def test_emission_with_bound():
    system = encode(_ghz_problem())
    assert "(assert (< cost 954243))" in emit_smtlib2(system, bound=954243)
    assert "(check-sat)" not in emit_smtlib2(system, commands=False)


def test_wire_only_forces_gate_edges_uncut():
    text = emit_smtlib2(encode(_ghz_problem(max_qubits=3, wire_only=True, cc=False)))
    for eid in range(3):
        assert f"(assert (not {c_name(eid)}))" in text
    assert "(assert (not c_3))" not in text


def test_no_grouping_without_cc():
    system = encode(_ghz_problem(cc=False))
    text = emit_smtlib2(system)
    for eid in range(5):
        assert f"(assert (not {b_name(eid)}))" in text


def test_single_partition_rejected():
    with pytest.raises(InvalidProblem):
        PartitionProblem(graph=build_cutting_graph(GHZ4), num_partitions=1, max_qubits=4).validate()
    with pytest.raises(InvalidProblem):
        build_problem(GHZ4, 1, 4)


def test_trivially_infeasible_capacity():
    with pytest.raises(InfeasibleTrivially):
        encode(_ghz_problem(max_qubits=1))


def test_budget_bound_in_encoding():
    problem = _ghz_problem(budget=Budget.from_total_samples(8000 * 100))
    text = emit_smtlib2(encode(problem))
    assert f"(assert (<= cost {problem.budget_fp}))" in text
    assert problem.budget_fp == 2_000_000


def test_decode_gate_cut():
    problem = _ghz_problem()
    system = encode(problem)
    model, _ = _model_for(problem, GATE_CUT_LABELS)
    assert all(F.check(a, model) for a in system.assertions)
    solution = decode(system, model)
    assert solution.cuts == (1,)
    assert solution.qubit_counts == (2, 2)
    assert solution.overhead == pytest.approx(9.0)
    assert solution.partitions == ((0, 1), (2, 3))
    assert validate_solution(problem, solution) == []


def test_decode_wire_cut_adds_a_qubit():
    problem = _ghz_problem(max_qubits=3, wire_only=True, cc=False)
    system = encode(problem)
    model, _ = _model_for(problem, WIRE_CUT_LABELS)
    solution = decode(system, model)
    assert solution.cuts == (4,)
    assert solution.qubit_counts == (3, 2)
    assert sum(solution.qubit_counts) == 4 + 1
    assert solution.overhead == pytest.approx(16.0)


def _canonical(labels):
    order = {}
    for p in labels:
        order.setdefault(p, len(order))
    return [order[p] for p in labels]


def test_cut_symbols_follow_the_labeling():
    circuit = generate_hea(3, 2, 5)
    problem = build_problem(circuit, 3, 10)
    system = encode(problem)
    rng = np.random.default_rng(11)
    checked = 0
    while checked < 25:
        labels = _canonical(rng.integers(0, 3, size=len(problem.graph.vertices)))
        if len(set(labels)) < 3:
            continue
        model, solution = _model_for(problem, labels)
        assert all(F.check(a, model) for a in system.assertions)
        for e in problem.graph.edges:
            assert model[c_name(e.id)] == (labels[e.tail] != labels[e.head])
            flipped = dict(model, **{c_name(e.id): not model[c_name(e.id)]})
            assert not all(F.check(a, flipped) for a in system.assertions), e.name
        assert decode(system, model).cuts == solution.cuts
        checked += 1


def test_decode_rejects_inconsistent_model():
    problem = _ghz_problem()
    system = encode(problem)
    model, _ = _model_for(problem, GATE_CUT_LABELS)
    bad_q = dict(model, **{q_name(0): 3})
    with pytest.raises(InconsistentModel):
        decode(system, bad_q)
    bad_cost = dict(model, **{COST: model[COST] + 1})
    with pytest.raises(InconsistentModel):
        decode(system, bad_cost)
    missing = dict(model)
    del missing[c_name(0)]
    with pytest.raises(InconsistentModel):
        decode(system, missing)


def test_decode_grouped_cut():
    problem = _ghz_problem(max_qubits=3)
    system = encode(problem)
    model, _ = _model_for(problem, GATE_CUT_LABELS, grouped=[1])
    solution = decode(system, model)
    assert solution.grouped == (1,)
    # one ancilla per touched partition
    assert solution.qubit_counts == (3, 3)


def test_validate_flags_tampered_solutions():
    problem = _ghz_problem()
    solution = build_solution(problem, GATE_CUT_LABELS)
    tampered = dataclasses.replace(solution, grouped=(3,))
    assert any("b implies c" in issue for issue in validate_solution(problem, tampered))

    wrong_q = dataclasses.replace(solution, qubit_counts=(1, 3))
    assert any("qubit count mismatch" in issue for issue in validate_solution(problem, wrong_q))

    over = build_solution(problem, [0, 0, 0, 0, 1, 1])
    assert any("qubit cap exceeded" in issue for issue in validate_solution(problem, over))

    nothing_cuttable = dataclasses.replace(problem, allowed_cut_kinds=frozenset())
    assert any("forbidden cut" in issue for issue in validate_solution(nothing_cuttable, solution))

    no_cc = _ghz_problem(cc=False)
    grouped = dataclasses.replace(solution, grouped=(1,))
    assert any("classical communication" in issue for issue in validate_solution(no_cc, grouped))


def test_validate_pins_and_empty_partitions():
    problem = _ghz_problem(pins={0: 1})
    solution = build_solution(problem, GATE_CUT_LABELS)
    assert any("pin violated" in issue for issue in validate_solution(problem, solution))

    everything = build_solution(_ghz_problem(max_qubits=4), [0] * 6)
    assert "partition 1 is empty" in validate_solution(_ghz_problem(max_qubits=4), everything)


def test_solution_json_round_trip():
    problem = _ghz_problem()
    solution = build_solution(problem, GATE_CUT_LABELS, optimal=True, backend="internal-exact")
    text = solution_to_json(problem, solution, coefficients={1: [0.5, 0.5, 0.5, -0.5, 0.5, -0.5]})
    data = json.loads(text)
    assert data["cuts"][0]["kind"] == "gate"
    assert data["cuts"][0]["gamma_sq"] == 9.0
    restored, coefficients = solution_from_json(problem, text)
    assert restored == solution
    assert coefficients == {1: [0.5, 0.5, 0.5, -0.5, 0.5, -0.5]}
    # a whole run report is accepted too
    wrapped, _ = solution_from_json(problem, json.dumps({"status": "optimal", "solution": data}))
    assert wrapped == solution


def test_solution_json_errors():
    problem = _ghz_problem()
    with pytest.raises(SchemaError):
        solution_from_json(problem, "{not json")
    with pytest.raises(SchemaError):
        solution_from_json(problem, json.dumps({"assignment": [0, 1]}))


if __name__ == "__main__":
    pytest.main([__file__])
