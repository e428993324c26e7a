#!/usr/bin/env python3
"""
Tests for the statevector simulator, the shipped QPDs, the move circuit and the
subcircuit ensembles: knitted expectations must equal the uncut ones.
"""

import itertools
import json
import math

import numpy as np
import pytest

from qknit.pipeline import build_problem
from qknit.tools.circuit_ir import Circuit, GateKind, gate
from qknit.tools.cost_model import cut_kind_for_gate, gamma_sq, wire_cut
from qknit.tools.cutting_graph import build_cutting_graph
from qknit.tools.errors import GroupedCutUnsupported, InvalidArgument, TooWide, UnpricedCut
from qknit.tools.generators import generate_ghz, generate_hea
from qknit.tools.knitting import (
    cut_coefficients,
    ensemble_to_json,
    generate_subcircuits,
    knit_expectation,
    sample_expectation,
)
from qknit.tools.partition_model import build_solution
from qknit.tools.qpd import (
    apply_qpd,
    identity_qpd,
    move_circuit,
    qpd_cnot,
    qpd_crz,
    qpd_cz,
    qpd_for_gate,
    validate_qpd,
)
from qknit.tools.simulator import (
    expectation,
    final_state,
    reduced_density_matrix,
    simulate_statevector,
    state_fidelity,
)

TOLERANCE = 1e-9
GHZ4 = generate_ghz(4)


def _random_paulis(n: int, count: int, seed: int):
    rng = np.random.default_rng(seed)
    return ["".join(rng.choice(list("IXYZ"), size=n)) for _ in range(count)]


def _ensemble(circuit: Circuit, labels, max_qubits: int, cc: bool = True, partitions: int = 2):
    graph = build_cutting_graph(circuit)
    problem = build_problem(circuit, partitions, max_qubits, cc=cc, graph=graph)
    solution = build_solution(problem, labels)
    return generate_subcircuits(circuit, graph, solution, cc=cc), solution


def _assert_knits(circuit: Circuit, ensemble, observables):
    for obs in observables:
        assert knit_expectation(ensemble, obs) == pytest.approx(expectation(circuit, obs), abs=TOLERANCE), obs


# ---------------------------------------------------------------------------
# Simulator
# ---------------------------------------------------------------------------


def test_ghz_statevector():
    amplitudes = final_state(GHZ4)
    expected = np.zeros(16, dtype=complex)
    expected[0] = expected[15] = 1 / math.sqrt(2)
    assert np.allclose(amplitudes, expected)


def test_empty_circuit_is_identity():
    assert np.allclose(final_state(Circuit(1)), [1, 0])
    assert np.allclose(final_state(Circuit(2), "10"), [0, 0, 1, 0])


def test_measurement_branches():
    branches = simulate_statevector(Circuit(1, (gate("h", 0), gate("measure_z", 0, clbit=0)), num_clbits=1))
    assert sorted((b.clbits, round(b.probability, 12)) for b in branches) == [((0,), 0.5), ((1,), 0.5)]
    with pytest.raises(InvalidArgument):
        final_state(Circuit(1, (gate("h", 0), gate("measure_z", 0, clbit=0)), num_clbits=1))


def test_reset_and_conditions():
    circuit = Circuit(
        2,
        (gate("h", 0), gate("measure_z", 0, clbit=0), gate("x", 1, condition=(0, 1)), gate("reset", 0)),
        num_clbits=1,
    )
    for branch in simulate_statevector(circuit):
        # qubit 1 copies the outcome, qubit 0 is back in |0>
        assert expectation(Circuit(2), "ZI", initial=branch.amplitudes) == pytest.approx(1.0)
        expected_z1 = 1.0 if branch.clbits == (0,) else -1.0
        assert expectation(Circuit(2), "IZ", initial=branch.amplitudes) == pytest.approx(expected_z1)


def test_expectations():
    assert expectation(GHZ4, "ZZZZ") == pytest.approx(1.0)
    assert expectation(GHZ4, "ZIII") == pytest.approx(0.0, abs=1e-12)
    assert expectation(GHZ4, "XXXX") == pytest.approx(1.0)
    assert expectation(Circuit(1), "Z") == pytest.approx(1.0)
    with pytest.raises(InvalidArgument):
        expectation(GHZ4, "ZZ")


def test_simulator_width_limit():
    with pytest.raises(TooWide):
        simulate_statevector(generate_ghz(21))


# ---------------------------------------------------------------------------
# QPDs
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("cc", [False, True])
def test_cnot_and_cz_decompositions(cc):
    for qpd, target in ((qpd_cnot(cc), GateKind.CNOT), (qpd_cz(cc), GateKind.CZ)):
        report = validate_qpd(qpd)
        assert report.passed, report.details
        assert report.max_deviation <= 1e-10
        assert report.kappa == pytest.approx(3.0)
        assert len(qpd.terms) >= 2
        assert qpd.target is target
    assert qpd_cnot(cc).kappa ** 2 == pytest.approx(gamma_sq(cut_kind_for_gate(GateKind.CNOT)))


@pytest.mark.parametrize("angle", [0.3, math.pi / 2, math.pi, -1.1, 2.5])
def test_crz_decomposition(angle):
    qpd = qpd_crz(angle)
    report = validate_qpd(qpd)
    assert report.passed, report.details
    assert qpd.kappa == pytest.approx(1 + 2 * abs(math.sin(angle / 2)))
    assert qpd.kappa**2 == pytest.approx(gamma_sq(cut_kind_for_gate(GateKind.CRZ, angle)))


def test_crz_zero_angle_drops_empty_terms():
    qpd = qpd_crz(0.0)
    assert len(qpd.terms) == 1
    assert validate_qpd(qpd).passed


def test_identity_decomposition():
    report = validate_qpd(identity_qpd())
    assert report.passed
    assert report.kappa == 1.0


def test_broken_decomposition_fails():
    qpd = qpd_cnot()
    coefficients = qpd.coefficients
    coefficients[0] = -coefficients[0]
    report = validate_qpd(qpd.with_coefficients(coefficients))
    assert not report.passed
    assert report.max_deviation > 0.1
    # the right terms against the wrong gate fail as well
    assert not validate_qpd(qpd_cnot(), target=GateKind.CZ).passed
    with pytest.raises(InvalidArgument):
        qpd.with_coefficients([1.0])


def test_cnot_fixes_zero_zero():
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = 1.0
    assert np.allclose(apply_qpd(rho, qpd_cnot()), rho)


def test_swap_has_no_shipped_decomposition():
    with pytest.raises(UnpricedCut):
        qpd_for_gate(gate("swap", 0, 1))


# ---------------------------------------------------------------------------
# Move circuit
# ---------------------------------------------------------------------------


def _moved_states(alpha, beta):
    psi = np.array([alpha, beta], dtype=complex)
    psi = psi / np.linalg.norm(psi)
    branches = simulate_statevector(move_circuit(), np.kron(psi, [1, 0]))
    return psi, branches


def test_move_circuit_basis_and_plus():
    psi, branches = _moved_states(1, 0)
    assert len(branches) == 2
    for b in branches:
        assert state_fidelity(reduced_density_matrix(b.state, [1]), psi) == pytest.approx(1.0)
    psi, branches = _moved_states(1, 1)
    for b in branches:
        assert state_fidelity(reduced_density_matrix(b.state, [1]), psi) == pytest.approx(1.0)


def test_move_circuit_transfers_random_states():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        alpha, beta = rng.normal(size=2) + 1j * rng.normal(size=2)
        psi, branches = _moved_states(alpha, beta)
        assert sum(b.probability for b in branches) == pytest.approx(1.0)
        for b in branches:
            assert state_fidelity(reduced_density_matrix(b.state, [1]), psi) >= 1 - 1e-10


# ---------------------------------------------------------------------------
# Ensembles
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("cc", [False, True])
def test_ghz_gate_cut_knits(cc):
    ensemble, _ = _ensemble(GHZ4, [0, 0, 0, 1, 1, 1], 2, cc=cc)
    assert len(ensemble.entries) == len(qpd_cnot(cc).terms)
    assert ensemble.normalization == pytest.approx(3.0)
    assert ensemble.widths == (2, 2)
    assert knit_expectation(ensemble, "ZZZZ") == pytest.approx(1.0, abs=TOLERANCE)
    _assert_knits(GHZ4, ensemble, _random_paulis(4, 20, seed=1))


@pytest.mark.parametrize("cc", [False, True])
def test_ghz_wire_cut_knits(cc):
    ensemble, solution = _ensemble(GHZ4, [0, 0, 0, 0, 1, 1], 3, cc=cc)
    assert solution.qubit_counts == (3, 2)
    assert ensemble.widths == (3, 2)
    assert ensemble.normalization == pytest.approx(3.0)
    assert knit_expectation(ensemble, "ZZZZ") == pytest.approx(1.0, abs=TOLERANCE)
    _assert_knits(GHZ4, ensemble, _random_paulis(4, 20, seed=2))


def test_wire_cut_overhead_matches_price_with_cc():
    ensemble, _ = _ensemble(GHZ4, [0, 0, 0, 0, 1, 1], 3)
    assert ensemble.normalization**2 == pytest.approx(gamma_sq(wire_cut(cc_available=True)))


def test_two_gate_cuts_multiply():
    # cuts CNOT(0,1) and CNOT(1,2); q1 sits alone
    ensemble, solution = _ensemble(GHZ4, [0, 1, 1, 0, 0, 0], 3)
    assert solution.cuts == (0, 1)
    assert len(ensemble.entries) == 36
    assert ensemble.normalization == pytest.approx(9.0)
    _assert_knits(GHZ4, ensemble, ["ZZZZ", "XXXX", "YYXX", "IZZI"] + _random_paulis(4, 10, seed=3))


def test_gate_and_wire_cut_together():
    circuit = generate_ghz(5)
    # cut CNOT(1,2) and the q3 wire between CNOT(2,3) and CNOT(3,4)
    ensemble, solution = _ensemble(circuit, [0, 0, 0, 1, 1, 1, 0, 0], 4)
    assert len(solution.cuts) == 2
    assert ensemble.normalization == pytest.approx(9.0)
    _assert_knits(circuit, ensemble, _random_paulis(5, 12, seed=4))


def test_crz_cut_knits():
    circuit = Circuit(2, (gate("h", 0), gate("h", 1), gate("crz", 0, 1, angle=0.7), gate("h", 1)))
    ensemble, _ = _ensemble(circuit, [0, 1], 1)
    assert ensemble.normalization == pytest.approx(1 + 2 * abs(math.sin(0.35)))
    _assert_knits(circuit, ensemble, ["".join(p) for p in itertools.product("IXYZ", repeat=2)])


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_every_single_cut_on_a_rotated_chain(seed):
    # one HEA layer is a path, so splitting at any edge head cuts exactly that edge
    circuit = generate_hea(5, 1, seed)
    graph = build_cutting_graph(circuit)
    observables = _random_paulis(5, 6, seed=seed)
    for edge in graph.edges:
        labels = [1 if v.id >= edge.head else 0 for v in graph.vertices]
        ensemble, solution = _ensemble(circuit, labels, 5)
        assert solution.cuts == (edge.id,)
        _assert_knits(circuit, ensemble, observables)


def test_no_cut_ensemble_is_the_circuit():
    circuit = generate_hea(3, 2, 5)
    ensemble, _ = _ensemble(circuit, [0] * 8, 3)
    assert len(ensemble.entries) == 1
    assert ensemble.entries[0].weight == 1.0
    _assert_knits(circuit, ensemble, ["ZZZ", "XIY", "IIZ"])


def test_grouped_cuts_are_rejected():
    graph = build_cutting_graph(GHZ4)
    problem = build_problem(GHZ4, 2, 3, graph=graph)
    solution = build_solution(problem, [0, 0, 0, 1, 1, 1], grouped=[1])
    with pytest.raises(GroupedCutUnsupported):
        generate_subcircuits(GHZ4, graph, solution)


def test_cut_coefficients_override():
    graph = build_cutting_graph(GHZ4)
    problem = build_problem(GHZ4, 2, 2, graph=graph)
    solution = build_solution(problem, [0, 0, 0, 1, 1, 1])
    coefficients = cut_coefficients(GHZ4, graph, solution)
    assert coefficients == {1: [0.5, 0.5, 0.5, -0.5, 0.5, -0.5]}
    zeroed = generate_subcircuits(GHZ4, graph, solution, coefficients={1: [0.0] * 6})
    assert knit_expectation(zeroed, "ZZZZ") == 0.0


def test_sampled_estimate():
    ensemble, _ = _ensemble(GHZ4, [0, 0, 0, 1, 1, 1], 2)
    first = sample_expectation(ensemble, "ZZZZ", shots=20_000, seed=7)
    assert first == sample_expectation(ensemble, "ZZZZ", shots=20_000, seed=7)
    assert first == pytest.approx(1.0, abs=0.15)
    with pytest.raises(InvalidArgument):
        sample_expectation(ensemble, "ZZZZ", shots=0)


def test_ensemble_json():
    ensemble, _ = _ensemble(GHZ4, [0, 0, 0, 1, 1, 1], 2)
    data = json.loads(ensemble_to_json(ensemble))
    assert data["schema_version"] == 1
    assert data["widths"] == [2, 2]
    assert len(data["entries"]) == 6
    assert data["cuts"][0]["qpd"] == "cnot-cc"
    assert ensemble_to_json(ensemble) == ensemble_to_json(_ensemble(GHZ4, [0, 0, 0, 1, 1, 1], 2)[0])


def test_entries_keep_partitions_apart():
    ensemble, _ = _ensemble(GHZ4, [0, 0, 0, 0, 1, 1], 3, cc=False)
    for entry in ensemble.entries:
        for p, sub in enumerate(entry.subcircuits):
            assert sub.num_qubits == ensemble.widths[p]
            assert all(q < sub.num_qubits for g in sub.gates for q in g.qubits)


if __name__ == "__main__":
    pytest.main([__file__])
