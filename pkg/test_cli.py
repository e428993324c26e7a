#!/usr/bin/env python3
"""
End-to-end tests for the command line: partition, verify, budget and bench
"""

import json
import logging
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor

import pytest

import main
from qknit.pipeline import configure_logging, max_qubits_for
from qknit.tools.bench import BenchInstance, _executor, load_suite_file, parse_suite, run_bench
from qknit.tools.errors import InvalidArgument
from qknit.tools.solvers import SolverBackend

GHZ4_ARGS = ["--gen", "ghz:4", "--partitions", "2", "--no-budget", "--solver", "internal"]


def _partition(tmp_path, *extra, max_qubits="2"):
    report = tmp_path / "report.json"
    code = main.main(["partition", *GHZ4_ARGS, "--max-qubits", max_qubits, "--report", str(report), *extra])
    return code, report


def _verify(capsys, solution_path, observable="ZZZZ", *extra):
    capsys.readouterr()
    code = main.main(["verify", "--gen", "ghz:4", "--solution", str(solution_path), "--observable", observable, *extra])
    return code, json.loads(capsys.readouterr().out)


def test_partition_writes_report(tmp_path):
    code, report = _partition(tmp_path)
    assert code == main.EXIT_OK
    data = json.loads(report.read_text())
    assert data["status"] == "optimal"
    assert data["optimal"] is True
    assert data["solution"]["overhead"] == pytest.approx(9.0)
    assert data["solution"]["Q"] == [2, 2]
    assert data["validation"] == []
    assert data["timings"] is None
    assert data["budget_check"]["within_budget"] is True


def test_partition_prints_report_without_file(capsys):
    code = main.main(["partition", *GHZ4_ARGS, "--max-qubits", "2"])
    captured = capsys.readouterr()
    assert code == main.EXIT_OK
    assert json.loads(captured.out)["status"] == "optimal"
    assert "S=9" in captured.err


def test_partition_infeasible_exit_code(tmp_path):
    code, report = _partition(tmp_path, "--wire-only", "--no-cc")
    assert code == main.EXIT_INFEASIBLE
    assert json.loads(report.read_text())["solution"] is None


def test_partition_side_outputs(tmp_path):
    dot, smt2 = tmp_path / "graph.dot", tmp_path / "model.smt2"
    code, _ = _partition(tmp_path, "--dot-out", str(dot), "--smt2-out", str(smt2), "--timings")
    assert code == main.EXIT_OK
    assert dot.read_text().count("->") == 5
    assert smt2.read_text().startswith("; qknit partition model")


def test_partition_needs_a_capacity(capsys):
    assert main.main(["partition", *GHZ4_ARGS]) == main.EXIT_ERROR
    assert "failed" in capsys.readouterr().err


def test_partition_bad_generator(capsys):
    code = main.main(["partition", "--gen", "nope:3", "--max-qubits", "2", "--solver", "internal"])
    assert code == main.EXIT_ERROR


def test_verify_gate_cut(tmp_path, capsys):
    _, report = _partition(tmp_path)
    code, result = _verify(capsys, report)
    assert code == main.EXIT_OK
    assert result["direct"] == pytest.approx(1.0)
    assert result["deviation"] < 1e-9
    assert result["widths"] == [2, 2]
    assert result["normalization"] == pytest.approx(3.0)


def test_verify_wire_cut(tmp_path, capsys):
    _, report = _partition(tmp_path, "--wire-only", "--no-cc", max_qubits="3")
    for observable in ("ZZZZ", "XXXX", "IZZI"):
        code, result = _verify(capsys, report, observable, "--no-cc")
        assert code == main.EXIT_OK, result
        assert result["deviation"] < 1e-9


def test_verify_grouped_cut_is_refused(tmp_path, capsys):
    _, report = _partition(tmp_path)
    data = json.loads(report.read_text())
    solution = data["solution"]
    solution["cuts"][0]["grouped"] = True
    path = tmp_path / "grouped.json"
    path.write_text(json.dumps(solution))
    code = main.main(["verify", "--gen", "ghz:4", "--solution", str(path), "--observable", "ZZZZ"])
    assert code == main.EXIT_GROUPED


def test_verify_detects_wrong_coefficients(tmp_path, capsys):
    _, report = _partition(tmp_path)
    data = json.loads(report.read_text())
    cut = data["solution"]["cuts"][0]
    cut["coefficients"] = [0.0] * len(cut["coefficients"])
    path = tmp_path / "zeroed.json"
    path.write_text(json.dumps(data))
    code, result = _verify(capsys, path)
    assert code == main.EXIT_MISMATCH
    assert result["knitted"] == 0.0


def test_verify_missing_file(tmp_path):
    code = main.main(["verify", "--gen", "ghz:4", "--solution", str(tmp_path / "absent.json"), "--observable", "ZZZZ"])
    assert code == main.EXIT_ERROR


def test_budget_table(capsys):
    assert main.main(["budget", "--format", "json"]) == main.EXIT_OK
    rows = json.loads(capsys.readouterr().out)
    assert [r["max_cuts"] for r in rows] == [5, 4, 3, 10, 7, 5, 15, 10, 8]


def test_budget_text_and_bad_family(capsys):
    assert main.main(["budget", "--freq", "1e3", "--families", "nine"]) == main.EXIT_OK
    assert "nine_pow" in capsys.readouterr().out
    assert main.main(["budget", "--families", "twelve"]) == main.EXIT_ERROR


def test_bench_is_deterministic(tmp_path):
    outputs = []
    for name in ("a.csv", "b.csv"):
        path = tmp_path / name
        code = main.main(["bench", "--suite", "ghz:4-5", "--solver", "internal", "--out", str(path)])
        assert code == main.EXIT_OK
        outputs.append(path.read_text())
    assert outputs[0] == outputs[1]
    assert outputs[0].splitlines()[0].startswith("row,instance,mode")


def test_bench_rows(tmp_path, capsys):
    code = main.main(["bench", "--suite", "ghz:4-5", "--solver", "internal", "--format", "json", "--jobs", "2"])
    assert code == main.EXIT_OK
    rows = json.loads(capsys.readouterr().out)
    by_key = {(r["instance"], r["mode"]): r for r in rows if r["row"] == "instance"}
    assert by_key[("ghz:4", "combined")]["overhead"] == pytest.approx(9.0)
    assert by_key[("ghz:4", "wire-only")]["feasible"] is False
    assert by_key[("ghz:5", "combined")]["overhead"] == pytest.approx(9.0)
    assert by_key[("ghz:5", "wire-only")]["overhead"] == pytest.approx(16.0)
    aggregates = {r["mode"]: r for r in rows if r["row"] == "aggregate"}
    assert aggregates["combined"]["infeasible_fraction"] == 0.0
    assert aggregates["wire-only"]["infeasible_fraction"] == 0.5
    assert aggregates["combined/wire-only"]["overhead_ratio"] == pytest.approx(9.0 / 16.0)


def test_bench_parallel_rows_match_serial():
    instances = parse_suite("ghz:4-5")
    serial = run_bench(instances, backend=SolverBackend.internal(), jobs=1)
    parallel = run_bench(instances, backend=SolverBackend.internal(), jobs=2)
    assert parallel == serial
    for backend, jobs, expected in (
        (SolverBackend.internal(), 2, ProcessPoolExecutor),
        (SolverBackend.external("z3"), 2, ThreadPoolExecutor),
        (SolverBackend.internal(), 1, ThreadPoolExecutor),
    ):
        with _executor(backend, jobs) as pool:
            assert isinstance(pool, expected)


def test_bench_rejects_unknown_mode():
    assert main.main(["bench", "--suite", "ghz:4", "--modes", "gate-only", "--solver", "internal"]) == main.EXIT_ERROR


def test_parse_suite():
    instances = parse_suite("ghz:4-6; qaoa:6,0.3,2,1 ;hea:5")
    assert [i.gen for i in instances] == ["ghz:4", "ghz:5", "ghz:6", "qaoa:6,0.3,2,1", "hea:5,1,1"]
    assert parse_suite("bridge:2,2,3,2") == [BenchInstance("bridge:2,2,3,2", anchors=True)]
    with pytest.raises(InvalidArgument):
        parse_suite("ghz:a-b")
    with pytest.raises(InvalidArgument):
        parse_suite(" ; ")


def test_load_suite_file(tmp_path):
    path = tmp_path / "suite.yaml"
    path.write_text(
        "instances:\n"
        "  - ghz:4-5\n"
        "  - gen: bridge:2,2,1,1\n"
        "    partitions: 2\n"
        "    max_qubits: 4\n"
        "reduce_factors: [2, 3]\n"
        "modes: [combined]\n"
    )
    instances, settings = load_suite_file(str(path))
    assert [i.gen for i in instances] == ["ghz:4", "ghz:5", "bridge:2,2,1,1"]
    assert instances[2] == BenchInstance("bridge:2,2,1,1", partitions=2, max_qubits=4, anchors=True)
    assert settings == {"reduce_factors": [2, 3], "modes": ["combined"]}

    bad = tmp_path / "bad.yaml"
    bad.write_text("- ghz:4\n")
    with pytest.raises(InvalidArgument):
        load_suite_file(str(bad))


def test_max_qubits_for():
    assert max_qubits_for(10, 2, 0.3) == 7
    assert max_qubits_for(4, 2) == 2
    assert max_qubits_for(5, 2) == 3
    assert max_qubits_for(3, 10) == 1
    with pytest.raises(InvalidArgument):
        max_qubits_for(4, 0)


def test_configure_logging(tmp_path):
    log_file = tmp_path / "qknit.log"
    configure_logging("debug", str(log_file))
    logging.getLogger("qknit.test").debug("[test] hello")
    for handler in logging.getLogger().handlers:
        handler.flush()
    assert "[test] hello" in log_file.read_text()
    configure_logging("WARNING")
    assert logging.getLogger().level == logging.WARNING


if __name__ == "__main__":
    pytest.main([__file__])
