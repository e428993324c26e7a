"""
qknit command line.

    python main.py partition --gen ghz:4 --partitions 2 --max-qubits 2
    python main.py verify --gen ghz:4 --solution report.json --observable ZZZZ
    python main.py budget --freq 1e3,1e6,1e9 --runtime 86400
    python main.py bench --suite "ghz:4-8" --reduce-factors 2 --format csv
"""

import argparse
import json
import logging
import sys
from typing import List, Optional, Sequence

from dotenv import load_dotenv

from qknit.pipeline import build_problem, configure_logging, max_qubits_for, run_partition
from qknit.tools.bench import DEFAULT_SUITE, MODES, load_suite_file, parse_suite, rows_to_csv, rows_to_json, run_bench
from qknit.tools.circuit_ir import Circuit, load_circuit
from qknit.tools.cost_model import DEFAULT_BASE_SHOTS, SECONDS_PER_DAY, Budget, BudgetFamily, budget_table
from qknit.tools.cutting_graph import build_cutting_graph, export_dot
from qknit.tools.errors import GroupedCutUnsupported, InfeasibleTrivially, InvalidArgument, QknitError
from qknit.tools.generators import bridge_anchors, bridge_spec_from_text, generate_from_spec
from qknit.tools.knitting import ensemble_to_json, generate_subcircuits, knit_expectation
from qknit.tools.partition_model import Objective, PartitionProblem, emit_smtlib2, encode, solution_from_json
from qknit.tools.simulator import expectation
from qknit.tools.solvers import SolverBackend, SolveStatus

load_dotenv()

logger = logging.getLogger("qknit.cli")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2
EXIT_TIMEOUT = 3
EXIT_GROUPED = 4
EXIT_MISMATCH = 5

STATUS_EXIT = {
    SolveStatus.OPTIMAL: EXIT_OK,
    SolveStatus.UNSAT: EXIT_INFEASIBLE,
    SolveStatus.TIMEOUT: EXIT_TIMEOUT,
    SolveStatus.UNKNOWN: EXIT_ERROR,
}

VERIFY_TOLERANCE = 1e-9

FAMILY_ALIASES = {
    "bell": BudgetFamily.BELL_GROUP,
    "bell_group": BudgetFamily.BELL_GROUP,
    "nine": BudgetFamily.NINE_POW,
    "nine_pow": BudgetFamily.NINE_POW,
    "9": BudgetFamily.NINE_POW,
    "sixteen": BudgetFamily.SIXTEEN_POW,
    "sixteen_pow": BudgetFamily.SIXTEEN_POW,
    "16": BudgetFamily.SIXTEEN_POW,
}


def _floats(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as e:
        raise InvalidArgument(f"expected a comma-separated list of numbers, got '{text}'") from e


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(text if text.endswith("\n") else text + "\n")


# ---------------------------------------------------------------------------
# shared argument groups
# ---------------------------------------------------------------------------


def _add_circuit_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--in", dest="input", metavar="FILE", help="circuit file (.json or .qasm)")
    src.add_argument("--gen", metavar="NAME[:params]", help="ghz:n | qaoa:n,frac,seed,layers[,crz] | hea:n,layers,seed | bridge:L,M,kw,kv")


def _add_solver_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--solver", choices=["internal", "external"], default=None, help="default from QKNIT_SOLVER")
    p.add_argument("--smt-solver", default=None, help="external solver executable (QKNIT_SMT_SOLVER)")
    p.add_argument("--timeout", type=float, default=None, help="solver wall-clock limit in seconds")
    p.add_argument("--incremental", action="store_true", help="keep one solver process (push/pop)")


def _add_budget_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--budget-shots", type=float, default=None, help="total sample budget B")
    p.add_argument("--freq", type=float, default=None, help="sampling frequency in Hz (default 1e6)")
    p.add_argument("--runtime", type=float, default=None, help="runtime in seconds (default one day)")
    p.add_argument("--base-shots", type=int, default=DEFAULT_BASE_SHOTS)
    p.add_argument("--no-budget", action="store_true", help="no sampling budget")


def _load(args) -> Circuit:
    if args.gen:
        return generate_from_spec(args.gen)
    return load_circuit(args.input)


def _backend(args) -> SolverBackend:
    kwargs = {}
    if args.timeout is not None:
        kwargs["time_limit"] = args.timeout
    if args.incremental:
        kwargs["incremental"] = True
    if args.solver == "external" or (args.solver is None and args.smt_solver):
        return SolverBackend.external(args.smt_solver, **kwargs)
    if args.solver == "internal":
        return SolverBackend.internal(**kwargs)
    base = SolverBackend.from_env()
    return SolverBackend(base.kind, base.executable, base.args, **{"time_limit": base.time_limit, **kwargs})


def _budget(args) -> Optional[Budget]:
    if args.no_budget:
        return None
    if args.budget_shots is not None:
        return Budget.from_total_samples(args.budget_shots, args.base_shots)
    return Budget(
        sampling_frequency=args.freq if args.freq is not None else 1e6,
        runtime=args.runtime if args.runtime is not None else float(SECONDS_PER_DAY),
        base_shots=args.base_shots,
    )


# ---------------------------------------------------------------------------
# partition
# ---------------------------------------------------------------------------


def cmd_partition(args) -> int:
    stage = "parse"
    try:
        circuit = _load(args)
        stage = "encode"
        graph = build_cutting_graph(circuit)
        if args.max_qubits is not None:
            max_qubits = args.max_qubits
        elif args.reduce_factor is not None:
            max_qubits = max_qubits_for(circuit.num_qubits, args.reduce_factor, args.ancilla_frac)
        else:
            raise InvalidArgument("give --max-qubits or --reduce-factor")
        pins = {}
        spec = bridge_spec_from_text(args.gen) if args.gen and args.anchors else None
        if spec is not None:
            pins = bridge_anchors(spec, graph)
        problem = build_problem(
            circuit,
            args.partitions,
            max_qubits,
            budget=_budget(args),
            wire_only=args.wire_only,
            cc=not args.no_cc,
            ancilla=not args.no_ancilla,
            objective=Objective(args.objective),
            max_cuts=args.max_cuts,
            ancilla_fraction=args.ancilla_frac,
            pins=pins,
            graph=graph,
        )
        if args.dot_out:
            _write(args.dot_out, export_dot(graph))
        if args.smt2_out:
            try:
                _write(args.smt2_out, emit_smtlib2(encode(problem)))
            except InfeasibleTrivially as e:
                logger.warning(f"[encode] ⚠️ no SMT-LIB2 written, problem is trivially infeasible: {e}")
        stage = "solve"
        run = run_partition(
            circuit,
            problem,
            _backend(args),
            source=args.gen or args.input,
            include_timings=args.timings,
        )
    except QknitError as e:
        print(f"{e.stage or stage} failed: {e}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as e:
        print(f"{stage} failed: {e}", file=sys.stderr)
        return EXIT_ERROR

    report_json = run.report.to_json()
    if args.report:
        _write(args.report, report_json)
    else:
        print(report_json)

    solution = run.outcome.solution
    if solution is None:
        print(f"[partition] {run.status.value}: no feasible partitioning {run.outcome.message}".rstrip(), file=sys.stderr)
    else:
        print(
            f"[partition] {run.status.value}: {solution.num_cuts} cut(s), {len(solution.grouped)} grouped, "
            f"S={solution.overhead:.6g}, Q={list(solution.qubit_counts)}",
            file=sys.stderr,
        )
    return STATUS_EXIT[run.status]


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def cmd_verify(args) -> int:
    stage = "parse"
    try:
        circuit = _load(args)
        graph = build_cutting_graph(circuit)
        problem = PartitionProblem(graph=graph, num_partitions=2, max_qubits=circuit.num_qubits)
        with open(args.solution, "r", encoding="utf-8") as f:
            solution, coefficients = solution_from_json(problem, f.read())
        stage = "knit"
        ensemble = generate_subcircuits(circuit, graph, solution, cc=not args.no_cc, coefficients=coefficients)
        if args.ensemble_out:
            _write(args.ensemble_out, ensemble_to_json(ensemble))
        knitted = knit_expectation(ensemble, args.observable)
        stage = "simulate"
        direct = expectation(circuit, args.observable)
    except GroupedCutUnsupported as e:
        print(f"knit failed: {e}", file=sys.stderr)
        return EXIT_GROUPED
    except QknitError as e:
        print(f"{e.stage or stage} failed: {e}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as e:
        print(f"{stage} failed: {e}", file=sys.stderr)
        return EXIT_ERROR

    deviation = abs(knitted - direct)
    print(json.dumps({
        "observable": args.observable,
        "direct": direct,
        "knitted": knitted,
        "deviation": deviation,
        "entries": len(ensemble.entries),
        "normalization": ensemble.normalization,
        "widths": list(ensemble.widths),
    }, sort_keys=True, indent=2))
    if deviation > VERIFY_TOLERANCE:
        logger.error(f"[verify] knitted value deviates by {deviation:.3g}")
        return EXIT_MISMATCH
    return EXIT_OK


# ---------------------------------------------------------------------------
# budget
# ---------------------------------------------------------------------------


def cmd_budget(args) -> int:
    try:
        families = []
        for name in args.families.split(","):
            key = name.strip().lower()
            if key not in FAMILY_ALIASES:
                raise InvalidArgument(f"unknown family '{name}', expected one of {sorted(FAMILY_ALIASES)}")
            families.append(FAMILY_ALIASES[key])
        rows = budget_table(_floats(args.freq), _floats(args.runtime), families, args.base_shots)
    except QknitError as e:
        print(f"{e.stage} failed: {e}", file=sys.stderr)
        return EXIT_ERROR

    if args.format == "json":
        print(json.dumps(rows, sort_keys=True, indent=2))
    else:
        print(f"{'frequency_hz':>14} {'runtime_s':>10} {'family':>12} {'max_cuts':>8}")
        for row in rows:
            print(f"{row['frequency_hz']:>14g} {row['runtime_s']:>10g} {row['family']:>12} {row['max_cuts']:>8}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------


def cmd_bench(args) -> int:
    try:
        settings = {}
        if args.suite_file:
            instances, settings = load_suite_file(args.suite_file)
        else:
            instances = parse_suite(args.suite)
        factors = _floats(args.reduce_factors) if args.reduce_factors else settings.get("reduce_factors", [2.0])
        fracs = _floats(args.ancilla_fracs) if args.ancilla_fracs else settings.get("ancilla_fracs", [0.0])
        modes = [m.strip() for m in (args.modes or ",".join(settings.get("modes", MODES))).split(",") if m.strip()]
        for mode in modes:
            if mode not in MODES:
                raise InvalidArgument(f"unknown mode '{mode}', expected one of {MODES}")
        if args.no_budget or ("budget" in settings and settings["budget"] is None):
            budget = None
        else:
            budget = _budget(args)
        rows = run_bench(
            instances,
            [float(d) for d in factors],
            [float(f) for f in fracs],
            modes,
            budget=budget,
            backend=_backend(args),
            jobs=args.jobs,
            include_timings=args.timings,
        )
    except QknitError as e:
        print(f"{e.stage} failed: {e}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as e:
        print(f"bench failed: {e}", file=sys.stderr)
        return EXIT_ERROR

    text = rows_to_json(rows) if args.format == "json" else rows_to_csv(rows, args.timings)
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qknit", description="Optimal gate/wire cut partitioning of quantum circuits")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING (QKNIT_LOG_LEVEL)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("partition", help="find an optimal partitioning")
    _add_circuit_args(p)
    p.add_argument("--partitions", type=int, default=2)
    p.add_argument("--max-qubits", type=int, default=None)
    p.add_argument("--reduce-factor", type=float, default=None)
    p.add_argument("--ancilla-frac", type=float, default=0.0)
    _add_budget_args(p)
    p.add_argument("--wire-only", action="store_true")
    p.add_argument("--no-cc", action="store_true", help="no classical communication between partitions")
    p.add_argument("--no-ancilla", action="store_true")
    p.add_argument("--objective", choices=[o.value for o in Objective], default=Objective.MIN_SAMPLES.value)
    p.add_argument("--max-cuts", type=int, default=None)
    p.add_argument(
        "--anchors",
        action="store_true",
        help="pin bridge dense blocks to their side (the closed-form bridge cut counts assume it)",
    )
    _add_solver_args(p)
    p.add_argument("--smt2-out", default=None)
    p.add_argument("--dot-out", default=None)
    p.add_argument("--report", default=None)
    p.add_argument("--timings", action="store_true", help="include wall-clock timings in the report")
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("verify", help="knit a solution back together and compare with direct simulation")
    _add_circuit_args(p)
    p.add_argument("--solution", required=True, help="report or solution JSON from `partition`")
    p.add_argument("--observable", required=True, help="Pauli string, e.g. ZZZZ")
    p.add_argument("--no-cc", action="store_true", help="use sign-weighted instead of feed-forward terms")
    p.add_argument("--ensemble-out", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("budget", help="max cuts per sampling budget")
    p.add_argument("--freq", default="1e3,1e6,1e9", help="comma-separated Hz")
    p.add_argument("--runtime", default=str(SECONDS_PER_DAY), help="comma-separated seconds")
    p.add_argument("--families", default="bell_group,nine_pow,sixteen_pow")
    p.add_argument("--base-shots", type=int, default=DEFAULT_BASE_SHOTS)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(func=cmd_budget)

    p = sub.add_parser("bench", help="sweep a benchmark suite")
    p.add_argument("--suite", default=DEFAULT_SUITE, help="e.g. 'ghz:4-8;qaoa:4-5;hea:4-6'")
    p.add_argument("--suite-file", default=None, help="YAML suite definition")
    p.add_argument("--reduce-factors", default=None, help="comma-separated, default 2")
    p.add_argument("--ancilla-fracs", default=None, help="comma-separated, default 0")
    p.add_argument("--modes", default=None, help="combined,wire-only")
    _add_budget_args(p)
    _add_solver_args(p)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", default=None)
    p.add_argument("--timings", action="store_true")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
