# qknit/pipeline.py
"""
End-to-end partitioning run: circuit → cutting graph → problem → solver → report.

`main.py` is a thin argparse layer over the functions here; tests and the bench
sweep call them directly.
"""

import json
import logging
import math
import os
import sys
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict

from qknit import __version__
from qknit.tools.circuit_ir import Circuit
from qknit.tools.cost_model import ALL_FAMILIES, WIRE_ONLY, Budget, group_cost
from qknit.tools.cutting_graph import CuttingGraph, build_cutting_graph, graph_summary
from qknit.tools.errors import InvalidArgument
from qknit.tools.knitting import cut_coefficients
from qknit.tools.partition_model import (
    Objective,
    PartitionProblem,
    solution_to_dict,
    validate_solution,
)
from qknit.tools.solvers import SolveOutcome, SolverBackend, SolveStatus, minimize

load_dotenv()

logger = logging.getLogger(__name__)

REPORT_SCHEMA_VERSION = 1
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def configure_logging(level: Optional[str] = None, log_file: Optional[str] = None) -> None:
    """Stderr handler plus an optional file handler (QKNIT_LOG_FILE)."""
    level_name = (level or os.getenv("QKNIT_LOG_LEVEL", "INFO")).upper()
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    log_file = log_file or os.getenv("QKNIT_LOG_FILE")
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(
        level=getattr(logging, level_name, logging.INFO),
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )


def max_qubits_for(width: int, reduce_factor: float, ancilla_frac: float = 0.0) -> int:
    """Device cap Q_max = ceil(width / d · (1 + f))."""
    if reduce_factor <= 0:
        raise InvalidArgument(f"reduce factor must be > 0, got {reduce_factor}")
    if ancilla_frac < 0:
        raise InvalidArgument(f"ancilla fraction must be >= 0, got {ancilla_frac}")
    # rounding absorbs float noise such as 10 / 2 * 1.3 = 6.500000000000001
    return max(1, math.ceil(round(width / reduce_factor * (1.0 + ancilla_frac), 9)))


def build_problem(
    circuit: Circuit,
    partitions: int,
    max_qubits: int,
    *,
    budget: Optional[Budget] = None,
    wire_only: bool = False,
    cc: bool = True,
    ancilla: bool = True,
    objective: Objective = Objective.MIN_SAMPLES,
    max_cuts: Optional[int] = None,
    ancilla_fraction: float = 0.0,
    pins: Optional[Mapping[int, int]] = None,
    graph: Optional[CuttingGraph] = None,
) -> PartitionProblem:
    graph = graph or build_cutting_graph(circuit)
    problem = PartitionProblem(
        graph=graph,
        num_partitions=partitions,
        max_qubits=max_qubits,
        budget=budget,
        allowed_cut_kinds=WIRE_ONLY if wire_only else ALL_FAMILIES,
        cc_available=cc,
        ancilla_available=ancilla,
        objective=objective,
        max_cuts=max_cuts,
        ancilla_fraction=ancilla_fraction,
        pins=dict(pins or {}),
    )
    problem.validate()
    return problem


class RunReport(BaseModel):
    model_config = ConfigDict(extra="forbid")

    schema_version: int = REPORT_SCHEMA_VERSION
    qknit_version: str = __version__
    source: str = ""
    input: Dict[str, Any]
    problem: Dict[str, Any]
    status: str
    optimal: bool = False
    backend: str = ""
    message: str = ""
    solution: Optional[Dict[str, Any]] = None
    cost: Optional[Dict[str, Any]] = None
    budget_check: Optional[Dict[str, Any]] = None
    validation: List[str] = []
    timings: Optional[Dict[str, float]] = None

    def to_json(self) -> str:
        return json.dumps(self.model_dump(), sort_keys=True, indent=2)


@dataclass
class PartitionRun:
    circuit: Circuit
    problem: PartitionProblem
    outcome: SolveOutcome
    report: RunReport
    timings: Dict[str, float] = field(default_factory=dict)

    @property
    def status(self) -> SolveStatus:
        return self.outcome.status


def problem_to_dict(problem: PartitionProblem) -> Dict[str, Any]:
    return {
        "partitions": problem.num_partitions,
        "max_qubits": problem.max_qubits,
        "allowed_cut_kinds": sorted(f.value for f in problem.allowed_cut_kinds),
        "cc_available": problem.cc_available,
        "ancilla_available": problem.ancilla_available,
        "objective": problem.objective.value,
        "max_cuts": problem.max_cuts,
        "ancilla_fraction": problem.ancilla_fraction,
        "pins": len(problem.pins),
        "budget": problem.budget.to_dict() if problem.budget else None,
    }


def cost_breakdown(problem: PartitionProblem, solution) -> Dict[str, Any]:
    edges = problem.graph.edges
    grouped = set(solution.grouped)
    individual = []
    for eid in solution.cuts:
        if eid in grouped:
            continue
        kind = problem.cut_kind(edges[eid])
        individual.append({"edge": eid, "family": kind.family.value, "gamma_sq": problem.gamma.gamma_sq(kind)})
    product = 1.0
    for item in individual:
        product *= item["gamma_sq"]
    return {
        "individual": individual,
        "individual_product": product,
        "grouped_count": len(grouped),
        "group_cost": group_cost(len(grouped)),
        "overhead": solution.overhead,
        "log10_overhead_fp": solution.overhead_fp,
    }


def run_partition(
    circuit: Circuit,
    problem: PartitionProblem,
    backend: Optional[SolverBackend] = None,
    *,
    source: str = "",
    include_timings: bool = False,
) -> PartitionRun:
    """Solve one problem and wrap the outcome in a report."""
    backend = backend or SolverBackend.from_env()
    start = time.time()
    logger.info(
        f"[partition] {source or 'circuit'}: {circuit.num_qubits} qubits, |P|={problem.num_partitions}, "
        f"Q_max={problem.max_qubits}, backend={backend.identity}"
    )
    outcome = minimize(problem, backend)
    timings = {"solve": outcome.elapsed, "total": time.time() - start}

    solution_dict = None
    cost = None
    budget_check = None
    problems: List[str] = []
    if outcome.solution is not None:
        solution = outcome.solution
        coefficients = cut_coefficients(circuit, problem.graph, solution, problem.cc_available)
        solution_dict = solution_to_dict(problem, solution, coefficients)
        cost = cost_breakdown(problem, solution)
        problems = validate_solution(problem, solution)
        if problems:
            logger.warning(f"[partition] ⚠️ solution failed validation: {problems}")
        limit = problem.budget_fp
        budget_check = {
            "max_overhead": problem.budget.max_overhead if problem.budget else None,
            "max_overhead_fp": limit,
            "within_budget": limit is None or solution.overhead_fp <= limit,
        }

    report = RunReport(
        source=source,
        input={
            "width": circuit.num_qubits,
            "gates": len(circuit.gates),
            "gate_counts": circuit.count_ops(),
            "graph": graph_summary(problem.graph),
        },
        problem=problem_to_dict(problem),
        status=outcome.status.value,
        optimal=outcome.status is SolveStatus.OPTIMAL,
        backend=outcome.backend,
        message=outcome.message,
        solution=solution_dict,
        cost=cost,
        budget_check=budget_check,
        validation=problems,
        timings=timings if include_timings else None,
    )
    return PartitionRun(circuit, problem, outcome, report, timings)
