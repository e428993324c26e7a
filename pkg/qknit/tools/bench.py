# qknit/tools/bench.py
"""
Benchmark sweeps: every suite instance × reduce factor × ancilla fraction × mode.

Modes:
    combined   gate and wire cuts, CC and ancillas available (grouping allowed)
    wire-only  wire cuts only, no CC (16 per cut, no grouping)

Rows come back in task order whatever the completion order, so two sweeps with
the same inputs produce identical output (timings are opt-in).
"""

import csv
import io
import json
import logging
import math
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor
from functools import partial
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import yaml

from qknit.pipeline import build_problem, max_qubits_for, run_partition
from qknit.tools.cost_model import Budget
from qknit.tools.cutting_graph import build_cutting_graph
from qknit.tools.errors import InvalidArgument, QknitError
from qknit.tools.generators import bridge_anchors, bridge_spec_from_text, generate_from_spec
from qknit.tools.solvers import SolverBackend
from qknit.tools.solvers.backend import SolverKind

logger = logging.getLogger(__name__)

MODES = ("combined", "wire-only")
DEFAULT_SUITE = "ghz:4-8;qaoa:4-5;hea:4-6"

# fixed parameters for range-style suite entries
SUITE_DEFAULTS = {
    "qaoa": "{n},0.5,1,1",
    "hea": "{n},1,1",
    "ghz": "{n}",
}

FIELDS = [
    "row",
    "instance",
    "mode",
    "reduce_factor",
    "ancilla_frac",
    "width",
    "partitions",
    "max_qubits",
    "status",
    "feasible",
    "overhead",
    "log10_overhead_fp",
    "cuts",
    "grouped",
    "Q",
    "infeasible_fraction",
    "overhead_ratio",
    "error",
]


@dataclass(frozen=True)
class BenchInstance:
    gen: str
    partitions: Optional[int] = None
    max_qubits: Optional[int] = None
    anchors: bool = False


def parse_suite(text: str) -> List[BenchInstance]:
    """
    `ghz:4-8;qaoa:6;hea:4-5` expands ranges with the suite defaults; a full generator
    string such as `qaoa:6,0.3,2,1` is taken as-is.
    """
    instances: List[BenchInstance] = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        name, _, params = chunk.partition(":")
        name = name.strip().lower()
        if "," in params or name not in SUITE_DEFAULTS:
            instances.append(BenchInstance(chunk, anchors=name == "bridge"))
            continue
        lo, _, hi = params.partition("-")
        try:
            sizes = range(int(lo), int(hi or lo) + 1)
        except ValueError as e:
            raise InvalidArgument(f"bad suite entry '{chunk}', expected NAME:LO-HI") from e
        for n in sizes:
            instances.append(BenchInstance(f"{name}:{SUITE_DEFAULTS[name].format(n=n)}"))
    if not instances:
        raise InvalidArgument("empty benchmark suite")
    return instances


def load_suite_file(path: str) -> Tuple[List[BenchInstance], Dict[str, Any]]:
    """YAML suite: `instances:` (strings or mappings with gen/partitions/max_qubits/anchors) plus sweep settings."""
    with open(path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    if not isinstance(data, dict) or "instances" not in data:
        raise InvalidArgument(f"{path}: expected a mapping with an 'instances' list")
    instances = []
    for item in data["instances"]:
        if isinstance(item, str):
            instances.extend(parse_suite(item))
        elif isinstance(item, dict) and "gen" in item:
            instances.append(
                BenchInstance(
                    gen=str(item["gen"]),
                    partitions=item.get("partitions"),
                    max_qubits=item.get("max_qubits"),
                    anchors=bool(item.get("anchors", str(item["gen"]).startswith("bridge"))),
                )
            )
        else:
            raise InvalidArgument(f"{path}: bad instance entry {item!r}")
    settings = {k: v for k, v in data.items() if k != "instances"}
    return instances, settings


def run_instance(
    instance: BenchInstance,
    mode: str,
    reduce_factor: float,
    ancilla_frac: float,
    budget: Optional[Budget],
    backend: SolverBackend,
    include_timings: bool = False,
) -> Dict[str, Any]:
    row: Dict[str, Any] = {
        "row": "instance",
        "instance": instance.gen,
        "mode": mode,
        "reduce_factor": reduce_factor,
        "ancilla_frac": ancilla_frac,
    }
    try:
        if mode not in MODES:
            raise InvalidArgument(f"unknown mode '{mode}', expected one of {MODES}")
        circuit = generate_from_spec(instance.gen)
        graph = build_cutting_graph(circuit)
        pins = {}
        spec = bridge_spec_from_text(instance.gen) if instance.anchors else None
        if spec is not None:
            pins = bridge_anchors(spec, graph)
        partitions = instance.partitions or max(2, math.ceil(reduce_factor))
        max_qubits = instance.max_qubits or max_qubits_for(circuit.num_qubits, reduce_factor, ancilla_frac)
        wire_only = mode == "wire-only"
        problem = build_problem(
            circuit,
            partitions,
            max_qubits,
            budget=budget,
            wire_only=wire_only,
            cc=not wire_only,
            ancilla=True,
            ancilla_fraction=ancilla_frac,
            pins=pins,
            graph=graph,
        )
        row.update(width=circuit.num_qubits, partitions=partitions, max_qubits=max_qubits)
        run = run_partition(circuit, problem, backend, source=instance.gen, include_timings=include_timings)
        solution = run.outcome.solution
        row["status"] = run.status.value
        row["feasible"] = solution is not None
        if solution is not None:
            row.update(
                overhead=solution.overhead,
                log10_overhead_fp=solution.overhead_fp,
                cuts=solution.num_cuts,
                grouped=len(solution.grouped),
                Q="|".join(str(q) for q in solution.qubit_counts),
            )
        if include_timings:
            row["time"] = round(run.timings["total"], 6)
    except QknitError as e:
        logger.warning(f"[bench] ⚠️ {instance.gen} ({mode}) failed in {e.stage}: {e}")
        row.update(status="error", feasible=False, error=f"{e.stage}: {e}")
    return row


def aggregate_rows(rows: Sequence[Dict[str, Any]]) -> List[Dict[str, Any]]:
    """Infeasible fraction per mode and mean combined/wire-only overhead ratio on common feasible points."""
    out = []
    for mode in MODES:
        mine = [r for r in rows if r.get("mode") == mode and r.get("row") == "instance"]
        if not mine:
            continue
        infeasible = sum(1 for r in mine if not r.get("feasible"))
        out.append({"row": "aggregate", "mode": mode, "infeasible_fraction": infeasible / len(mine)})

    def key(r):
        return r["instance"], r["reduce_factor"], r["ancilla_frac"]

    wire = {key(r): r for r in rows if r.get("mode") == "wire-only" and r.get("feasible")}
    ratios = [
        r["overhead"] / wire[key(r)]["overhead"]
        for r in rows
        if r.get("mode") == "combined" and r.get("feasible") and key(r) in wire
    ]
    if ratios:
        out.append({"row": "aggregate", "mode": "combined/wire-only", "overhead_ratio": sum(ratios) / len(ratios)})
    return out


def _run_task(
    task: Tuple[BenchInstance, str, float, float],
    budget: Optional[Budget],
    backend: SolverBackend,
    include_timings: bool,
) -> Dict[str, Any]:
    inst, mode, d, f = task
    return run_instance(inst, mode, d, f, budget, backend, include_timings)


def _executor(backend: SolverBackend, jobs: int) -> Executor:
    """Processes for the CPU-bound internal search, threads for external solver subprocesses."""
    if jobs > 1 and backend.kind is SolverKind.INTERNAL_EXACT:
        return ProcessPoolExecutor(max_workers=jobs)
    return ThreadPoolExecutor(max_workers=max(1, jobs))


def run_bench(
    instances: Sequence[BenchInstance],
    reduce_factors: Sequence[float] = (2.0,),
    ancilla_fracs: Sequence[float] = (0.0,),
    modes: Sequence[str] = MODES,
    budget: Optional[Budget] = None,
    backend: Optional[SolverBackend] = None,
    jobs: int = 1,
    include_timings: bool = False,
) -> List[Dict[str, Any]]:
    backend = backend or SolverBackend.from_env()
    tasks = [
        (inst, mode, d, f)
        for inst in instances
        for d in reduce_factors
        for f in ancilla_fracs
        for mode in modes
    ]
    logger.info(f"[bench] {len(tasks)} runs over {len(instances)} instances, jobs={jobs}")

    work = partial(_run_task, budget=budget, backend=backend, include_timings=include_timings)
    with _executor(backend, jobs) as pool:
        rows = list(pool.map(work, tasks))
    return rows + aggregate_rows(rows)


def rows_to_csv(rows: Iterable[Dict[str, Any]], include_timings: bool = False) -> str:
    fields = FIELDS + (["time"] if include_timings else [])
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=fields, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row.get(k, "") for k in fields})
    return buffer.getvalue()


def rows_to_json(rows: Iterable[Dict[str, Any]]) -> str:
    return json.dumps(list(rows), sort_keys=True, indent=2)
