# qknit/tools/solvers/minimize.py

import dataclasses
import logging
import time
from typing import Optional

from qknit.tools.errors import InfeasibleTrivially
from qknit.tools.partition_model import ConstraintSystem, PartitionProblem, PartitionSolution, decode, emit_smtlib2, encode
from qknit.tools.solvers.backend import SolveOutcome, SolverBackend, SolverKind, SolveStatus
from qknit.tools.solvers.exact import solve_exact
from qknit.tools.solvers.external import ExternalResult, IncrementalSession, solve_external

logger = logging.getLogger(__name__)


def minimize(problem: PartitionProblem, backend: Optional[SolverBackend] = None) -> SolveOutcome:
    """
    Optimal solution for the problem's objective.

    External backends run iterated bound tightening: solve, read the objective,
    assert `objective < found`, repeat until UNSAT. A timeout returns the best
    incumbent flagged non-optimal.
    """
    backend = backend or SolverBackend.from_env()
    if backend.kind is SolverKind.INTERNAL_EXACT:
        return solve_exact(problem, backend.time_limit)

    start = time.time()
    try:
        system = encode(problem)
    except InfeasibleTrivially as e:
        logger.info(f"[solve] infeasible before solving: {e}")
        return SolveOutcome(SolveStatus.UNSAT, backend=backend.identity, message=str(e))

    if backend.incremental:
        with IncrementalSession(backend) as session:
            session.load(emit_smtlib2(system, commands=False))
            return _tighten(system, backend, start, session)
    return _tighten(system, backend, start, None)


def _check(
    system: ConstraintSystem,
    backend: SolverBackend,
    bound: Optional[int],
    remaining: float,
    session: Optional[IncrementalSession],
) -> ExternalResult:
    if session is not None:
        assertion = system.bound(bound).to_smt() if bound is not None else None
        return session.check(assertion, system.symbols, remaining)
    limited = dataclasses.replace(backend, time_limit=remaining)
    return solve_external(emit_smtlib2(system, bound), limited)


def _tighten(
    system: ConstraintSystem,
    backend: SolverBackend,
    start: float,
    session: Optional[IncrementalSession],
) -> SolveOutcome:
    incumbent: Optional[PartitionSolution] = None
    bound: Optional[int] = None
    iterations = 0

    while True:
        remaining = backend.time_limit - (time.time() - start)
        if remaining <= 0:
            result = ExternalResult("timeout")
        else:
            result = _check(system, backend, bound, remaining, session)
        iterations += 1

        if result.verdict == "sat":
            incumbent = decode(system, result.model, backend=backend.identity, iterations=iterations)
            bound = incumbent.objective_value
            logger.info(f"[solve] iteration {iterations}: {system.objective_symbol}={bound}, tightening")
            continue

        elapsed = time.time() - start
        if result.verdict == "unsat":
            if incumbent is None:
                logger.info(f"[solve] UNSAT after {elapsed:.3f}s")
                return SolveOutcome(SolveStatus.UNSAT, iterations=iterations, elapsed=elapsed, backend=backend.identity)
            solution = incumbent.with_stats(optimal=True, solve_time=elapsed, iterations=iterations)
            logger.info(f"[solve] ✅ optimal {system.objective_symbol}={bound} after {iterations} calls ({elapsed:.3f}s)")
            return SolveOutcome(SolveStatus.OPTIMAL, solution, iterations, elapsed, backend.identity)

        # timeout or unknown: keep whatever we have
        logger.warning(f"[solve] ⚠️ solver answered {result.verdict} at iteration {iterations}")
        if incumbent is None:
            return SolveOutcome(
                SolveStatus.UNKNOWN, iterations=iterations, elapsed=elapsed, backend=backend.identity,
                message=f"solver answered {result.verdict} before finding a model",
            )
        solution = incumbent.with_stats(optimal=False, solve_time=elapsed, iterations=iterations)
        return SolveOutcome(SolveStatus.TIMEOUT, solution, iterations, elapsed, backend.identity)
