# qknit/tools/solvers/exact.py
"""
Exact branch-and-bound over vertex-to-partition labelings.

Vertices are labeled in id order and labels are tried in ascending order, so the
first optimum met is the lexicographically smallest one. Without pins, labels follow
restricted growth (a vertex may open at most the next unused partition), which
removes every relabeling of the same partitioning. Edges are decided when their later
endpoint is labeled; forbidden edges force that endpoint onto its partner's label.

At each leaf the simultaneous group is chosen by enumerating how many grouped cuts
fall between each pair of partitions, subject to the qubit cap.
"""

import itertools
import logging
import os
import time
from typing import Dict, List, Optional, Sequence, Tuple

from dotenv import load_dotenv

from qknit.tools.cost_model import group_cost, to_fixed_point
from qknit.tools.errors import InconsistentModel, InfeasibleTrivially, TooLarge
from qknit.tools.partition_model import Objective, PartitionProblem, build_solution
from qknit.tools.solvers.backend import SolveOutcome, SolveStatus

load_dotenv()

logger = logging.getLogger(__name__)

EXACT_MAX_FREE_VERTICES = int(os.getenv("QKNIT_EXACT_MAX_FREE_VERTICES", "30"))

SEARCH_CONFIG = {
    # nodes between two deadline checks
    "clock_interval": 2048,
}

BACKEND_NAME = "internal-exact"


class _Search:
    def __init__(self, problem: PartitionProblem, deadline: Optional[float]):
        self.problem = problem
        self.graph = problem.graph
        self.n = len(self.graph.vertices)
        self.P = problem.num_partitions
        self.cap = problem.max_qubits
        self.deadline = deadline
        self.budget_fp = problem.budget_fp
        self.max_cuts = problem.max_cuts
        self.objective = problem.objective
        self.pins = dict(problem.pins)
        self.grouping = problem.grouping_allowed

        weights = problem.edge_weights()
        self.weights = weights
        self.eligible = set(problem.groupable_edges())
        self.first = self.graph.first_vertices
        # edges decided once their later endpoint is labeled
        self.decided_at: List[List[Tuple[int, int, Optional[int]]]] = [[] for _ in range(self.n)]
        for e in self.graph.edges:
            self.decided_at[e.head].append((e.id, e.tail, weights[e.id]))
        self.wire_heads = {e.id for e in self.graph.wire_edges}
        self.group_fp = [to_fixed_point(group_cost(k)) for k in range(len(self.eligible) + 1)]

        self.labels = [-1] * self.n
        self.q = [0] * self.P
        self.members = [0] * self.P
        self.cuts: List[int] = []
        self.plain_sum = 0  # cut weights that can never be grouped
        self.eligible_weights: List[int] = []

        self.best_key: Optional[Tuple] = None
        self.best: Optional[Tuple[Tuple[int, ...], Tuple[int, ...], int]] = None
        self.nodes = 0
        self.timed_out = False

    # -- bounds ------------------------------------------------------------

    def _relaxed_cost(self) -> int:
        """Cheapest cost of the current cut set ignoring qubit caps; monotone in the cut set."""
        ws = self.eligible_weights
        if not ws:
            return self.plain_sum
        if not self.grouping:
            return self.plain_sum + sum(ws)
        ordered = sorted(ws, reverse=True)
        total = sum(ordered)
        best = total
        running = 0
        for k, w in enumerate(ordered, start=1):
            running += w
            best = min(best, total - running + self.group_fp[k])
        return self.plain_sum + best

    def _pruned(self, remaining: int) -> bool:
        if max(self.q) > self.cap:
            return True
        if self.max_cuts is not None and len(self.cuts) > self.max_cuts:
            return True
        if self.problem.forbid_empty and sum(1 for m in self.members if m == 0) > remaining:
            return True
        lower = self._relaxed_cost()
        if self.budget_fp is not None and lower > self.budget_fp:
            return True
        if self.best_key is not None:
            if self.objective is Objective.MIN_SAMPLES and lower >= self.best_key[0]:
                return True
            if self.objective is Objective.MIN_MAX_QUBITS and max(self.q) >= self.best_key[0]:
                return True
        return False

    # -- search ------------------------------------------------------------

    def _candidates(self, v: int) -> Sequence[int]:
        forced = {self.labels[tail] for _, tail, w in self.decided_at[v] if w is None}
        if v in self.pins:
            forced.add(self.pins[v])
        if len(forced) > 1:
            return ()
        if forced:
            label = forced.pop()
            if not self.pins and label > max(self.labels[:v], default=-1) + 1:
                return ()
            return (label,)
        if self.pins:
            return range(self.P)
        opened = max(self.labels[:v], default=-1) + 1
        return range(min(opened + 1, self.P))

    def _assign(self, v: int, p: int) -> List[int]:
        """Label v and apply its consequences; returns the newly cut edge ids."""
        self.labels[v] = p
        self.members[p] += 1
        if v in self.first:
            self.q[p] += 1
        new_cuts = []
        for eid, tail, w in self.decided_at[v]:
            if self.labels[tail] == p:
                continue
            new_cuts.append(eid)
            self.cuts.append(eid)
            if eid in self.eligible:
                self.eligible_weights.append(w)
            else:
                self.plain_sum += w
            if eid in self.wire_heads:
                self.q[p] += 1
        return new_cuts

    def _unassign(self, v: int, p: int, new_cuts: List[int]) -> None:
        for eid in reversed(new_cuts):
            self.cuts.pop()
            if eid in self.eligible:
                self.eligible_weights.pop()
            else:
                self.plain_sum -= self.weights[eid]
            if eid in self.wire_heads:
                self.q[p] -= 1
        if v in self.first:
            self.q[p] -= 1
        self.members[p] -= 1
        self.labels[v] = -1

    def _dfs(self, v: int) -> None:
        if self.timed_out:
            return
        self.nodes += 1
        if self.deadline is not None and self.nodes % SEARCH_CONFIG["clock_interval"] == 0:
            if time.time() > self.deadline:
                self.timed_out = True
                return
        if v == self.n:
            self._leaf()
            return
        for p in self._candidates(v):
            new_cuts = self._assign(v, p)
            if not self._pruned(self.n - v - 1):
                self._dfs(v + 1)
            self._unassign(v, p, new_cuts)
            if self.timed_out:
                return

    def _leaf(self) -> None:
        if self.problem.forbid_empty and 0 in self.members:
            return
        choice = self._choose_group()
        if choice is None:
            return
        key, grouped = choice
        if self.best_key is None or key[0] < self.best_key[0]:
            self.best_key = key
            self.best = (tuple(self.labels), grouped, key[1] if self.objective is Objective.MIN_MAX_QUBITS else key[0])

    def _choose_group(self) -> Optional[Tuple[Tuple, Tuple[int, ...]]]:
        """Best group for the current leaf: (sort key, grouped edge ids) or None if nothing fits."""
        by_pair: Dict[Tuple[int, int], List[Tuple[int, int]]] = {}
        if self.grouping:
            edges = self.graph.edges
            for eid in self.cuts:
                if eid in self.eligible:
                    e = edges[eid]
                    pair = tuple(sorted((self.labels[e.tail], self.labels[e.head])))
                    by_pair.setdefault(pair, []).append((-self.weights[eid], eid))
        pairs = sorted(by_pair)
        for pair in pairs:
            by_pair[pair].sort()
        eligible_total = sum(self.eligible_weights)

        best: Optional[Tuple[Tuple, Tuple[int, ...]]] = None
        for xs in itertools.product(*(range(len(by_pair[pair]) + 1) for pair in pairs)):
            q = list(self.q)
            grouped: List[int] = []
            grouped_weight = 0
            for pair, x in zip(pairs, xs):
                q[pair[0]] += x
                q[pair[1]] += x
                for neg_w, eid in by_pair[pair][:x]:
                    grouped.append(eid)
                    grouped_weight -= neg_w
            if max(q) > self.cap:
                continue
            k = len(grouped)
            cost = self.plain_sum + eligible_total - grouped_weight + self.group_fp[k]
            if self.budget_fp is not None and cost > self.budget_fp:
                continue
            if self.objective is Objective.MIN_SAMPLES:
                key = (cost, k, xs)
            else:
                key = (max(q), cost, k, xs)
            if best is None or key < best[0]:
                best = (key, tuple(sorted(grouped)))
        return best

    def run(self) -> None:
        if self.n:
            self._dfs(0)


def solve_exact(problem: PartitionProblem, time_limit: Optional[float] = None) -> SolveOutcome:
    """Provably optimal solution under the fixed-point cost, or UNSAT."""
    start = time.time()
    problem.validate()
    try:
        problem.check_trivial_feasibility()
    except InfeasibleTrivially as e:
        logger.info(f"[solve] infeasible before search: {e}")
        return SolveOutcome(SolveStatus.UNSAT, backend=BACKEND_NAME, message=str(e))

    free = len(problem.graph.vertices) - len(problem.pins)
    if free > EXACT_MAX_FREE_VERTICES:
        raise TooLarge(
            f"{free} unpinned vertices exceed the exact search limit of {EXACT_MAX_FREE_VERTICES} "
            f"(QKNIT_EXACT_MAX_FREE_VERTICES); use the external solver"
        )

    search = _Search(problem, start + time_limit if time_limit else None)
    search.run()
    elapsed = time.time() - start

    if search.best is None:
        status = SolveStatus.UNKNOWN if search.timed_out else SolveStatus.UNSAT
        logger.info(f"[solve] exact: {status.value} after {search.nodes} nodes ({elapsed:.3f}s)")
        return SolveOutcome(status, iterations=search.nodes, elapsed=elapsed, backend=BACKEND_NAME)

    labels, grouped, cost = search.best
    optimal = not search.timed_out
    solution = build_solution(
        problem,
        labels,
        grouped,
        optimal=optimal,
        backend=BACKEND_NAME,
        solve_time=elapsed,
        iterations=search.nodes,
    )
    if solution.overhead_fp != cost:
        raise InconsistentModel(f"search cost {cost} != recomputed {solution.overhead_fp}")
    status = SolveStatus.OPTIMAL if optimal else SolveStatus.TIMEOUT
    logger.info(
        f"[solve] exact: {status.value} cuts={solution.num_cuts} S={solution.overhead:.6g} "
        f"Q={list(solution.qubit_counts)} after {search.nodes} nodes ({elapsed:.3f}s)"
    )
    return SolveOutcome(status, solution, iterations=search.nodes, elapsed=elapsed, backend=BACKEND_NAME)
