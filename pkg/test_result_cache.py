#!/usr/bin/env python3
"""
Tests for the solver verdict cache
"""

from dataclasses import dataclass, field, replace
from typing import Tuple

import pytest

from qknit.tools import result_cache
from qknit.tools.result_cache import cache_solver_result, clear_cache, compute_problem_hash, get_cache_stats


@dataclass(frozen=True)
class FakeBackend:
    executable: str = "z3"
    args: Tuple[str, ...] = ("-in",)
    time_limit: float = 10.0


@dataclass
class FakeResult:
    verdict: str
    model: dict = field(default_factory=dict)


@pytest.fixture(autouse=True)
def fresh_cache(monkeypatch):
    monkeypatch.setattr(result_cache, "CACHE_ENABLED", True)
    clear_cache()
    yield
    clear_cache()


def _counting_solver(verdict: str):
    calls = []

    @cache_solver_result
    def solve(smt_text, backend):
        calls.append(smt_text)
        return FakeResult(verdict, {"cost": 954243} if verdict == "sat" else {})

    return solve, calls


@pytest.mark.parametrize("verdict", ["sat", "unsat"])
def test_definitive_verdicts_are_cached(verdict):
    solve, calls = _counting_solver(verdict)
    first = solve("(check-sat)", FakeBackend())
    second = solve("(check-sat)", FakeBackend())
    assert first is second
    assert len(calls) == 1
    stats = get_cache_stats()
    assert stats["hits"] == 1
    assert stats["misses"] == 1
    assert stats["hit_rate_percent"] == 50.0
    assert stats["cache_size"] == 1


@pytest.mark.parametrize("verdict", ["timeout", "unknown", ""])
def test_inconclusive_verdicts_are_not_cached(verdict):
    solve, calls = _counting_solver(verdict)
    solve("(check-sat)", FakeBackend())
    solve("(check-sat)", FakeBackend())
    assert len(calls) == 2
    assert get_cache_stats()["cache_size"] == 0


def test_solver_identity_is_part_of_the_key():
    solve, calls = _counting_solver("sat")
    solve("(check-sat)", FakeBackend())
    solve("(check-sat)", FakeBackend(executable="cvc5"))
    solve("(check-sat)", FakeBackend(args=("-in", "-smt2")))
    solve("(assert true)(check-sat)", FakeBackend())
    assert len(calls) == 4


def test_shrinking_time_limit_still_hits():
    # minimize re-runs the solver with whatever time is left
    solve, calls = _counting_solver("unsat")
    backend = FakeBackend(time_limit=60.0)
    solve("(check-sat)", backend)
    solve("(check-sat)", replace(backend, time_limit=42.5))
    solve("(check-sat)", replace(backend, time_limit=0.5))
    assert len(calls) == 1
    assert get_cache_stats()["hits"] == 2


def test_disabled_cache_always_calls_through(monkeypatch):
    monkeypatch.setattr(result_cache, "CACHE_ENABLED", False)
    solve, calls = _counting_solver("sat")
    solve("(check-sat)", FakeBackend())
    solve("(check-sat)", FakeBackend())
    assert len(calls) == 2
    assert get_cache_stats()["total_requests"] == 0


def test_clear_cache_resets_counters():
    solve, calls = _counting_solver("unsat")
    solve("(check-sat)", FakeBackend())
    solve("(check-sat)", FakeBackend())
    clear_cache()
    stats = get_cache_stats()
    assert stats["hits"] == 0
    assert stats["misses"] == 0
    assert stats["cache_size"] == 0
    solve("(check-sat)", FakeBackend())
    assert len(calls) == 2


def test_compute_problem_hash():
    base = compute_problem_hash("(check-sat)", executable="z3", time_limit=10)
    assert base == compute_problem_hash("(check-sat)", time_limit=10, executable="z3")
    assert len(base) == 64
    assert base != compute_problem_hash("(check-sat) ", executable="z3", time_limit=10)
    assert base != compute_problem_hash("(check-sat)", executable="z3", time_limit=11)


if __name__ == "__main__":
    pytest.main([__file__])
