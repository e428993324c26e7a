# qknit/tools/solvers/external.py
"""
External SMT-LIB2 solver over a child process.

One-shot mode pipes the whole problem to a fresh process per call; incremental mode
keeps one process alive and wraps every bound in push/pop. Either way a wall-clock
watchdog kills the child when the time limit passes.
"""

import logging
import queue
import re
import subprocess
import threading
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Union

from qknit.tools.errors import ModelParseError, SolverCrashed
from qknit.tools.result_cache import cache_solver_result
from qknit.tools.solvers.backend import SolverBackend

logger = logging.getLogger(__name__)

_TOKEN_RE = re.compile(r'\s*(?:(\()|(\))|("(?:[^"]|"")*")|(\|[^|]*\|)|([^\s()";|]+)|(;[^\n]*))')
DONE_MARKER = "qknit-done"

SExpr = Union[str, List["SExpr"]]


@dataclass
class ExternalResult:
    verdict: str  # sat | unsat | unknown | timeout
    model: Dict[str, Any] = field(default_factory=dict)
    elapsed: float = 0.0
    stdout: str = ""


def parse_sexprs(text: str) -> List[SExpr]:
    stack: List[List[SExpr]] = [[]]
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if not match or match.end() == pos:
            if text[pos:].strip():
                raise ModelParseError(f"unexpected solver output near {text[pos:pos + 40]!r}")
            break
        pos = match.end()
        open_, close, string, quoted, atom, _comment = match.groups()
        if open_:
            stack.append([])
        elif close:
            if len(stack) == 1:
                raise ModelParseError("unbalanced ')' in solver output")
            done = stack.pop()
            stack[-1].append(done)
        elif string or quoted or atom:
            stack[-1].append(string or quoted or atom)
    if len(stack) != 1:
        raise ModelParseError("unbalanced '(' in solver output")
    return stack[0]


def parse_value(expr: SExpr) -> Any:
    if isinstance(expr, str):
        if expr == "true":
            return True
        if expr == "false":
            return False
        if re.fullmatch(r"\d+", expr):
            return int(expr)
        raise ModelParseError(f"unsupported value {expr!r}")
    if len(expr) == 2 and expr[0] == "-":
        return -parse_value(expr[1])
    raise ModelParseError(f"unsupported value {expr!r}")


def parse_model(exprs: List[SExpr]) -> Dict[str, Any]:
    """Collect `((name value) ...)` responses of get-value (and define-fun from get-model)."""
    model: Dict[str, Any] = {}
    for expr in exprs:
        if not isinstance(expr, list):
            continue
        if expr and expr[0] == "error":
            raise ModelParseError(f"solver error: {expr[1] if len(expr) > 1 else expr}")
        for item in expr:
            if isinstance(item, list) and len(item) == 2 and isinstance(item[0], str):
                model[item[0].strip("|")] = parse_value(item[1])
            elif isinstance(item, list) and len(item) == 5 and item[0] == "define-fun":
                model[item[1].strip("|")] = parse_value(item[4])
    return model


def parse_solver_output(stdout: str) -> ExternalResult:
    """The first verdict line decides; an unsat stays unsat whatever errors follow it."""
    lines = stdout.splitlines()
    for i, line in enumerate(lines):
        word = line.strip()
        if not word:
            continue
        if word in ("sat", "unsat", "unknown"):
            if word != "sat":
                return ExternalResult(word, stdout=stdout)
            rest = "\n".join(lines[i + 1:]).replace(DONE_MARKER, "")
            return ExternalResult("sat", parse_model(parse_sexprs(rest)), stdout=stdout)
        break
    return ExternalResult("", stdout=stdout)


def _command(backend: SolverBackend) -> List[str]:
    return [backend.executable, *backend.args]


@cache_solver_result
def solve_external(smt_text: str, backend: SolverBackend) -> ExternalResult:
    """Run one SMT-LIB2 script through the solver. Returns verdict + model."""
    start = time.time()
    try:
        process = subprocess.Popen(
            _command(backend),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
        )
    except OSError as e:
        raise SolverCrashed(f"cannot start solver '{backend.executable}': {e}") from e

    try:
        stdout, stderr = process.communicate(smt_text, timeout=backend.time_limit)
    except subprocess.TimeoutExpired:
        process.kill()
        process.communicate()
        logger.warning(f"[solve] ⚠️ {backend.executable} timed out after {backend.time_limit:.1f}s")
        return ExternalResult("timeout", elapsed=time.time() - start)

    elapsed = time.time() - start
    result = parse_solver_output(stdout)
    result.elapsed = elapsed
    if not result.verdict:
        if process.returncode != 0:
            raise SolverCrashed(
                f"{backend.executable} exited with {process.returncode} without a verdict: {stderr.strip()[:200]}"
            )
        raise ModelParseError(f"no verdict in solver output: {stdout.strip()[:200]!r}")
    logger.debug(f"[solve] {backend.executable}: {result.verdict} in {elapsed:.3f}s")
    return result


class IncrementalSession:
    """
    One long-lived solver process. `load` sends declarations and assertions once;
    each `check` pushes a bound, asks check-sat/get-value and pops it again.
    """

    def __init__(self, backend: SolverBackend):
        self.backend = backend
        self.process: Optional[subprocess.Popen] = None
        self.lines: "queue.Queue[Optional[str]]" = queue.Queue()

    def __enter__(self) -> "IncrementalSession":
        try:
            self.process = subprocess.Popen(
                _command(self.backend),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
                bufsize=1,
            )
        except OSError as e:
            raise SolverCrashed(f"cannot start solver '{self.backend.executable}': {e}") from e
        threading.Thread(target=self._pump, daemon=True).start()
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _pump(self) -> None:
        for line in self.process.stdout:
            self.lines.put(line.rstrip("\n"))
        self.lines.put(None)

    def _send(self, text: str) -> None:
        try:
            self.process.stdin.write(text)
            self.process.stdin.flush()
        except (BrokenPipeError, OSError) as e:
            raise SolverCrashed(f"solver pipe closed: {e}") from e

    def load(self, smt_text: str) -> None:
        self._send(smt_text)

    def check(self, bound_assertion: Optional[str], symbols: List[str], time_limit: float) -> ExternalResult:
        start = time.time()
        commands = ["(push 1)"]
        if bound_assertion:
            commands.append(f"(assert {bound_assertion})")
        commands += ["(check-sat)", f"(get-value ({' '.join(symbols)}))", "(pop 1)", f'(echo "{DONE_MARKER}")']
        self._send("\n".join(commands) + "\n")

        collected: List[str] = []
        deadline = start + time_limit
        while True:
            remaining = deadline - time.time()
            if remaining <= 0:
                self.close()
                return ExternalResult("timeout", elapsed=time.time() - start)
            try:
                line = self.lines.get(timeout=remaining)
            except queue.Empty:
                continue
            if line is None:
                raise SolverCrashed(f"{self.backend.executable} exited during check-sat")
            if line.strip().strip('"') == DONE_MARKER:
                break
            collected.append(line)
        result = parse_solver_output("\n".join(collected))
        result.elapsed = time.time() - start
        if not result.verdict:
            raise ModelParseError(f"no verdict in solver output: {' '.join(collected)[:200]!r}")
        return result

    def close(self) -> None:
        if self.process and self.process.poll() is None:
            self.process.kill()
            self.process.wait()
