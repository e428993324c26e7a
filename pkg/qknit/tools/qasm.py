"""
OpenQASM 2 subset reader/writer.

Only what the cutting pipeline can consume is accepted: one qreg, at most one
creg, the gates h/x/z/s/sdg/rz/cx/cz/swap/crz, measure and reset. Anything else
(custom gate definitions, ccx, barriers, broadcasts) is a ParseError naming the
offending token and line.
"""

import logging
import math
import re
from typing import List, Optional, Tuple

from qknit.tools.circuit_ir import Circuit, Gate, GateKind
from qknit.tools.errors import InvalidArgument, ParseError

logger = logging.getLogger(__name__)

QASM_GATES = {
    "h": GateKind.H,
    "x": GateKind.X,
    "z": GateKind.Z,
    "s": GateKind.S,
    "sdg": GateKind.SDG,
    "rz": GateKind.RZ,
    "cx": GateKind.CNOT,
    "cz": GateKind.CZ,
    "swap": GateKind.SWAP,
    "crz": GateKind.CRZ,
}
QASM_NAMES = {kind: name for name, kind in QASM_GATES.items()}

_STATEMENT_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*(?:\((.*)\))?\s*(.*)$", re.DOTALL)
_OPERAND_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*\[\s*(\d+)\s*\]$")
_EXPR_TOKEN_RE = re.compile(r"\s*(?:(\d+\.\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?|\d+(?:[eE][-+]?\d+)?)|(pi)|(.))")


class _AngleExpr:
    """Recursive-descent evaluator for angle arguments: numbers, pi, + - * / and parentheses."""

    def __init__(self, text: str, line: int):
        self.line = line
        self.tokens: List[Tuple[str, str]] = []
        for number, pi, other in _EXPR_TOKEN_RE.findall(text):
            if number:
                self.tokens.append(("num", number))
            elif pi:
                self.tokens.append(("num", "pi"))
            elif other.strip():
                self.tokens.append(("op", other))
        self.pos = 0

    def _peek(self) -> Optional[Tuple[str, str]]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _take(self) -> Tuple[str, str]:
        tok = self._peek()
        if tok is None:
            raise ParseError("unexpected end of angle expression", token="", line=self.line)
        self.pos += 1
        return tok

    def evaluate(self) -> float:
        value = self._sum()
        if self._peek() is not None:
            raise ParseError("trailing input in angle expression", token=self._peek()[1], line=self.line)
        return value

    def _sum(self) -> float:
        value = self._product()
        while self._peek() in (("op", "+"), ("op", "-")):
            op = self._take()[1]
            rhs = self._product()
            value = value + rhs if op == "+" else value - rhs
        return value

    def _product(self) -> float:
        value = self._unary()
        while self._peek() in (("op", "*"), ("op", "/")):
            op = self._take()[1]
            rhs = self._unary()
            if op == "/" and rhs == 0:
                raise ParseError("division by zero in angle expression", token=op, line=self.line)
            value = value * rhs if op == "*" else value / rhs
        return value

    def _unary(self) -> float:
        if self._peek() == ("op", "-"):
            self._take()
            return -self._unary()
        if self._peek() == ("op", "+"):
            self._take()
            return self._unary()
        kind, text = self._take()
        if kind == "num":
            return math.pi if text == "pi" else float(text)
        if text == "(":
            value = self._sum()
            if self._take() != ("op", ")"):
                raise ParseError("missing ')' in angle expression", token=text, line=self.line)
            return value
        raise ParseError("bad angle expression", token=text, line=self.line)


def _statements(text: str) -> List[Tuple[int, str]]:
    """Split source into (line, statement) pairs with comments removed."""
    cleaned = re.sub(r"//[^\n]*", "", text)
    out: List[Tuple[int, str]] = []
    line = 1
    buf = ""
    start_line = None
    for ch in cleaned:
        if ch == ";":
            if buf.strip():
                out.append((start_line or line, buf.strip()))
            buf, start_line = "", None
            continue
        if start_line is None and not ch.isspace():
            start_line = line
        if ch == "\n":
            line += 1
        buf += ch
    if buf.strip():
        raise ParseError("missing ';' at end of statement", token=buf.strip().split()[0], line=start_line or line)
    return out


def parse_qasm2_subset(text: str) -> Circuit:
    statements = _statements(text)
    if not statements or not re.fullmatch(r"OPENQASM\s+2(\.0)?", statements[0][1]):
        line, token = (statements[0][0], statements[0][1].split()[0]) if statements else (1, "")
        raise ParseError("expected 'OPENQASM 2.0' header", token=token, line=line)

    qreg: Optional[Tuple[str, int]] = None
    creg: Optional[Tuple[str, int]] = None
    pending: List[Tuple[int, str, GateKind, List[Tuple[str, int]], Optional[float], Optional[Tuple[str, int]]]] = []

    for line, stmt in statements[1:]:
        if stmt.startswith("include"):
            if '"qelib1.inc"' not in stmt:
                raise ParseError("only qelib1.inc may be included", token=stmt, line=line)
            continue
        match = _STATEMENT_RE.match(stmt)
        if not match:
            raise ParseError("unrecognized statement", token=stmt.split()[0], line=line)
        word, params, rest = match.group(1), match.group(2), match.group(3).strip()

        if word in ("qreg", "creg"):
            decl = _OPERAND_RE.match(rest)
            if not decl:
                raise ParseError(f"bad {word} declaration", token=rest, line=line)
            if word == "qreg":
                if qreg is not None:
                    raise ParseError("only one qreg is supported", token=decl.group(1), line=line)
                qreg = (decl.group(1), int(decl.group(2)))
            else:
                if creg is not None:
                    raise ParseError("only one creg is supported", token=decl.group(1), line=line)
                creg = (decl.group(1), int(decl.group(2)))
            continue

        if word == "measure":
            parts = [p.strip() for p in rest.split("->")]
            if len(parts) != 2:
                raise ParseError("measure needs 'q[i] -> c[j]'", token=rest, line=line)
            pending.append((line, word, GateKind.MEASURE_Z, [_operand(parts[0], line)], None, _operand(parts[1], line)))
            continue
        if word == "reset":
            pending.append((line, word, GateKind.RESET, [_operand(rest, line)], None, None))
            continue
        if word not in QASM_GATES:
            raise ParseError(f"unsupported statement '{word}'", token=word, line=line)

        kind = QASM_GATES[word]
        angle = None
        if kind.has_angle:
            if params is None:
                raise ParseError(f"{word} needs an angle", token=word, line=line)
            angle = _AngleExpr(params, line).evaluate()
        elif params is not None:
            raise ParseError(f"{word} takes no parameters", token=word, line=line)
        operands = [_operand(part.strip(), line) for part in rest.split(",")]
        if len(operands) != kind.num_qubits:
            raise ParseError(f"{word} expects {kind.num_qubits} operand(s)", token=word, line=line)
        pending.append((line, word, kind, operands, angle, None))

    if qreg is None:
        raise ParseError("no qreg declared", token="", line=statements[-1][0])

    gates: List[Gate] = []
    for line, word, kind, operands, angle, target in pending:
        qubits = []
        for name, index in operands:
            if name != qreg[0]:
                raise ParseError(f"unknown quantum register '{name}'", token=name, line=line)
            if index >= qreg[1]:
                raise ParseError(f"index {index} out of range for {name}[{qreg[1]}]", token=word, line=line)
            qubits.append(index)
        clbit = None
        if target is not None:
            if creg is None or target[0] != creg[0] or target[1] >= creg[1]:
                raise ParseError("measure target is not a declared classical bit", token=target[0], line=line)
            clbit = target[1]
        try:
            gates.append(Gate(kind, tuple(qubits), angle, clbit))
        except InvalidArgument as e:
            raise ParseError(str(e), token=word, line=line) from e

    circuit = Circuit(qreg[1], tuple(gates), creg[1] if creg else 0)
    logger.debug(f"[qasm] parsed {len(gates)} gates on {circuit.num_qubits} qubits")
    return circuit


def _operand(text: str, line: int) -> Tuple[str, int]:
    match = _OPERAND_RE.match(text)
    if not match:
        raise ParseError("expected an indexed register operand like q[0]", token=text, line=line)
    return match.group(1), int(match.group(2))


def to_qasm2(circuit: Circuit) -> str:
    """Write the subset back out; conditioned gates have no single-bit form in OpenQASM 2."""
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{circuit.num_qubits}];"]
    if circuit.num_clbits:
        lines.append(f"creg c[{circuit.num_clbits}];")
    for g in circuit.gates:
        if g.condition is not None:
            raise InvalidArgument("classically conditioned gates cannot be written as OpenQASM 2")
        operands = ",".join(f"q[{q}]" for q in g.qubits)
        if g.kind is GateKind.MEASURE_Z:
            lines.append(f"measure q[{g.qubits[0]}] -> c[{g.clbit}];")
        elif g.kind is GateKind.RESET:
            lines.append(f"reset {operands};")
        elif g.kind.has_angle:
            lines.append(f"{QASM_NAMES[g.kind]}({g.angle!r}) {operands};")
        else:
            lines.append(f"{QASM_NAMES[g.kind]} {operands};")
    return "\n".join(lines) + "\n"
