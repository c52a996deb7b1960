"""OpenQASM 2.0 reader/writer for the H, X, CX, RZ subset.

Accepted input: optional ``OPENQASM 2.0;`` header and ``include`` lines, one
``qreg``, optional ``creg`` declarations (ignored), and ``h``, ``x``, ``cx``,
``rz(angle)`` statements. Angles are signed decimals or pi-multiples such as
``pi/4``, ``-3*pi/2`` or ``0.5*pi``. Anything else is rejected with the line
and column of the offending statement.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import List

from .gates import Gate, Kind

__all__ = ["QasmError", "ParsedProgram", "parse_qasm", "serialize_qasm", "read_qasm", "write_qasm"]


class QasmError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f"{line}:{column}: " if line else ""
        super().__init__(where + message)


@dataclass
class ParsedProgram:
    num_qubits: int
    gates: List[Gate] = field(default_factory=list)

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError("num_qubits must be positive")
        for g in self.gates:
            if max(g.qubits) >= self.num_qubits:
                raise ValueError(f"{g!r} out of range for {self.num_qubits} qubits")


_NUM = r"(?:\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
_ANGLE_RE = re.compile(
    rf"^\s*(?P<sign>[+-])?\s*(?:"
    rf"(?P<lit>{_NUM})"
    rf"|(?:(?P<coef>{_NUM})\s*\*\s*)?pi(?:\s*/\s*(?P<den>{_NUM}))?"
    rf")\s*$"
)
_IDENT = r"[A-Za-z_][A-Za-z0-9_]*"
_HEADER_RE = re.compile(r"^OPENQASM\s+(?P<ver>[0-9.]+)$")
_INCLUDE_RE = re.compile(r'^include\s+"[^"]*"$')
_REG_RE = re.compile(rf"^(?P<kw>qreg|creg)\s+(?P<name>{_IDENT})\s*\[\s*(?P<size>\d+)\s*\]$")
_GATE_RE = re.compile(rf"^(?P<name>{_IDENT})\s*(?:\((?P<param>[^()]*)\))?\s*(?P<args>.*)$", re.S)
_ARG_RE = re.compile(rf"^\s*(?P<reg>{_IDENT})\s*\[\s*(?P<idx>\d+)\s*\]\s*$")

_GATE_NAMES = {"h": Kind.H, "x": Kind.X, "cx": Kind.CNOT, "rz": Kind.RZ}


def parse_angle(expr: str) -> float:
    m = _ANGLE_RE.match(expr)
    if m is None:
        raise ValueError(f"unsupported angle expression {expr!r}")
    if m["lit"] is not None:
        value = float(m["lit"])
    else:
        value = math.pi
        if m["coef"] is not None:
            value = float(m["coef"]) * math.pi
        if m["den"] is not None:
            den = float(m["den"])
            if den == 0:
                raise ValueError("division by zero in angle")
            value = value / den
    return -value if m["sign"] == "-" else value


def _strip_comments(text: str) -> str:
    # keep offsets stable so reported columns match the source
    return re.sub(r"//[^\n]*", lambda m: " " * len(m.group()), text)


_STMT_RE = re.compile(r"[^;]*;")


def _position(text: str, offset: int):
    line = text.count("\n", 0, offset) + 1
    return line, offset - (text.rfind("\n", 0, offset) + 1) + 1


def _statements(text: str):
    """Yield (statement, offset of its first non-blank character)."""
    pos = 0
    for m in _STMT_RE.finditer(text):
        raw = m.group()[:-1]
        stripped = raw.lstrip()
        yield stripped.rstrip(), m.start() + len(raw) - len(stripped)
        pos = m.end()
    tail = text[pos:]
    if tail.strip():
        off = pos + len(tail) - len(tail.lstrip())
        raise QasmError("missing ';' at end of statement", *_position(text, off))


def parse_qasm(text: str) -> ParsedProgram:
    text = _strip_comments(text.replace("\r\n", "\n"))
    reg_name = None
    num_qubits = 0
    gates: List[Gate] = []
    for i, (stmt, offset) in enumerate(_statements(text)):
        if not stmt:
            raise QasmError("empty statement", *_position(text, offset))
        m = _HEADER_RE.match(stmt)
        if m:
            if i != 0:
                raise QasmError("OPENQASM header must come first", *_position(text, offset))
            if m["ver"] not in ("2.0", "2"):
                raise QasmError(f"unsupported OpenQASM version {m['ver']}", *_position(text, offset))
            continue
        if _INCLUDE_RE.match(stmt):
            continue
        m = _REG_RE.match(stmt)
        if m:
            if m["kw"] == "creg":
                continue
            if reg_name is not None:
                raise QasmError("multiple qreg declarations", *_position(text, offset))
            reg_name = m["name"]
            num_qubits = int(m["size"])
            if num_qubits < 1:
                raise QasmError("qreg size must be positive", *_position(text, offset))
            continue
        m = _GATE_RE.match(stmt)
        if m is None:
            raise QasmError(f"syntax error in {stmt!r}", *_position(text, offset))
        name = m["name"]
        if name not in _GATE_NAMES:
            raise QasmError(f"unsupported gate or statement {name!r}", *_position(text, offset))
        if reg_name is None:
            raise QasmError("gate before qreg declaration", *_position(text, offset))
        kind = _GATE_NAMES[name]
        angle = None
        if kind is Kind.RZ:
            if m["param"] is None:
                raise QasmError("rz requires an angle", *_position(text, offset))
            try:
                angle = parse_angle(m["param"])
            except ValueError as e:
                raise QasmError(str(e), *_position(text, offset)) from None
        elif m["param"] is not None:
            raise QasmError(f"{name} takes no parameter", *_position(text, offset))
        qubits = []
        for arg in m["args"].split(","):
            am = _ARG_RE.match(arg)
            if am is None:
                raise QasmError(f"bad operand {arg.strip()!r}", *_position(text, offset))
            if am["reg"] != reg_name:
                raise QasmError(f"unknown register {am['reg']!r}", *_position(text, offset))
            idx = int(am["idx"])
            if idx >= num_qubits:
                raise QasmError(f"qubit index {idx} out of range for qreg of size {num_qubits}", *_position(text, offset))
            qubits.append(idx)
        try:
            gates.append(Gate(kind, tuple(qubits), angle))
        except ValueError as e:
            raise QasmError(str(e), *_position(text, offset)) from None
    if reg_name is None:
        raise QasmError("no qreg declaration")
    return ParsedProgram(num_qubits, gates)


def format_angle(theta: float) -> str:
    # 17 significant digits round-trip every binary64 value
    return format(theta, ".17g")


def serialize_qasm(program: ParsedProgram) -> str:
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{program.num_qubits}];"]
    for g in program.gates:
        if g.kind is Kind.RZ:
            lines.append(f"rz({format_angle(g.angle)}) q[{g.qubits[0]}];")
        elif g.kind is Kind.CNOT:
            lines.append(f"cx q[{g.qubits[0]}],q[{g.qubits[1]}];")
        else:
            lines.append(f"{g.kind.value} q[{g.qubits[0]}];")
    return "\n".join(lines) + "\n"


def read_qasm(path) -> ParsedProgram:
    with open(path, encoding="utf-8", newline="") as f:
        return parse_qasm(f.read())


def write_qasm(path, program: ParsedProgram) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(serialize_qasm(program))
