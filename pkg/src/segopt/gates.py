"""Gate representation for the H / X / CNOT / RZ gate set."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Tuple

TWO_PI = 2.0 * math.pi


class Kind(str, enum.Enum):
    H = "h"
    X = "x"
    CNOT = "cx"
    RZ = "rz"


ARITY = {Kind.H: 1, Kind.X: 1, Kind.CNOT: 2, Kind.RZ: 1}


def reduce_angle(theta: float) -> float:
    """Reduce an angle into [0, 2*pi)."""
    if not math.isfinite(theta):
        raise ValueError(f"angle must be finite, got {theta!r}")
    r = theta % TWO_PI
    # tiny negative inputs round up to exactly 2*pi
    if r >= TWO_PI:
        r = 0.0
    return r


@dataclass(frozen=True, slots=True)
class Gate:
    kind: Kind
    qubits: Tuple[int, ...]
    angle: Optional[float] = None

    def __post_init__(self):
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        qubits = tuple(int(q) for q in self.qubits)
        object.__setattr__(self, "qubits", qubits)
        if len(qubits) != ARITY[kind]:
            raise ValueError(f"{kind.name} takes {ARITY[kind]} qubit(s), got {qubits}")
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"repeated qubit operand in {qubits}")
        if any(q < 0 for q in qubits):
            raise ValueError(f"negative qubit index in {qubits}")
        if kind is Kind.RZ:
            if self.angle is None:
                raise ValueError("RZ requires an angle")
            object.__setattr__(self, "angle", reduce_angle(float(self.angle)))
        elif self.angle is not None:
            raise ValueError(f"{kind.name} takes no angle")

    def __repr__(self) -> str:
        ops = ",".join(map(str, self.qubits))
        if self.kind is Kind.RZ:
            return f"RZ({self.angle:.6g})@{ops}"
        return f"{self.kind.name}@{ops}"


def H(q: int) -> Gate:
    return Gate(Kind.H, (q,))


def X(q: int) -> Gate:
    return Gate(Kind.X, (q,))


def CNOT(control: int, target: int) -> Gate:
    return Gate(Kind.CNOT, (control, target))


def RZ(theta: float, q: int) -> Gate:
    return Gate(Kind.RZ, (q,), theta)


def inverse(g: Gate) -> Gate:
    if g.kind is Kind.RZ:
        return Gate(Kind.RZ, g.qubits, -g.angle)
    return g


def max_qubit(gates) -> int:
    """Largest qubit index used, or -1 for an empty list."""
    return max((q for g in gates for q in g.qubits), default=-1)
