"""Independent checks: dense-unitary equivalence and window-scan local optimality."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .gates import Gate, Kind
from .oracle import Oracle

DEFAULT_QUBIT_CAP = 12

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)


class QubitCapExceeded(ValueError):
    pass


def gate_matrix(g: Gate) -> np.ndarray:
    """2x2 (or 4x4 for CNOT, control as the high bit) matrix of one gate."""
    if g.kind is Kind.H:
        return _H.copy()
    if g.kind is Kind.X:
        return _X.copy()
    if g.kind is Kind.RZ:
        return np.diag([np.exp(-0.5j * g.angle), np.exp(0.5j * g.angle)])
    m = np.eye(4, dtype=complex)
    m[2:, 2:] = _X
    return m


def _apply(state: np.ndarray, g: Gate, num_qubits: int) -> None:
    """Left-multiply ``state`` (shape ``(2,)*n + (cols,)``) by the gate, in place.

    Qubit 0 is the leftmost tensor factor.
    """
    if g.kind is Kind.CNOT:
        c, t = g.qubits
        idx = [slice(None)] * (num_qubits + 1)
        idx[c] = 1
        sub = state[tuple(idx)]
        axis = t if t < c else t - 1
        sub[...] = np.flip(sub, axis=axis).copy()
        return
    q = g.qubits[0]
    lo = [slice(None)] * (num_qubits + 1)
    hi = [slice(None)] * (num_qubits + 1)
    lo[q], hi[q] = 0, 1
    lo, hi = tuple(lo), tuple(hi)
    if g.kind is Kind.X:
        a = state[lo].copy()
        state[lo] = state[hi]
        state[hi] = a
    elif g.kind is Kind.RZ:
        state[lo] *= np.exp(-0.5j * g.angle)
        state[hi] *= np.exp(0.5j * g.angle)
    else:
        a = state[lo].copy()
        b = state[hi]
        s = 1 / math.sqrt(2)
        state[lo] = (a + b) * s
        state[hi] = (a - b) * s


def circuit_unitary(num_qubits: int, gates: Sequence[Gate], cap: int = DEFAULT_QUBIT_CAP) -> np.ndarray:
    """Matrix of the circuit, gates applied in order (first gate acts first)."""
    if num_qubits > cap:
        raise QubitCapExceeded(f"{num_qubits} qubits exceeds the dense-simulation cap of {cap}")
    dim = 2 ** num_qubits
    u = np.eye(dim, dtype=complex)
    state = u.reshape((2,) * num_qubits + (dim,))
    for g in gates:
        if max(g.qubits) >= num_qubits:
            raise ValueError(f"{g!r} out of range for {num_qubits} qubits")
        _apply(state, g, num_qubits)
    return state.reshape(dim, dim)


def unitary_deviation(ua: np.ndarray, ub: np.ndarray) -> float:
    """Max-norm distance between ``ua`` and ``ub`` after removing a global phase."""
    k = np.unravel_index(np.argmax(np.abs(ub)), ub.shape)
    if abs(ua[k]) == 0:
        return float(np.max(np.abs(ua - ub)))
    phase = ua[k] / ub[k]
    phase /= abs(phase)
    return float(np.max(np.abs(ua - phase * ub)))


def check_equivalence(num_qubits: int, a: Sequence[Gate], b: Sequence[Gate], tol: float = 1e-9,
                      cap: int = DEFAULT_QUBIT_CAP) -> Tuple[bool, float]:
    dev = unitary_deviation(circuit_unitary(num_qubits, a, cap), circuit_unitary(num_qubits, b, cap))
    return dev <= tol, dev


@dataclass
class Violation:
    start_rank: int
    length: int
    reduced_to: int


@dataclass
class VerifyReport:
    windows_checked: int = 0
    violations: List[Violation] = field(default_factory=list)
    equivalent: Optional[bool] = None
    max_deviation: Optional[float] = None
    audits: Dict[str, object] = field(default_factory=dict)

    @property
    def locally_optimal(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        return {
            "locally_optimal": self.locally_optimal,
            "windows_checked": self.windows_checked,
            "violations": [vars(v) for v in self.violations],
            "equivalent": self.equivalent,
            "max_deviation": self.max_deviation,
            "audits": self.audits,
        }


def check_local_optimality(oracle: Oracle, num_qubits: int, gates: Sequence[Gate], omega: int,
                           report: Optional[VerifyReport] = None) -> VerifyReport:
    """Run the oracle on the window of ``omega`` gates starting at every rank.

    Windows near the end are shorter than ``omega`` (down to the last gate on
    its own), so the circuit's tail is scanned as well.
    """
    if omega < 1:
        raise ValueError("omega must be >= 1")
    gates = list(gates)
    report = report or VerifyReport()
    for start in range(len(gates)):
        window = gates[start:start + omega]
        out = oracle(num_qubits, window)
        report.windows_checked += 1
        if len(out) < len(window):
            report.violations.append(Violation(start, len(window), len(out)))
    return report


def verify(oracle: Oracle, num_qubits: int, original: Sequence[Gate], optimized: Sequence[Gate], omega: int,
           tol: float = 1e-9, cap: int = DEFAULT_QUBIT_CAP) -> VerifyReport:
    """Local optimality of ``optimized`` plus, when small enough, equivalence to ``original``."""
    report = check_local_optimality(oracle, num_qubits, optimized, omega)
    report.audits["gate_count_original"] = len(original)
    report.audits["gate_count_optimized"] = len(optimized)
    report.audits["size_monotone"] = len(optimized) <= len(original)
    if num_qubits <= cap:
        report.equivalent, report.max_deviation = check_equivalence(num_qubits, original, optimized, tol, cap)
    else:
        report.audits["equivalence_skipped"] = f"{num_qubits} qubits > cap {cap}"
    return report
