"""Seeded random circuits for tests and scaling runs."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import List

from .gates import Gate, Kind, inverse

_KINDS = (Kind.H, Kind.X, Kind.CNOT, Kind.RZ)
_WEIGHTS = (0.25, 0.2, 0.3, 0.25)


def random_gate(rng: random.Random, num_qubits: int, angle_steps: int = 8) -> Gate:
    kind = rng.choices(_KINDS, _WEIGHTS)[0] if num_qubits > 1 else rng.choice((Kind.H, Kind.X, Kind.RZ))
    if kind is Kind.CNOT:
        return Gate(kind, tuple(rng.sample(range(num_qubits), 2)))
    q = rng.randrange(num_qubits)
    if kind is Kind.RZ:
        return Gate(kind, (q,), 2 * math.pi * rng.randrange(1, angle_steps) / angle_steps)
    return Gate(kind, (q,))


def random_gates(rng: random.Random, num_qubits: int, n: int, angle_steps: int = 8) -> List[Gate]:
    return [random_gate(rng, num_qubits, angle_steps) for _ in range(n)]


@dataclass
class SynthParams:
    """Generator knobs; together with the seed they fully determine a circuit.

    ``density`` is the chance, per emitted gate, of planting a mirrored block
    ``B B^-1`` of up to ``max_block`` gates. Long blocks cancel from the
    middle outwards, which needs several rounds once they span more than one
    window.
    """

    num_qubits: int = 8
    num_gates: int = 10_000
    density: float = 0.05
    max_block: int = 16
    angle_steps: int = 8
    seed: int = 0

    def __post_init__(self):
        if self.num_qubits < 1 or self.num_gates < 1:
            raise ValueError("num_qubits and num_gates must be positive")
        if not 0.0 <= self.density <= 1.0:
            raise ValueError("density must lie in [0, 1]")
        if self.max_block < 1:
            raise ValueError("max_block must be positive")


def synthetic_circuit(params: SynthParams) -> List[Gate]:
    rng = random.Random(params.seed)
    out: List[Gate] = []
    n = params.num_gates
    while len(out) < n:
        if rng.random() < params.density:
            block = random_gates(rng, params.num_qubits, rng.randint(1, params.max_block), params.angle_steps)
            out.extend(block)
            out.extend(inverse(g) for g in reversed(block))
        else:
            out.append(random_gate(rng, params.num_qubits, params.angle_steps))
    return out[:n]
