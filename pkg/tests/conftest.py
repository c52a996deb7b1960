import math
import random
from collections import defaultdict

import pytest
from hypothesis import strategies as st

from segopt.gates import CNOT, RZ, Gate, H, Kind, X

ACCEPTANCE_LINES = []


def record_criterion(number, passed, detail):
    """``passed`` is True, False, or None for a criterion that could not run."""
    status = "SKIP" if passed is None else "PASS" if passed else "FAIL"
    line = f"[criterion {number:>2}] {status}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def reference_select(fingers, circ, omega):
    """Direct transcription: group by rank // 2omega, first per group, larger parity class."""
    groups = defaultdict(list)
    for f in fingers:
        groups[circ.before(f) // (2 * omega)].append(f)
    even = sorted(min(fs) for g, fs in groups.items() if g % 2 == 0)
    odd = sorted(min(fs) for g, fs in groups.items() if g % 2 == 1)
    chosen = even if len(even) > len(odd) else odd
    return chosen, sorted(set(fingers) - set(chosen))


@st.composite
def gates_strategy(draw, num_qubits, max_size=200, min_size=0, angles=None):
    n = draw(st.integers(min_size, max_size))
    out = []
    for _ in range(n):
        kinds = [Kind.H, Kind.X, Kind.RZ] + ([Kind.CNOT] if num_qubits > 1 else [])
        kind = draw(st.sampled_from(kinds))
        if kind is Kind.CNOT:
            c = draw(st.integers(0, num_qubits - 1))
            t = draw(st.integers(0, num_qubits - 2))
            out.append(CNOT(c, t if t < c else t + 1))
            continue
        q = draw(st.integers(0, num_qubits - 1))
        if kind is Kind.RZ:
            if angles is None:
                theta = draw(st.floats(-20, 20, allow_nan=False, allow_infinity=False))
            else:
                theta = draw(angles)
            out.append(RZ(theta, q))
        else:
            out.append(Gate(kind, (q,)))
    return out


pi_multiples = st.integers(1, 7).map(lambda k: k * math.pi / 4)


@pytest.fixture
def five_gate_example():
    # H, X, CNOT, X, H: the two X gates on the CNOT target cancel through it
    return [H(0), X(2), CNOT(1, 2), X(2), H(1)]


@pytest.fixture
def rng():
    return random.Random(12345)
