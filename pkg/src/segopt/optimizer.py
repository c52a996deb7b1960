"""Finger-driven parallel round engine.

Fingers are slot indices marking places where some window may still shrink.
Each round picks a set of fingers that are at least ``2 * omega`` live gates
apart, runs the oracle on the ``2 * omega`` window around each of them (the
only parallel step), writes all improvements back in one batch, and replaces
every improved finger by two fingers at the edges of its window. The loop
stops when no fingers remain, at which point no window of ``omega`` gates can
be shrunk by the oracle.
"""

from __future__ import annotations

import logging
import math
import os
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

from .circuit import Circuit
from .gates import Gate
from .oracle import Oracle
from .parallel import EXECUTORS, UNCHANGED, classify, make_runner, timed_call

log = logging.getLogger(__name__)

class InvariantViolation(AssertionError):
    pass


@dataclass
class OptimizerConfig:
    omega: int = 200
    max_rounds: Optional[int] = None
    threads: Optional[int] = None
    collect_stats: bool = True
    # exhaustive per-round tracking-invariant scan; expensive, for tests
    check_invariants: bool = False
    executor: str = "auto"

    def __post_init__(self):
        if self.omega < 1:
            raise ValueError("omega must be >= 1")
        if self.max_rounds is not None and self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")
        if self.threads is not None and self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.executor not in EXECUTORS:
            raise ValueError(f"executor must be one of {EXECUTORS}")


@dataclass
class RoundStats:
    round: int
    fingers_total: int
    fingers_selected: int
    oracle_calls: int
    improved: int
    timeouts: int
    gates_removed: int
    gates_remaining: int
    potential_before: int
    potential: int
    min_selected_gap: Optional[int]
    wall_seconds: float
    oracle_seconds: float
    cumulative_oracle_seconds: float

    def as_row(self) -> dict:
        return asdict(self)


@dataclass
class OptimizeResult:
    gates: List[Gate]
    num_qubits: int
    omega: int
    initial_gates: int
    rounds: List[RoundStats] = field(default_factory=list)
    num_rounds: int = 0
    oracle_calls: int = 0
    converged: bool = True
    wall_seconds: float = 0.0
    oracle_seconds: float = 0.0

    @property
    def reduction_pct(self) -> float:
        return 100.0 * (self.initial_gates - len(self.gates)) / self.initial_gates

    @property
    def oracle_fraction(self) -> float:
        """Summed oracle time over wall time (can exceed 1 with several workers)."""
        return self.oracle_seconds / self.wall_seconds if self.wall_seconds > 0 else 0.0

    @property
    def oracle_call_bound(self) -> int:
        return potential_bound(self.initial_gates, self.omega)


def potential(num_fingers: int, num_gates: int) -> int:
    return num_fingers + 2 * num_gates


def potential_bound(n: int, omega: int) -> int:
    """Initial potential, hence an upper bound on total oracle calls."""
    return math.ceil(n / omega) + 2 * n


def initial_fingers(n: int, omega: int) -> List[int]:
    return list(range(0, n, omega))


def merge_dedup(a: Sequence[int], b: Sequence[int]) -> List[int]:
    """Sorted union of two strictly increasing lists."""
    for xs in (a, b):
        for k in range(1, len(xs)):
            if xs[k - 1] >= xs[k]:
                raise ValueError("merge_dedup inputs must be strictly increasing")
    out: List[int] = []
    i = j = 0
    while i < len(a) and j < len(b):
        x, y = a[i], b[j]
        if x < y:
            out.append(x)
            i += 1
        elif y < x:
            out.append(y)
            j += 1
        else:
            out.append(x)
            i += 1
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return out


def normalize_fingers(circ: Circuit, fingers: Sequence[int]) -> List[int]:
    """Move fingers off tombstones onto the next live gate and deduplicate.

    Any window of live gates that spans a tombstoned slot also spans the next
    live gate, so coverage is never lost. Fingers past the last live gate
    cover nothing and are dropped. Afterwards no two fingers share a rank.
    """
    out: List[int] = []
    n = circ.size
    cells = circ.slots
    for f in fingers:
        if cells[f] is None:
            r = circ.before(f)
            if r >= n:
                continue
            f = circ.index_of(r)
        if not out or out[-1] < f:
            out.append(f)
    return out


def _select(fingers: Sequence[int], circ: Circuit, omega: int):
    width = 2 * omega
    even: List[int] = []
    odd: List[int] = []
    even_ranks: List[int] = []
    odd_ranks: List[int] = []
    prev = -1
    for f in fingers:
        r = circ.before(f)
        group = r // width
        if group > prev:
            if group % 2 == 0:
                even.append(f)
                even_ranks.append(r)
            else:
                odd.append(f)
                odd_ranks.append(r)
        prev = group
    if len(even) > len(odd):
        chosen, ranks = even, even_ranks
    else:
        chosen, ranks = odd, odd_ranks
    picked = set(chosen)
    remaining = [f for f in fingers if f not in picked]
    return chosen, remaining, ranks


def select_fingers(fingers: Sequence[int], circ: Circuit, omega: int) -> Tuple[List[int], List[int]]:
    """Split fingers into a non-interfering selection and the rest.

    Fingers are bucketed into groups of ``2 * omega`` live gates by rank; the
    first finger of each group is a candidate, and whichever parity class
    (even or odd groups) is larger wins. Ties go to the odd groups.
    """
    selected, remaining, _ = _select(fingers, circ, omega)
    return selected, remaining


# ---------------------------------------------------------------------------
# rounds


@dataclass
class _PhaseResult:
    new_fingers: List[int]
    calls: int = 0
    improved: int = 0
    timeouts: int = 0
    oracle_seconds: float = 0.0


def optimize_selected(circ: Circuit, selected: Sequence[int], oracle: Oracle, omega: int,
                      runner=None) -> _PhaseResult:
    """Optimize the windows around already-selected, non-interfering fingers.

    Read-only until every oracle call has returned; then all replacements go
    into the circuit as one substitute batch. Returns the boundary fingers of
    the improved windows, sorted.
    """
    centers = [circ.before(f) for f in selected]
    if runner is None:
        results = []
        for c in centers:
            seg = circ.extract_segment(c, omega)
            opt, secs = timed_call(oracle, circ.num_qubits, seg.gates)
            results.append((classify(oracle, circ, seg, opt), secs))
    else:
        results = runner.run(circ, centers, omega)
    phase = _PhaseResult([], calls=len(centers))
    updates = []
    for edit, secs in results:
        phase.oracle_seconds += secs
        if edit is None:
            phase.timeouts += 1
            continue
        if edit is UNCHANGED:
            continue
        phase.improved += 1
        for f in (edit.left, edit.right):
            if not phase.new_fingers or phase.new_fingers[-1] < f:
                phase.new_fingers.append(f)
        updates.extend(edit.writes)
    if updates:
        # windows are slot-disjoint, so the batch has no duplicates
        circ.substitute(updates, validate=False)
        if runner is not None:
            runner.commit(updates)
    return phase


def _round(circ: Circuit, fingers: List[int], oracle: Oracle, omega: int, runner,
           round_no: int, cumulative: float) -> Tuple[List[int], RoundStats]:
    t0 = time.perf_counter()
    size_before = circ.size
    l_before = potential(len(fingers), size_before)
    selected, remaining, ranks = _select(fingers, circ, omega)

    if len(selected) * 4 * omega < len(fingers):
        raise InvariantViolation(
            f"round {round_no}: selected {len(selected)} of {len(fingers)} fingers, below 1/(4*omega)")
    gaps = [b - a for a, b in zip(ranks, ranks[1:])]
    min_gap = min(gaps) if gaps else None
    if min_gap is not None and min_gap < 2 * omega:
        raise InvariantViolation(f"round {round_no}: selected fingers only {min_gap} gates apart")

    phase = optimize_selected(circ, selected, oracle, omega, runner)
    new_fingers = normalize_fingers(circ, merge_dedup(remaining, phase.new_fingers))

    l_after = potential(len(new_fingers), circ.size)
    if l_before - l_after < phase.calls:
        raise InvariantViolation(
            f"round {round_no}: potential fell by {l_before - l_after} over {phase.calls} oracle calls")

    stats = RoundStats(
        round=round_no,
        fingers_total=len(fingers),
        fingers_selected=len(selected),
        oracle_calls=phase.calls,
        improved=phase.improved,
        timeouts=phase.timeouts,
        gates_removed=size_before - circ.size,
        gates_remaining=circ.size,
        potential_before=l_before,
        potential=l_after,
        min_selected_gap=min_gap,
        wall_seconds=time.perf_counter() - t0,
        oracle_seconds=phase.oracle_seconds,
        cumulative_oracle_seconds=cumulative + phase.oracle_seconds,
    )
    return new_fingers, stats


def optimize_segments(circ: Circuit, fingers: Sequence[int], oracle: Oracle, omega: int,
                      runner=None) -> List[int]:
    """One round: select, optimize the selected windows, merge fingers."""
    new_fingers, _ = _round(circ, list(fingers), oracle, omega, runner, 0, 0.0)
    return new_fingers


def untracked_windows(circ: Circuit, fingers: Sequence[int], oracle: Oracle, omega: int) -> List[int]:
    """Start ranks of oracle-reducible ``omega``-windows that contain no finger.

    A window covering slots ``i..j`` contains finger ``f`` when ``i <= f <= j``.
    Empty result means the tracking invariant holds.
    """
    import bisect

    n = circ.size
    if n == 0:
        return []
    width = min(omega, n)
    slots = [i for i, g in enumerate(circ.slots) if g is not None]
    gates = circ.gates()
    fingers = sorted(fingers)
    bad = []
    for start in range(0, n - width + 1):
        window = gates[start:start + width]
        if len(oracle(circ.num_qubits, window)) >= width:
            continue
        lo, hi = slots[start], slots[start + width - 1]
        k = bisect.bisect_left(fingers, lo)
        if k == len(fingers) or fingers[k] > hi:
            bad.append(start)
    return bad


def optimize_circuit(oracle: Oracle, gates: Sequence[Gate], num_qubits: int, cfg: Optional[OptimizerConfig] = None,
          on_round: Optional[Callable[[RoundStats, Circuit, List[int]], None]] = None) -> OptimizeResult:
    """Optimize ``gates`` until every ``cfg.omega``-window is oracle-optimal.

    ``on_round`` is called after each round with its stats, the circuit and
    the new finger set (useful for snapshots; do not mutate).
    """
    cfg = cfg or OptimizerConfig()
    gates = list(gates)
    if not gates:
        raise ValueError("cannot optimize an empty circuit")
    omega = cfg.omega
    n = len(gates)
    t_start = time.perf_counter()
    fingers = initial_fingers(n, omega)
    circ = Circuit(gates, num_qubits)
    result = OptimizeResult(gates=[], num_qubits=num_qubits, omega=omega, initial_gates=n)
    cumulative = 0.0
    with make_runner(oracle, circ, cfg.threads, cfg.executor) as runner:
        while fingers:
            if cfg.max_rounds is not None and result.num_rounds >= cfg.max_rounds:
                result.converged = False
                break
            result.num_rounds += 1
            fingers, stats = _round(circ, fingers, oracle, omega, runner, result.num_rounds, cumulative)
            cumulative = stats.cumulative_oracle_seconds
            result.oracle_calls += stats.oracle_calls
            if cfg.collect_stats:
                result.rounds.append(stats)
            if cfg.check_invariants:
                bad = untracked_windows(circ, fingers, oracle, omega)
                if bad:
                    raise InvariantViolation(f"round {stats.round}: untracked reducible windows at ranks {bad[:10]}")
            if on_round is not None:
                on_round(stats, circ, fingers)
    if result.oracle_calls > potential_bound(n, omega):
        raise InvariantViolation(
            f"{result.oracle_calls} oracle calls exceed the potential bound {potential_bound(n, omega)}")
    result.gates = circ.gates()
    result.oracle_seconds = cumulative
    result.wall_seconds = time.perf_counter() - t_start
    return result


def default_threads() -> int:
    return os.cpu_count() or 1
