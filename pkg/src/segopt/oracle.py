"""Segment optimizers ("oracles") used by the round engine.

An oracle takes a short gate list and returns an equivalent one that is no
longer than its input. Two implementations ship:

* :class:`BuiltinOracle`, a small deterministic rewrite engine
  (inverse-pair cancellation, RZ fusion, and a few commutation moves);
* :class:`ExternalOracle`, which shells out to another optimizer and talks
  OpenQASM 2.0 over stdin/stdout or temporary files.
"""

from __future__ import annotations

import logging
import os
import random
import shlex
import subprocess
import tempfile
import threading
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

from .gates import TWO_PI, Gate, Kind
from .qasm import ParsedProgram, QasmError, parse_qasm, serialize_qasm

log = logging.getLogger(__name__)

ZERO_ANGLE_TOL = 1e-12

_H, _X, _CNOT, _RZ = Kind.H, Kind.X, Kind.CNOT, Kind.RZ


class OracleError(RuntimeError):
    pass


class OracleTimeout(OracleError):
    pass


class Oracle:
    """Base class; subclasses implement :meth:`optimize_segment`."""

    name = "oracle"
    #: safe to ship to worker processes (pure and picklable)
    process_safe = False

    def optimize_segment(self, num_qubits: int, gates: Sequence[Gate]) -> List[Gate]:
        raise NotImplementedError

    def cost(self, gates: Sequence[Gate]) -> int:
        return len(gates)

    def __call__(self, num_qubits: int, gates: Sequence[Gate]) -> List[Gate]:
        return self.optimize_segment(num_qubits, gates)

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"


def _check_operands(num_qubits: int, gates: Sequence[Gate]) -> None:
    for g in gates:
        if max(g.qubits) >= num_qubits:
            raise ValueError(f"{g!r} out of range for {num_qubits} qubits")


# ---------------------------------------------------------------------------
# builtin rewrite engine


def _is_zero_angle(theta: float) -> bool:
    # angles are stored in [0, 2pi); RZ(2pi) is the identity up to phase
    return theta <= ZERO_ANGLE_TOL or TWO_PI - theta <= ZERO_ANGLE_TOL


def _commutes(a: Gate, b: Gate) -> bool:
    """Commutation moves for two non-identical gates that share a qubit."""
    if a.kind is _CNOT:
        if b.kind is _CNOT:
            return False
        cx, other = a, b
    elif b.kind is _CNOT:
        cx, other = b, a
    else:
        return False
    q = other.qubits[0]
    return (other.kind is _X and q == cx.qubits[1]) or (other.kind is _RZ and q == cx.qubits[0])


def _find_partner(out: List[Optional[Gate]], stacks: dict, g: Gate) -> Optional[int]:
    """Position of the closest earlier gate that ``g`` can reach and rewrite with.

    Walks backwards over gates sharing a qubit with ``g``; every gate passed on
    the way must commute with ``g``.
    """
    kind, qubits = g.kind, g.qubits
    if kind is _CNOT:
        a = stacks.get(qubits[0], ())
        b = stacks.get(qubits[1], ())
        i, j = len(a) - 1, len(b) - 1
        while i >= 0 or j >= 0:
            pa = a[i] if i >= 0 else -1
            pb = b[j] if j >= 0 else -1
            if pa >= pb:
                p = pa
                i -= 1
                if pa == pb:
                    j -= 1
            else:
                p = pb
                j -= 1
            h = out[p]
            if h is None:
                continue
            if h.kind is _CNOT and h.qubits == qubits:
                return p
            if not _commutes(g, h):
                return None
        return None
    st = stacks.get(qubits[0])
    if not st:
        return None
    while st and out[st[-1]] is None:
        st.pop()
    for k in range(len(st) - 1, -1, -1):
        p = st[k]
        h = out[p]
        if h is None:
            continue
        if h.kind is kind and h.qubits == qubits:
            return p
        if not _commutes(g, h):
            return None
    return None


def _rewrite_pass(gates: Sequence[Gate]) -> Tuple[List[Gate], bool]:
    out: List[Optional[Gate]] = []
    stacks: dict = {}
    changed = False
    for g in gates:
        if g.kind is _RZ and _is_zero_angle(g.angle):
            changed = True
            continue
        p = _find_partner(out, stacks, g)
        if p is not None:
            changed = True
            if g.kind is _RZ:
                h = out[p]
                merged = Gate(_RZ, h.qubits, h.angle + g.angle)
                out[p] = None if _is_zero_angle(merged.angle) else merged
            else:
                out[p] = None
            continue
        p = len(out)
        out.append(g)
        for q in g.qubits:
            st = stacks.get(q)
            if st is None:
                stacks[q] = [p]
            else:
                st.append(p)
    return [g for g in out if g is not None], changed


def builtin_optimize(num_qubits: int, seg: Sequence[Gate]) -> List[Gate]:
    """Rewrite ``seg`` to a fixpoint of the builtin rules.

    Each left-to-right pass moves every incoming gate backwards through gates
    it commutes with (disjoint qubits, X across a CNOT target, RZ across a
    CNOT control) and rewrites it against the first identical gate it meets:
    H/X/CNOT pairs cancel, RZ pairs fuse, and RZ angles within 1e-12 of zero
    (mod 2pi) disappear. Passes repeat until one changes nothing, so feeding
    the output back in returns it unchanged.
    """
    _check_operands(num_qubits, seg)
    gates = list(seg)
    changed = True
    while changed:
        gates, changed = _rewrite_pass(gates)
    return gates


class BuiltinOracle(Oracle):
    name = "builtin"
    process_safe = True

    def optimize_segment(self, num_qubits, gates):
        return builtin_optimize(num_qubits, gates)


class IdentityOracle(Oracle):
    name = "identity"
    process_safe = True

    def optimize_segment(self, num_qubits, gates):
        _check_operands(num_qubits, gates)
        return list(gates)


# ---------------------------------------------------------------------------
# external optimizer over the QASM protocol

TRANSPORTS = ("stdin_stdout", "temp_files")


@dataclass
class ExternalOracleConfig:
    """How to run an external optimizer.

    ``command`` is an argv list or a shell-style string. With the
    ``temp_files`` transport the placeholders ``{input}`` and ``{output}`` are
    replaced by file paths; if neither appears, both paths are appended.
    """

    command: Union[str, Sequence[str]]
    cwd: Optional[str] = None
    timeout: float = 60.0
    transport: str = "stdin_stdout"
    max_concurrency: Optional[int] = None

    def __post_init__(self):
        if isinstance(self.command, str):
            self.command = shlex.split(self.command)
        self.command = list(self.command)
        if not self.command:
            raise ValueError("empty oracle command")
        if not self.timeout > 0:
            raise ValueError("timeout must be positive")
        if self.transport not in TRANSPORTS:
            raise ValueError(f"transport must be one of {TRANSPORTS}")
        if self.max_concurrency is not None and self.max_concurrency < 1:
            raise ValueError("max_concurrency must be positive")


def _argv(cfg: ExternalOracleConfig, in_path: str, out_path: str) -> List[str]:
    if any("{input}" in a or "{output}" in a for a in cfg.command):
        return [a.replace("{input}", in_path).replace("{output}", out_path) for a in cfg.command]
    return cfg.command + [in_path, out_path]


def _run(cfg: ExternalOracleConfig, argv: List[str], stdin: Optional[str]) -> str:
    try:
        proc = subprocess.run(
            argv,
            input=stdin,
            capture_output=True,
            text=True,
            cwd=cfg.cwd,
            timeout=cfg.timeout,
        )
    except subprocess.TimeoutExpired:
        raise OracleTimeout(f"oracle {argv[0]!r} timed out after {cfg.timeout}s") from None
    except OSError as e:
        raise OracleError(f"cannot start oracle {argv[0]!r}: {e}") from None
    if proc.returncode != 0:
        tail = proc.stderr.strip()[-500:]
        raise OracleError(f"oracle {argv[0]!r} exited with status {proc.returncode}: {tail}")
    return proc.stdout


def external_optimize(cfg: ExternalOracleConfig, num_qubits: int, seg: Sequence[Gate]) -> List[Gate]:
    seg = list(seg)
    if not seg:
        return []
    _check_operands(num_qubits, seg)
    request = serialize_qasm(ParsedProgram(num_qubits, seg))
    if cfg.transport == "stdin_stdout":
        reply = _run(cfg, list(cfg.command), request)
    else:
        with tempfile.TemporaryDirectory(prefix="segopt-") as tmp:
            in_path = os.path.join(tmp, "in.qasm")
            out_path = os.path.join(tmp, "out.qasm")
            with open(in_path, "w", encoding="utf-8", newline="\n") as f:
                f.write(request)
            _run(cfg, _argv(cfg, in_path, out_path), None)
            try:
                with open(out_path, encoding="utf-8") as f:
                    reply = f.read()
            except OSError as e:
                raise OracleError(f"oracle produced no output file: {e}") from None
    try:
        program = parse_qasm(reply)
    except QasmError as e:
        raise OracleError(f"unparseable oracle reply: {e}") from None
    if program.num_qubits > num_qubits:
        raise OracleError(f"oracle reply declares {program.num_qubits} qubits, request had {num_qubits}")
    return program.gates


class ExternalOracle(Oracle):
    name = "exec"

    def __init__(self, cfg: ExternalOracleConfig):
        self.cfg = cfg
        self._slots = threading.BoundedSemaphore(cfg.max_concurrency) if cfg.max_concurrency else None

    def optimize_segment(self, num_qubits, gates):
        if self._slots is None:
            return external_optimize(self.cfg, num_qubits, gates)
        with self._slots:
            return external_optimize(self.cfg, num_qubits, gates)

    def __repr__(self):
        return f"ExternalOracle({' '.join(self.cfg.command)!r})"


def make_oracle(name: str, *, timeout: float = 60.0, transport: str = "stdin_stdout",
                max_concurrency: Optional[int] = None) -> Oracle:
    """Build an oracle from a CLI-style name: ``builtin``, ``identity`` or ``exec:CMD``."""
    if name == "builtin":
        return BuiltinOracle()
    if name == "identity":
        return IdentityOracle()
    if name.startswith("exec:"):
        cmd = name[len("exec:"):].strip()
        return ExternalOracle(ExternalOracleConfig(cmd, timeout=timeout, transport=transport,
                                                   max_concurrency=max_concurrency))
    raise ValueError(f"unknown oracle name {name!r} (expected builtin, identity or exec:CMD)")


# ---------------------------------------------------------------------------
# empirical well-behavedness


@dataclass
class Counterexample:
    segment: List[Gate]
    output: List[Gate]
    window: Tuple[int, int]
    reduced_to: int


@dataclass
class WellBehavedReport:
    trials: int
    windows_checked: int = 0
    counterexamples: List[Counterexample] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.counterexamples


def is_well_behaved_sample(oracle: Oracle, trials: int, seed: int, *, num_qubits: int = 6,
                           length: int = 16, max_counterexamples: int = 10) -> WellBehavedReport:
    """Optimize random segments once, then re-run the oracle on every
    contiguous window of each output and record any window it still shrinks.
    """
    from .synth import random_gates

    if trials <= 0:
        raise ValueError("trials must be positive")
    rng = random.Random(seed)
    report = WellBehavedReport(trials)
    for _ in range(trials):
        seg = random_gates(rng, num_qubits, length)
        out = list(oracle(num_qubits, seg))
        for i in range(len(out)):
            for j in range(i + 1, len(out) + 1):
                window = out[i:j]
                report.windows_checked += 1
                again = oracle(num_qubits, window)
                if len(again) < len(window):
                    report.counterexamples.append(Counterexample(seg, out, (i, j), len(again)))
                    if len(report.counterexamples) >= max_counterexamples:
                        return report
    return report
