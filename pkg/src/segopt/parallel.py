"""Ways of running the oracle over one round's windows.

Every runner answers ``run(circ, centers, omega)`` with one
``(outcome, seconds)`` pair per window center, in order, and is told about
the round's slot writes through ``commit(updates)``. An outcome is ``None``
after a timeout, :data:`UNCHANGED` when the window did not improve, or an
:class:`Edit` describing how to write the improvement back.

* ``serial``: the caller's thread.
* ``thread``: a thread pool; for oracles that wait on subprocesses.
* ``process``: a process pool fed with encoded segments.
* ``replica``: long-lived worker processes that each keep a copy of the
  circuit. A round ships only window centers plus the previous round's slot
  writes, and only improved windows travel back, so the main process does
  no per-window work for the (usual) windows that stay the same.
"""

from __future__ import annotations

import logging
import multiprocessing
import time
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .circuit import Circuit, Segment, Slot, window_writes
from .gates import Gate, Kind
from .oracle import Oracle, OracleError, OracleTimeout

log = logging.getLogger(__name__)

EXECUTORS = ("auto", "serial", "thread", "process", "replica")

UNCHANGED = object()


@dataclass
class Edit:
    """An accepted window improvement, in slot terms.

    ``left`` and ``right`` are the new fingers: the window's first slot and
    the slot of the first gate after it (clamped to the last gate), both
    taken before any write lands.
    """

    left: int
    right: int
    writes: List[Tuple[int, Slot]]


_CODE = {Kind.H: 0, Kind.X: 1, Kind.CNOT: 2, Kind.RZ: 3}
_KINDS = (Kind.H, Kind.X, Kind.CNOT, Kind.RZ)


def timed_call(oracle: Oracle, num_qubits: int, gates) -> Tuple[Optional[List[Gate]], float]:
    """Run the oracle once; a timeout yields ``None`` instead of raising."""
    t0 = time.perf_counter()
    try:
        out = oracle(num_qubits, gates)
    except OracleTimeout as e:
        log.warning("%s; keeping the original segment", e)
        out = None
    return out, time.perf_counter() - t0


def classify(oracle: Oracle, circ: Circuit, seg: Segment, opt: Optional[List[Gate]]):
    """Turn one oracle answer into ``None``, :data:`UNCHANGED` or an :class:`Edit`.

    An answer is accepted only when it is strictly shorter and strictly
    cheaper than the window.
    """
    if opt is None or opt is UNCHANGED:
        return opt
    if not (len(opt) < len(seg) and oracle.cost(opt) < oracle.cost(seg.gates)):
        return UNCHANGED
    nq = circ.num_qubits
    slots = seg.slots
    writes = []
    for k, g in window_writes(seg.gates, opt):
        if g is not None and max(g.qubits) >= nq:
            raise OracleError(f"oracle returned {g!r} outside {nq} qubits")
        writes.append((slots[k], g))
    right = circ.index_of(min(seg.start_rank + len(seg), circ.size - 1))
    return Edit(slots[0], right, writes)


# Gates cross process boundaries as (code, qubits, angle) tuples, which
# pickle far faster than Gate objects.


def encode(gates: Sequence[Gate]) -> list:
    code = _CODE
    return [(code[g.kind], g.qubits, g.angle) for g in gates]


def _decode_gate(e) -> Gate:
    return Gate(_KINDS[e[0]], e[1], e[2])


def _encode_writes(writes) -> list:
    code = _CODE
    return [(s, None if g is None else (code[g.kind], g.qubits, g.angle)) for s, g in writes]


def _decode_writes(writes) -> list:
    return [(s, None if e is None else _decode_gate(e)) for s, e in writes]


# Pool workers answer None (timeout), True (no improvement) or a list whose
# ints index into the request and whose tuples are new gates, so surviving
# gates come back as the caller's own objects.


def _decode_reply(reply, request: Sequence[Gate]):
    if reply is None:
        return None
    if reply is True:
        return UNCHANGED
    return [request[e] if type(e) is int else _decode_gate(e) for e in reply]


_worker_state: dict = {}


def _init_worker(oracle: Oracle, num_qubits: int) -> None:
    _worker_state["oracle"] = oracle
    _worker_state["num_qubits"] = num_qubits


def _worker_call(encoded):
    oracle = _worker_state["oracle"]
    gates = [_decode_gate(e) for e in encoded]
    opt, secs = timed_call(oracle, _worker_state["num_qubits"], gates)
    if opt is None:
        return None, secs
    if not (len(opt) < len(gates) and oracle.cost(opt) < oracle.cost(gates)):
        return True, secs
    where = {id(g): i for i, g in enumerate(gates)}
    out = []
    for g in opt:
        i = where.get(id(g))
        out.append(i if i is not None else (_CODE[g.kind], g.qubits, g.angle))
    return out, secs


class OracleRunner:
    """Serial, thread-pool or process-pool execution of segment batches."""

    def __init__(self, oracle: Oracle, num_qubits: int, threads: int = 1, executor: str = "serial"):
        self.oracle = oracle
        self.num_qubits = num_qubits
        self.threads = threads
        self.executor = executor
        self._pool = None

    def __enter__(self):
        if self.executor == "process":
            self._pool = ProcessPoolExecutor(
                max_workers=self.threads, initializer=_init_worker, initargs=(self.oracle, self.num_qubits)
            )
        elif self.executor == "thread":
            self._pool = ThreadPoolExecutor(max_workers=self.threads)
        return self

    def __exit__(self, *exc):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def map(self, segments: Sequence[Sequence[Gate]]) -> list:
        if self._pool is None or len(segments) <= 1:
            return [timed_call(self.oracle, self.num_qubits, s) for s in segments]
        if self.executor == "process":
            chunk = max(1, len(segments) // (4 * self.threads))
            replies = self._pool.map(_worker_call, [encode(s) for s in segments], chunksize=chunk)
            return [(_decode_reply(r, s), secs) for s, (r, secs) in zip(segments, replies)]
        return list(self._pool.map(lambda s: timed_call(self.oracle, self.num_qubits, s), segments))

    def run(self, circ: Circuit, centers: Sequence[int], omega: int) -> list:
        segments = [circ.extract_segment(c, omega) for c in centers]
        results = self.map([s.gates for s in segments])
        return [(classify(self.oracle, circ, s, opt), secs) for s, (opt, secs) in zip(segments, results)]

    def commit(self, updates) -> None:
        pass


def _replica_main(conn, oracle: Oracle, circ: Circuit) -> None:
    nq = circ.num_qubits
    while True:
        try:
            msg = conn.recv()
        except EOFError:
            return
        if msg is None:
            return
        updates, centers, omega = msg
        try:
            if updates:
                circ.substitute(_decode_writes(updates), validate=False)
            out = []
            for c in centers:
                seg = circ.extract_segment(c, omega)
                opt, secs = timed_call(oracle, nq, seg.gates)
                res = classify(oracle, circ, seg, opt)
                if isinstance(res, Edit):
                    res = (res.left, res.right, _encode_writes(res.writes))
                elif res is UNCHANGED:
                    res = True
                out.append((res, secs))
            conn.send(("ok", out))
        except Exception as e:  # hand it to the main process
            try:
                conn.send(("error", e))
            except Exception:
                conn.send(("error", RuntimeError(repr(e))))


class ReplicaRunner:
    """Worker processes holding their own copy of the circuit.

    The workers are started from the circuit as it is when the runner is
    entered, and every later change must go through :meth:`commit`.
    """

    def __init__(self, oracle: Oracle, circ: Circuit, workers: int):
        if workers < 1:
            raise ValueError("workers must be positive")
        self.oracle = oracle
        self.circ = circ
        self.workers = workers
        self._procs: list = []
        self._conns: list = []
        self._pending: list = []

    def __enter__(self):
        ctx = multiprocessing.get_context()
        for _ in range(self.workers):
            parent, child = ctx.Pipe()
            p = ctx.Process(target=_replica_main, args=(child, self.oracle, self.circ), daemon=True)
            p.start()
            child.close()
            self._procs.append(p)
            self._conns.append(parent)
        return self

    def __exit__(self, *exc):
        for conn in self._conns:
            try:
                conn.send(None)
            except (BrokenPipeError, OSError):
                pass
        for p in self._procs:
            p.join(timeout=5)
            if p.is_alive():
                p.terminate()
                p.join()
        for conn in self._conns:
            conn.close()
        self._procs, self._conns = [], []

    def run(self, circ: Circuit, centers: Sequence[int], omega: int) -> list:
        if circ is not self.circ:
            raise ValueError("ReplicaRunner is bound to the circuit it was created with")
        k = len(self._conns)
        step, extra = divmod(len(centers), k)
        lo = 0
        for i, conn in enumerate(self._conns):
            hi = lo + step + (1 if i < extra else 0)
            conn.send((self._pending, list(centers[lo:hi]), omega))
            lo = hi
        self._pending = []
        replies = []
        error = None
        for conn in self._conns:
            status, payload = conn.recv()
            if status == "error":
                error = error or payload
            else:
                replies.extend(payload)
        if error is not None:
            raise error
        out = []
        for reply, secs in replies:
            if reply is None:
                out.append((None, secs))
            elif reply is True:
                out.append((UNCHANGED, secs))
            else:
                left, right, writes = reply
                out.append((Edit(left, right, _decode_writes(writes)), secs))
        return out

    def commit(self, updates) -> None:
        self._pending.extend(_encode_writes(updates))


def make_runner(oracle: Oracle, circ: Circuit, threads: Optional[int], executor: str = "auto"):
    """Pick the execution strategy for a run.

    ``auto`` is serial for one thread, replicas for process-safe oracles
    (pure Python oracles hold the GIL) and a thread pool otherwise (external
    oracles spend their time waiting on subprocesses).
    """
    if executor not in EXECUTORS:
        raise ValueError(f"executor must be one of {EXECUTORS}")
    threads = threads or 1
    if executor == "auto":
        if threads == 1:
            executor = "serial"
        else:
            executor = "replica" if oracle.process_safe else "thread"
    if executor == "replica":
        return ReplicaRunner(oracle, circ, threads)
    return OracleRunner(oracle, circ.num_qubits, threads, executor)
