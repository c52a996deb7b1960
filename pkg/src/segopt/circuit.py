"""Slot array of gates with tombstones, indexed by a weighted complete binary tree.

The tree lives in a flat heap-ordered list: node 1 is the root, node ``k`` has
children ``2k`` and ``2k + 1``, and leaf ``cap + i`` belongs to slot ``i``.
Leaves past the last slot are padding and keep weight 0 forever. A leaf weighs
1 when its slot holds a gate and 0 when it holds a tombstone, so every node's
weight is the number of live gates below it.

Positions come in two flavours and the API is careful about which one it
takes: a *slot index* addresses the raw array (tombstones included), a *rank*
counts only live gates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

from .gates import Gate

TOMBSTONE = None

Slot = Optional[Gate]


@dataclass(frozen=True)
class Segment:
    """Contiguous live gates by rank, with the slots they came from."""

    start_rank: int
    gates: Tuple[Gate, ...]
    slots: Tuple[int, ...]

    def __len__(self) -> int:
        return len(self.gates)


class Circuit:
    def __init__(self, gates: Sequence[Gate], num_qubits: int):
        gates = list(gates)
        if not gates:
            raise ValueError("cannot create a circuit from an empty gate list")
        if num_qubits < 1:
            raise ValueError("num_qubits must be positive")
        for g in gates:
            if max(g.qubits) >= num_qubits:
                raise ValueError(f"{g!r} out of range for {num_qubits} qubits")
        self.num_qubits = num_qubits
        self.slots: List[Slot] = gates
        self.n_slots = len(gates)
        cap = 1
        while cap < self.n_slots:
            cap *= 2
        self._cap = cap
        tree = [0] * (2 * cap)
        tree[cap:cap + self.n_slots] = [1] * self.n_slots
        # build level by level, bottom up
        for k in range(cap - 1, 0, -1):
            tree[k] = tree[2 * k] + tree[2 * k + 1]
        self._tree = tree

    @property
    def size(self) -> int:
        """Number of live gates (the root weight)."""
        return self._tree[1]

    @property
    def height(self) -> int:
        return self._cap.bit_length() - 1

    def __len__(self) -> int:
        return self.size

    def before(self, i: int) -> int:
        """Number of live gates in slots ``[0, i)``."""
        if not 0 <= i <= self.n_slots:
            raise IndexError(f"slot index {i} out of range [0, {self.n_slots}]")
        if i == self._cap:
            return self._tree[1]
        tree = self._tree
        node = self._cap + i
        total = 0
        while node > 1:
            if node & 1:
                total += tree[node - 1]
            node >>= 1
        return total

    def index_of(self, r: int) -> int:
        """Slot index of the live gate with rank ``r``."""
        tree = self._tree
        if not 0 <= r < tree[1]:
            raise IndexError(f"rank {r} out of range [0, {tree[1]})")
        node = 1
        cap = self._cap
        while node < cap:
            node <<= 1
            w = tree[node]
            if r >= w:
                r -= w
                node += 1
        return node - cap

    def get(self, r: int) -> Gate:
        return self.slots[self.index_of(r)]

    def gates(self) -> List[Gate]:
        return [g for g in self.slots if g is not None]

    def extract_segment(self, center_rank: int, radius: int) -> Segment:
        """Live gates at ranks ``[center - radius, center + radius)``, clamped to the circuit."""
        n = self._tree[1]
        if not 0 <= center_rank <= n:
            raise IndexError(f"center rank {center_rank} out of range [0, {n}]")
        lo = max(0, center_rank - radius)
        hi = min(n, center_rank + radius)
        gates: List[Gate] = []
        slots: List[int] = []
        if lo >= hi:
            return Segment(lo, (), ())
        s = self.index_of(lo)
        cells = self.slots
        for r in range(lo, hi):
            g = cells[s]
            if g is None:
                # skip the tombstone run through the tree
                s = self.index_of(r)
                g = cells[s]
            gates.append(g)
            slots.append(s)
            s += 1
        return Segment(lo, tuple(gates), tuple(slots))

    def _check_updates(self, updates) -> List[Tuple[int, Slot]]:
        updates = list(updates)
        seen = set()
        for i, _ in updates:
            if not 0 <= i < self.n_slots:
                raise IndexError(f"slot index {i} out of range [0, {self.n_slots})")
            if i in seen:
                raise ValueError(f"duplicate slot index {i} in substitute batch")
            seen.add(i)
        for _, g in updates:
            if g is not None and max(g.qubits) >= self.num_qubits:
                raise ValueError(f"{g!r} out of range for {self.num_qubits} qubits")
        return updates

    def substitute(self, updates: Iterable[Tuple[int, Slot]], validate: bool = True) -> int:
        """Replace slots in one batch; ``None`` writes a tombstone.

        Leaves are written first, then only the dirty ancestors are recomputed
        one level at a time. Returns the number of internal weights rewritten.
        ``validate=False`` skips the index/duplicate/operand checks for
        callers that already guarantee them.
        """
        updates = self._check_updates(updates) if validate else updates
        tree = self._tree
        cap = self._cap
        cells = self.slots
        dirty = set()
        for i, g in updates:
            cells[i] = g
            w = 0 if g is None else 1
            leaf = cap + i
            if tree[leaf] != w:
                tree[leaf] = w
                dirty.add(leaf >> 1)
        touched = 0
        while dirty and min(dirty) >= 1:
            parents = set()
            for k in dirty:
                tree[k] = tree[2 * k] + tree[2 * k + 1]
                touched += 1
                if k > 1:
                    parents.add(k >> 1)
            dirty = parents
        return touched

    def substitute_serial(self, updates: Iterable[Tuple[int, Slot]]) -> int:
        """Reference path-update variant of :meth:`substitute`."""
        updates = self._check_updates(updates)
        tree = self._tree
        touched = 0
        for i, g in updates:
            self.slots[i] = g
            leaf = self._cap + i
            delta = (0 if g is None else 1) - tree[leaf]
            if delta:
                tree[leaf] += delta
                node = leaf >> 1
                while node >= 1:
                    tree[node] += delta
                    touched += 1
                    node >>= 1
        return touched

    def weights(self) -> List[int]:
        return list(self._tree)

    def audit(self) -> bool:
        """Full recount of every weight from the slots."""
        tree = self._tree
        cap = self._cap
        for i in range(cap):
            expect = 1 if i < self.n_slots and self.slots[i] is not None else 0
            if tree[cap + i] != expect:
                return False
        return all(tree[k] == tree[2 * k] + tree[2 * k + 1] for k in range(1, cap))


def window_writes(old: Sequence[Gate], new: Sequence[Gate]) -> List[Tuple[int, Slot]]:
    """Offsets and contents to write so a window holding ``old`` reads ``new``.

    Gates of ``new`` that are the very objects found in ``old``, in the same
    order, stay where they are; removed gates become tombstones and any other
    gate takes a freed offset between its kept neighbours. When the kept
    gates are out of order, or too few offsets are freed, ``new`` is instead
    left-aligned over the window with tombstones after it. Offsets whose
    content does not change are omitted.
    """
    if len(new) > len(old):
        raise ValueError("replacement is longer than the window")
    where = {id(g): i for i, g in enumerate(old)}
    writes: List[Tuple[int, Slot]] = []
    pending: List[Gate] = []
    p = 0
    for g in list(new) + [None]:
        i = len(old) if g is None else where.get(id(g))
        if i is None or i < p:
            pending.append(g)
            continue
        if len(pending) > i - p:
            break
        for k in range(p, i):
            j = k - p
            writes.append((k, pending[j] if j < len(pending) else None))
        pending = []
        p = i + 1
    else:
        return writes
    k = len(new)
    return [(i, new[i] if i < k else None) for i in range(len(old)) if i >= k or new[i] is not old[i]]


def create(gates: Sequence[Gate], num_qubits: int) -> Circuit:
    return Circuit(gates, num_qubits)
