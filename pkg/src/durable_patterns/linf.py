"""Exact durable triangles under the max-norm.

Under L-infinity the unit ball is an axis-aligned cube, so "within distance 1"
becomes a box test and no approximation is needed. ``DurableRangeStructure``
is a multi-level range tree: one level per axis, and an interval index at
every last-level canonical node. A query returns the points of a box that
started before a given point and survive ``tau`` past its start.
"""

from __future__ import annotations

import math
import threading
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from itertools import combinations, product
from typing import Sequence

import numpy as np

from .core import Dataset, InputError, durable_end, is_durable
from .intervals import CanonicalRange, DurableIntervalIndex, aligned_blocks, flatten
from .patterns import Sink, TriangleRecord, drive

__all__ = ["Box", "DurableRangeStructure", "unit_squares", "report_triangles_exact_linf",
           "MAX_RANGE_DIM"]

MAX_RANGE_DIM = 4


@dataclass(frozen=True)
class Box:
    """Axis-aligned box; each bound is closed unless its ``*_open`` flag is set."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]
    lo_open: tuple[bool, ...] | None = None
    hi_open: tuple[bool, ...] | None = None

    def __post_init__(self) -> None:
        d = len(self.lo)
        if len(self.hi) != d:
            raise InputError("box bounds differ in dimension")
        if self.lo_open is None:
            object.__setattr__(self, "lo_open", (False,) * d)
        if self.hi_open is None:
            object.__setattr__(self, "hi_open", (False,) * d)

    @classmethod
    def cube(cls, center: Sequence[float], half: float = 1.0) -> Box:
        """Closed cube holding exactly the points ``x`` with ``|x_k - c_k| <= half`` in floats."""
        return cls(tuple(reach_below(c, half) for c in center),
                   tuple(reach_above(c, half) for c in center))

    @property
    def dim(self) -> int:
        return len(self.lo)

    def contains(self, x: Sequence[float]) -> bool:
        for v, lo, hi, lo_o, hi_o in zip(x, self.lo, self.hi, self.lo_open, self.hi_open):
            if v < lo or (lo_o and v == lo) or v > hi or (hi_o and v == hi):
                return False
        return True

    def intersect(self, other: Box) -> Box:
        lo, hi, lo_o, hi_o = [], [], [], []
        for k in range(self.dim):
            a, b = (self.lo[k], self.lo_open[k]), (other.lo[k], other.lo_open[k])
            # larger bound wins; at equal values an open bound is stricter
            v, o = max(a, b)
            lo.append(v)
            lo_o.append(o)
            a, b = (self.hi[k], not self.hi_open[k]), (other.hi[k], not other.hi_open[k])
            v, closed = min(a, b)
            hi.append(v)
            hi_o.append(not closed)
        return Box(tuple(lo), tuple(hi), tuple(lo_o), tuple(hi_o))


def _edge(ok, good: float, direction: float) -> float:
    """Last float satisfying the monotone predicate ``ok`` when walking from ``good``.

    ``direction`` is ``+inf`` or ``-inf``; ``ok(good)`` must hold.
    """
    step = math.ulp(good) or math.ulp(1.0)
    bad = good + math.copysign(step, direction)
    while ok(bad):
        good = bad
        step *= 2
        bad = good + math.copysign(step, direction)
    while True:
        mid = good + (bad - good) / 2
        if mid == good or mid == bad:
            return good
        if ok(mid):
            good = mid
        else:
            bad = mid


def reach_below(c: float, half: float) -> float:
    """Smallest float ``x`` with ``c - x <= half`` as computed in floating point.

    ``c - half`` can be off by an ulp or more, so bounds derived from it would
    disagree with the metric on points at distance exactly ``half``.
    """
    x = c - half
    while c - x > half:
        x = math.nextafter(x, math.inf)
    return _edge(lambda v: c - v <= half, x, -math.inf)


def reach_above(c: float, half: float) -> float:
    """Largest float ``x`` with ``x - c <= half`` as computed in floating point."""
    x = c + half
    while x - c > half:
        x = math.nextafter(x, -math.inf)
    return _edge(lambda v: v - c <= half, x, math.inf)


def unit_squares(center: Sequence[float]) -> list[Box]:
    """The ``2^d`` unit cubes that partition ``[center - 1, center + 1]^d``.

    Per axis the lower half is ``[c - 1, c)`` and the upper half ``[c, c + 1]``.
    """
    halves = [((reach_below(c, 1.0), c, False, True), (c, reach_above(c, 1.0), False, False))
              for c in center]
    out = []
    for combo in product(*halves):
        out.append(Box(tuple(h[0] for h in combo), tuple(h[1] for h in combo),
                       tuple(h[2] for h in combo), tuple(h[3] for h in combo)))
    return out


class _AxisTree:
    """Range tree over one axis; canonical blocks hold the next axis' tree.

    Blocks are built on first use: a box query touches O(log n) of them per
    axis, while building all of them up front costs O(n log^d n) indexes.
    """

    def __init__(self, ids: np.ndarray, data: tuple[np.ndarray, np.ndarray, np.ndarray],
                 axis: int, lock: threading.Lock) -> None:
        coords = data[0]
        order = np.lexsort((ids, coords[ids, axis]))
        self.ids = ids[order]
        self.keys: list[float] = coords[self.ids, axis].tolist()
        self.axis = axis
        self.last = axis == coords.shape[1] - 1
        self.max_level = max(len(self.ids).bit_length() - 1, 0)
        self._data = data
        self._lock = lock
        self.blocks: dict[tuple[int, int], _AxisTree | DurableIntervalIndex] = {}

    def _block(self, level: int, a: int) -> _AxisTree | DurableIntervalIndex:
        node = self.blocks.get((level, a))
        if node is None:
            with self._lock:
                node = self.blocks.get((level, a))
                if node is None:
                    sub = self.ids[a:a + (1 << level)]
                    _, starts, ends = self._data
                    if self.last:
                        node = DurableIntervalIndex(sub, starts[sub], ends[sub])
                    else:
                        node = _AxisTree(sub, self._data, self.axis + 1, self._lock)
                    self.blocks[(level, a)] = node
        return node

    def canonical(self, box: Box) -> list[DurableIntervalIndex]:
        k = self.axis
        lo = (bisect_right if box.lo_open[k] else bisect_left)(self.keys, box.lo[k])
        hi = (bisect_left if box.hi_open[k] else bisect_right)(self.keys, box.hi[k])
        out: list[DurableIntervalIndex] = []
        for level, a, _ in aligned_blocks(lo, hi, self.max_level):
            node = self._block(level, a)
            if isinstance(node, _AxisTree):
                out.extend(node.canonical(box))
            else:
                out.append(node)
        return out


class DurableRangeStructure:
    """Box queries with the anchor rule and a durability filter."""

    def __init__(self, ds: Dataset) -> None:
        if ds.dim > MAX_RANGE_DIM:
            raise InputError(f"range structure supports at most {MAX_RANGE_DIM} dimensions")
        self.ds = ds
        self._root = None
        if ds.n:
            data = (np.asarray(ds.coords), np.asarray(ds.starts), np.asarray(ds.ends))
            self._root = _AxisTree(np.arange(ds.n), data, 0, threading.Lock())

    def _check(self, box: Box) -> None:
        if box.dim != self.ds.dim:
            raise InputError(f"box has dimension {box.dim}, data has {self.ds.dim}")

    def range_query(self, p: int, tau: float, box: Box) -> list[CanonicalRange]:
        """Points in ``box`` that started before ``p`` and last until ``start_p + tau``."""
        self._check(box)
        if self._root is None:
            return []
        s_p = self.ds.start_list[p]
        end_lo = durable_end(s_p, tau)
        out: list[CanonicalRange] = []
        for idx in self._root.canonical(box):
            out.extend(idx.durable_candidates(s_p, end_lo, pid=p))
        return out

    def range_nonempty(self, p: int, tau: float, box: Box) -> bool:
        self._check(box)
        if self._root is None:
            return False
        s_p = self.ds.start_list[p]
        end_lo = durable_end(s_p, tau)
        return any(idx.has_candidate(s_p, end_lo, pid=p) for idx in self._root.canonical(box))


def _linf_triangles_for_anchor(R: DurableRangeStructure, p: int, tau: float) -> list[TriangleRecord]:
    ds = R.ds
    s_p, e_p = ds.start_list[p], ds.end_list[p]
    if not is_durable(s_p, e_p, tau):
        return []
    ends = ds.end_list
    squares = unit_squares(ds.coords[p].tolist())
    members = [flatten(R.range_query(p, tau, sq)) for sq in squares]
    out: list[TriangleRecord] = []
    for g in members:
        # a unit cube has max-norm diameter 1
        for q, s in combinations(g, 2):
            out.append(TriangleRecord(p, q, s, s_p, min(e_p, ends[q], ends[s])))
    for j, k in combinations(range(len(squares)), 2):
        if not members[j] or not members[k]:
            continue
        for q in members[j]:
            box = Box.cube(ds.coords[q].tolist()).intersect(squares[k])
            e_pq = min(e_p, ends[q])
            for s in flatten(R.range_query(p, tau, box)):
                out.append(TriangleRecord(p, q, s, s_p, min(e_pq, ends[s])))
    return out


def report_triangles_exact_linf(R: DurableRangeStructure, tau: float, sink: Sink | None = None,
                                threads: int = 1) -> int:
    """Report exactly the ``tau``-durable triangles under the max-norm, each once."""
    if R.ds.metric.kind != "LINF":
        raise InputError("exact reporting needs the LINF metric")
    if tau < 0:
        raise InputError("tau must be non-negative")
    return drive(range(R.ds.n), lambda p: _linf_triangles_for_anchor(R, p, tau), sink, threads)
