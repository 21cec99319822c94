"""Static interval indexes attached to cover-tree nodes.

All three structures share one layout. Entries are sorted by ``(start, id)``.
For every power of two ``2**l`` the sorted sequence is cut into aligned blocks
of that size, and each block is stored re-sorted by descending end (ties by
id). A prefix of the start order, or any range of it, splits into
``O(log m)`` aligned blocks, and inside one block an end-time window is a
contiguous run found by bisection. One query therefore yields ``O(log m)``
contiguous ranges.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from heapq import merge
from itertools import accumulate
from typing import Iterable, Iterator, Sequence

import numpy as np

from .core import POS_INF

__all__ = [
    "CanonicalRange",
    "DurableIntervalIndex",
    "SumAnnotatedIndex",
    "MaxOverlapIndex",
    "aligned_blocks",
    "iter_by_end_desc",
]


def aligned_blocks(lo: int, hi: int, max_level: int) -> Iterator[tuple[int, int, int]]:
    """Split ``[lo, hi)`` into maximal aligned power-of-two blocks ``(level, a, b)``."""
    while lo < hi:
        level = (lo & -lo).bit_length() - 1 if lo else max_level
        level = min(level, max_level, (hi - lo).bit_length() - 1)
        size = 1 << level
        yield level, lo, lo + size
        lo += size


class CanonicalRange:
    """A contiguous run ``[lo, hi)`` of one level array.

    The run is ordered by descending end time, ties by ascending id.
    """

    __slots__ = ("_ids", "_neg_ends", "lo", "hi")

    def __init__(self, ids: list[int], neg_ends: list[float], lo: int, hi: int) -> None:
        self._ids = ids
        self._neg_ends = neg_ends
        self.lo = lo
        self.hi = hi

    def __len__(self) -> int:
        return self.hi - self.lo

    def __iter__(self) -> Iterator[int]:
        return iter(self._ids[self.lo:self.hi])

    def ids(self) -> list[int]:
        return self._ids[self.lo:self.hi]

    def keyed(self) -> Iterator[tuple[float, int]]:
        """``(-end, id)`` pairs in range order."""
        return zip(self._neg_ends[self.lo:self.hi], self._ids[self.lo:self.hi])

    def __repr__(self) -> str:
        return f"CanonicalRange({self.ids()})"


def iter_by_end_desc(ranges: Iterable[CanonicalRange]) -> Iterator[int]:
    """Ids of several ranges merged into one descending-end (then id) order."""
    for _, pid in merge(*(r.keyed() for r in ranges)):
        yield pid


def flatten(ranges: Iterable[CanonicalRange]) -> list[int]:
    out: list[int] = []
    for r in ranges:
        out.extend(r.ids())
    return out


class DurableIntervalIndex:
    """Answers ``start <= t0`` and ``end_lo <= end < end_hi`` as canonical ranges."""

    def __init__(self, ids: Sequence[int], starts: Sequence[float], ends: Sequence[float]) -> None:
        ids_a = np.asarray(ids, dtype=np.int64)
        starts_a = np.asarray(starts, dtype=float)
        ends_a = np.asarray(ends, dtype=float)
        order = np.lexsort((ids_a, starts_a))
        self.size = m = len(ids_a)
        s_ids, s_starts, s_ends = ids_a[order], starts_a[order], ends_a[order]
        self.starts: list[float] = s_starts.tolist()
        self.ids_by_start: list[int] = s_ids.tolist()
        self.max_level = max(m.bit_length() - 1, 0)
        self._level_ids: list[list[int]] = []
        self._level_negs: list[list[float]] = []
        self._level_order: list[np.ndarray] = []
        pos = np.arange(m)
        for level in range(self.max_level + 1):
            o = np.lexsort((s_ids, -s_ends, pos >> level))
            self._level_order.append(o)
            self._level_ids.append(s_ids[o].tolist())
            self._level_negs.append((-s_ends[o]).tolist())
        self._sorted = (s_ids, s_starts, s_ends)

    def __len__(self) -> int:
        return self.size

    def prefix_count(self, t0: float, pid: int | None = None) -> int:
        """Entries with ``start <= t0``, or with ``(start, id) < (t0, pid)`` when ``pid`` is given."""
        if pid is None:
            return bisect_right(self.starts, t0)
        a = bisect_left(self.starts, t0)
        b = bisect_right(self.starts, t0, a)
        return bisect_left(self.ids_by_start, pid, a, b)

    def durable_candidates(self, t0: float, end_lo: float, end_hi: float = POS_INF,
                           pid: int | None = None) -> list[CanonicalRange]:
        """Ranges covering exactly ``{q : start_q <= t0, end_lo <= end_q < end_hi}``.

        With ``pid`` the start test becomes the anchor rule
        ``(start_q, id_q) < (t0, pid)``.
        """
        out: list[CanonicalRange] = []
        c = self.prefix_count(t0, pid)
        for level, a, b in aligned_blocks(0, c, self.max_level):
            negs = self._level_negs[level]
            k_lo = bisect_right(negs, -end_lo, a, b)
            k_hi = a if end_hi == POS_INF else bisect_right(negs, -end_hi, a, k_lo)
            if k_hi < k_lo:
                out.append(CanonicalRange(self._level_ids[level], negs, k_hi, k_lo))
        return out

    def partition(self, t0: float, end_lo: float, end_split: float,
                  pid: int | None = None) -> tuple[list[CanonicalRange], list[CanonicalRange]]:
        """Candidates with ``end >= end_lo`` split at ``end_split``.

        Returns ``(below, above)``: ``end_lo <= end < end_split`` and
        ``end >= end_split`` respectively.
        """
        below: list[CanonicalRange] = []
        above: list[CanonicalRange] = []
        c = self.prefix_count(t0, pid)
        for level, a, b in aligned_blocks(0, c, self.max_level):
            negs = self._level_negs[level]
            ids = self._level_ids[level]
            k_lo = bisect_right(negs, -end_lo, a, b)
            if k_lo == a:
                continue
            k_mid = a if end_split == POS_INF else bisect_right(negs, -end_split, a, k_lo)
            if k_mid > a:
                above.append(CanonicalRange(ids, negs, a, k_mid))
            if k_lo > k_mid:
                below.append(CanonicalRange(ids, negs, k_mid, k_lo))
        return below, above

    def has_candidate(self, t0: float, end_lo: float, pid: int | None = None) -> bool:
        c = self.prefix_count(t0, pid)
        for level, a, b in aligned_blocks(0, c, self.max_level):
            if self._level_negs[level][a] <= -end_lo:
                return True
        return False


class SumAnnotatedIndex(DurableIntervalIndex):
    """Adds block prefix sums of length, end and start for overlap totals."""

    def __init__(self, ids: Sequence[int], starts: Sequence[float], ends: Sequence[float]) -> None:
        super().__init__(ids, starts, ends)
        _, s_starts, s_ends = self._sorted
        self._p_len: list[list[float]] = []
        self._p_end: list[list[float]] = []
        self._p_start: list[list[float]] = []
        for o in self._level_order:
            st = s_starts[o].tolist()
            en = s_ends[o].tolist()
            self._p_start.append(list(accumulate(st, initial=0.0)))
            self._p_end.append(list(accumulate(en, initial=0.0)))
            self._p_len.append(list(accumulate((e - s for s, e in zip(st, en)), initial=0.0)))

    def overlap_sum(self, j_lo: float, j_hi: float) -> float:
        """Sum over indexed intervals of ``|I & [j_lo, j_hi]|``."""
        if j_hi < j_lo:
            raise ValueError("empty query interval")
        total = 0.0
        width = j_hi - j_lo
        c_a = bisect_right(self.starts, j_lo)
        # start <= j_lo: the interval covers J (end >= j_hi) or ends inside it
        for level, a, b in aligned_blocks(0, c_a, self.max_level):
            negs = self._level_negs[level]
            p_end = self._p_end[level]
            k1 = bisect_right(negs, -j_hi, a, b)
            k2 = bisect_right(negs, -j_lo, k1, b)
            total += (k1 - a) * width + (p_end[k2] - p_end[k1]) - (k2 - k1) * j_lo
        c_b = bisect_right(self.starts, j_hi, c_a)
        # j_lo < start <= j_hi: the interval sticks out past j_hi or lies inside J
        for level, a, b in aligned_blocks(c_a, c_b, self.max_level):
            negs = self._level_negs[level]
            k3 = bisect_left(negs, -j_hi, a, b)
            p_start = self._p_start[level]
            p_len = self._p_len[level]
            total += (k3 - a) * j_hi - (p_start[k3] - p_start[a]) + (p_len[b] - p_len[k3])
        return total


def _top3_insert(top: list, item) -> list:
    if len(top) < 3 or item < top[-1]:
        top = sorted(top + [item])[:3]
    return top


class MaxOverlapIndex:
    """Finds an indexed interval of maximum overlap with a query interval.

    Three candidate classes cover every interval that can overlap ``J``:
    intervals starting at or before ``J``'s start (best: largest end),
    intervals ending at or after ``J``'s end (best: smallest start), and
    intervals inside ``J`` (best: longest). Each class keeps its three best
    entries so that up to two excluded ids can be skipped.
    """

    def __init__(self, ids: Sequence[int], starts: Sequence[float], ends: Sequence[float]) -> None:
        ids_a = np.asarray(ids, dtype=np.int64)
        starts_a = np.asarray(starts, dtype=float)
        ends_a = np.asarray(ends, dtype=float)
        self.size = m = len(ids_a)
        by_start = np.lexsort((ids_a, starts_a))
        self.starts: list[float] = starts_a[by_start].tolist()
        s_ids, s_st, s_en = ids_a[by_start], starts_a[by_start], ends_a[by_start]
        rows = list(zip(s_ids.tolist(), s_st.tolist(), s_en.tolist()))

        # class a: prefix of the start order, ranked by (-end, id)
        self._prefix_top: list[list] = [[]]
        top: list = []
        for pid, s, e in rows:
            top = _top3_insert(top, (-e, pid, s, e))
            self._prefix_top.append(top)

        # class b: suffix of the end order, ranked by (start, id)
        by_end = np.lexsort((ids_a, ends_a))
        self.ends_sorted: list[float] = ends_a[by_end].tolist()
        e_rows = list(zip(ids_a[by_end].tolist(), starts_a[by_end].tolist(), ends_a[by_end].tolist()))
        self._suffix_top: list[list] = [[] for _ in range(m + 1)]
        top = []
        for i in range(m - 1, -1, -1):
            pid, s, e = e_rows[i]
            top = _top3_insert(top, (s, pid, s, e))
            self._suffix_top[i] = top

        # class c: aligned blocks of the start order sorted by descending end;
        # per position, the three longest entries from there to the block end
        self.max_level = max(m.bit_length() - 1, 0)
        self._level_negs: list[list[float]] = []
        self._level_top: list[list[list]] = []
        pos = np.arange(m)
        for level in range(self.max_level + 1):
            o = np.lexsort((s_ids, -s_en, pos >> level))
            negs = (-s_en[o]).tolist()
            lrows = list(zip(s_ids[o].tolist(), s_st[o].tolist(), s_en[o].tolist()))
            tops: list[list] = [[] for _ in range(m)]
            size = 1 << level
            for blk in range(0, m, size):
                top = []
                for i in range(min(blk + size, m) - 1, blk - 1, -1):
                    pid, s, e = lrows[i]
                    top = _top3_insert(top, (s - e, pid, s, e))
                    tops[i] = top
            self._level_negs.append(negs)
            self._level_top.append(tops)

    def __len__(self) -> int:
        return self.size

    def _candidates(self, j_lo: float, j_hi: float) -> Iterator[tuple]:
        yield from self._prefix_top[bisect_right(self.starts, j_lo)]
        yield from self._suffix_top[bisect_left(self.ends_sorted, j_hi)]
        for level, a, b in aligned_blocks(bisect_left(self.starts, j_lo), self.size, self.max_level):
            k = bisect_left(self._level_negs[level], -j_hi, a, b)
            if k < b:
                yield from self._level_top[level][k]

    def max_overlap(self, j_lo: float, j_hi: float,
                    exclude: Iterable[int] = ()) -> tuple[int, float] | None:
        """``(id, overlap)`` of a best interval, or ``None`` if nothing overlaps.

        Ties in overlap go to the smaller id.
        """
        exclude = set(exclude)
        if len(exclude) > 2:
            raise ValueError("at most two ids can be excluded")
        best: tuple[float, int] | None = None
        for _, pid, s, e in self._candidates(j_lo, j_hi):
            if pid in exclude:
                continue
            ov = min(e, j_hi) - max(s, j_lo)
            if ov <= 0:
                continue
            key = (-ov, pid)
            if best is None or key < best:
                best = key
        if best is None:
            return None
        return best[1], -best[0]
