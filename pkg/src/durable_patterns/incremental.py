"""Delta reporting over a sequence of durability thresholds.

An ``IncrementalSession`` answers ``query(tau)`` calls. When ``tau`` drops, it
reports only the triangles that became durable since the previous threshold.
When ``tau`` rises, it reports the full ``tau``-durable set again.

Activation values drive the anchor selection. ``alpha[p]`` is the largest
durability of a triangle anchored at ``p``. ``beta[p]`` is the largest
durability strictly below the current threshold. Both are found by binary
search over lifespan end times, using an existence test (``detect_triangle``)
that shares its ball geometry with the reporting code. Internally thresholds
are compared as absolute end times (``start_p + tau``), which keeps every
comparison bit-identical to the reporting path.
"""

from __future__ import annotations

import logging
from bisect import bisect_left, bisect_right, insort
from itertools import combinations, product

import numpy as np

from .core import NEG_INF, POS_INF, InputError, durable_end
from .durable_ball import DurableBallStructure, DurableSubset
from .intervals import flatten
from .patterns import (Sink, TriangleRecord, close_matrix, close_pairs, drive,
                       triangles_for_anchor)

__all__ = [
    "IncrementalSession",
    "compute_activation",
    "detect_triangle",
    "report_delta_triangles",
]

logger = logging.getLogger(__name__)


def _split_for(D: DurableBallStructure, p: int, end_lo: float, end_split: float,
               eps: float) -> list[DurableSubset] | None:
    """Split query for anchor ``p``, or ``None`` when ``p`` itself ends too early.

    ``p``'s own end caps every triangle it anchors, so once ``p`` ends before
    the split time every candidate counts as "below".
    """
    e_p = D.ds.end_list[p]
    if e_p < end_lo:
        return None
    if e_p < end_split:
        end_split = POS_INF
    return D.split_query_abs(p, end_lo, end_split, eps / 2)


def _detect_abs(D: DurableBallStructure, p: int, end_lo: float, end_split: float,
                eps: float) -> bool:
    subsets = _split_for(D, p, end_lo, end_split, eps)
    if not subsets:
        return False
    n_below = [sum(len(r) for r in sub.below) for sub in subsets]
    n_above = [sum(len(r) for r in sub.above) for sub in subsets]
    for b, a in zip(n_below, n_above):
        if b >= 2 or (b >= 1 and a >= 1):
            return True
    with_below = [i for i, b in enumerate(n_below) if b]
    if not with_below or len(subsets) < 2:
        return False
    close = close_matrix(D.ds, [sub.rep for sub in subsets], 1 + eps / 2)
    np.fill_diagonal(close, False)
    return bool(close[with_below].any())


def detect_triangle(D: DurableBallStructure, p: int, tau_lo: float, tau_hi: float,
                    eps: float) -> bool:
    """Whether ``p`` anchors a reportable triangle of durability in ``[tau_lo, tau_hi)``.

    True whenever an exact triangle with that durability exists; may also be
    true because of an ``eps``-triangle; false otherwise.
    """
    if not tau_lo < tau_hi:
        raise InputError("detect_triangle needs tau_lo < tau_hi")
    s_p = D.ds.start_list[p]
    split = POS_INF if tau_hi == POS_INF else durable_end(s_p, tau_hi)
    return _detect_abs(D, p, durable_end(s_p, max(tau_lo, 0.0)), split, eps)


class _EndTimes:
    """Sorted distinct lifespan end times, the search space for activation values."""

    def __init__(self, D: DurableBallStructure) -> None:
        self.values: list[float] = np.unique(D.ds.ends).tolist()


def _activation_end(D: DurableBallStructure, ends: _EndTimes, p: int, end_hi: float,
                    eps: float) -> float | None:
    """Largest end time ``x < end_hi`` such that ``p`` anchors a triangle ending at ``x``."""
    vals = ends.values
    s_p = D.ds.start_list[p]
    e_p = D.ds.end_list[p]
    lo = bisect_left(vals, s_p)
    hi = bisect_right(vals, e_p)
    if end_hi != POS_INF:
        hi = min(hi, bisect_left(vals, end_hi))
    if lo >= hi or not _detect_abs(D, p, vals[lo], end_hi, eps):
        return None
    # detection is monotone: true at x implies true at every smaller x
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _detect_abs(D, p, vals[mid], end_hi, eps):
            lo = mid
        else:
            hi = mid
    return vals[lo]


def compute_activation(D: DurableBallStructure, p: int, tau: float, eps: float,
                       _ends: _EndTimes | None = None) -> float:
    """Largest durability below ``tau`` of a reportable triangle anchored at ``p``.

    Returns ``-inf`` when there is none. ``tau`` may be ``inf``.
    """
    if not tau > 0:
        raise InputError("tau must be positive")
    ends = _ends or _EndTimes(D)
    s_p = D.ds.start_list[p]
    end_hi = POS_INF if tau == POS_INF else durable_end(s_p, tau)
    x = _activation_end(D, ends, p, end_hi, eps)
    return NEG_INF if x is None else x - s_p


def _delta_for_anchor(D: DurableBallStructure, p: int, tau: float, prev_tau: float,
                      eps: float) -> list[TriangleRecord]:
    ds = D.ds
    s_p = ds.start_list[p]
    e_p = ds.end_list[p]
    split = POS_INF if prev_tau == POS_INF else durable_end(s_p, prev_tau)
    subsets = _split_for(D, p, durable_end(s_p, tau), split, eps)
    if not subsets or not any(sub.below for sub in subsets):
        return []
    ends = ds.end_list
    below = [flatten(sub.below) for sub in subsets]
    above = [flatten(sub.above) for sub in subsets]
    out: list[TriangleRecord] = []

    def emit(pairs) -> None:
        for q, s in pairs:
            out.append(TriangleRecord(p, q, s, s_p, min(e_p, ends[q], ends[s])))

    for lam, bar in zip(below, above):
        if lam:
            emit(combinations(lam, 2))
            emit(product(lam, bar))
    for i, j in close_pairs(ds, [sub.rep for sub in subsets], 1 + eps / 2):
        if below[i]:
            emit(product(below[i], below[j]))
            emit(product(below[i], above[j]))
        if below[j]:
            emit(product(above[i], below[j]))
    return out


def report_delta_triangles(D: DurableBallStructure, p: int, tau: float, prev_tau: float,
                           eps: float, sink: Sink | None = None) -> int:
    """Triangles anchored at ``p`` that are ``tau``-durable but were not reported at ``prev_tau``."""
    if not tau < prev_tau:
        raise InputError("report_delta_triangles needs tau < prev_tau")
    recs = _delta_for_anchor(D, p, tau, prev_tau, eps)
    if sink is not None:
        for r in recs:
            sink(r)
    return len(recs)


class _ThresholdMap:
    """Point id -> (offset, absolute end), scannable by offset."""

    def __init__(self) -> None:
        self.entries: dict[int, tuple[float, float]] = {}
        self._keys: list[tuple[float, int]] = []

    def set(self, p: int, offset: float, end: float) -> None:
        self.remove(p)
        self.entries[p] = (offset, end)
        insort(self._keys, (offset, p))

    def remove(self, p: int) -> None:
        old = self.entries.pop(p, None)
        if old is not None:
            i = bisect_left(self._keys, (old[0], p))
            del self._keys[i]

    def clear(self) -> None:
        self.entries.clear()
        self._keys.clear()

    def scan(self, lo: float, hi: float = POS_INF) -> list[int]:
        """Ids whose offset lies in ``[lo, hi)``."""
        i = bisect_left(self._keys, (lo, -1))
        j = len(self._keys) if hi == POS_INF else bisect_left(self._keys, (hi, -1))
        return [p for _, p in self._keys[i:j]]

    def __contains__(self, p: int) -> bool:
        return p in self.entries

    def __len__(self) -> int:
        return len(self.entries)


class IncrementalSession:
    """Serves a sequence of ``query(tau)`` calls with delta reporting.

    ``query`` with a smaller threshold than the previous one reports exactly
    the newly durable triangles (with the same ``eps`` slack as the offline
    report); a larger threshold reports the full set again; an equal one
    reports nothing.
    """

    def __init__(self, D: DurableBallStructure, eps: float, threads: int = 1) -> None:
        if not (0 < eps <= 1):
            raise InputError("eps must lie in (0, 1]")
        self.D = D
        self.eps = eps
        self.threads = threads
        self._ends = _EndTimes(D)
        ds = D.ds
        self._alpha = _ThresholdMap()
        for p in range(ds.n):
            x = _activation_end(D, self._ends, p, POS_INF, eps)
            if x is not None:
                self._alpha.set(p, x - ds.start_list[p], x)
        self._beta = _ThresholdMap()
        self.prev_tau = POS_INF
        self.cumulative = 0
        # comparisons happen on absolute end times; offsets only pre-select,
        # with a margin covering rounding in ``end - start``
        self._slack = 1e-9 * (1.0 + ds.time_scale())

    @property
    def alpha(self) -> dict[int, float]:
        """Maximum activation value per point (``-inf`` when it anchors nothing)."""
        out = {p: NEG_INF for p in range(self.D.ds.n)}
        for p, (off, _) in self._alpha.entries.items():
            out[p] = off
        return out

    @property
    def beta(self) -> dict[int, float]:
        return {p: off for p, (off, _) in self._beta.entries.items()}

    def reset(self) -> None:
        self._beta.clear()
        self.prev_tau = POS_INF
        self.cumulative = 0

    def _activation(self, p: int, tau: float) -> None:
        s_p = self.D.ds.start_list[p]
        x = _activation_end(self.D, self._ends, p, durable_end(s_p, tau), self.eps)
        if x is None:
            self._beta.remove(p)
        else:
            self._beta.set(p, x - s_p, x)

    def query(self, tau: float, sink: Sink | None = None) -> int:
        if not tau > 0:
            raise InputError("tau must be positive")
        starts = self.D.ds.start_list
        prev = self.prev_tau
        eps = self.eps
        count = 0
        if tau == prev:
            pass
        elif tau > prev:
            anchors = sorted(
                p for p in self._alpha.scan(tau - self._slack)
                if self._alpha.entries[p][1] >= durable_end(starts[p], tau)
            )
            count = drive(anchors, lambda p: triangles_for_anchor(self.D, p, tau, eps),
                          sink, self.threads)
            self._beta.clear()
            for p in anchors:
                self._activation(p, tau)
        else:
            hi = POS_INF if prev == POS_INF else prev + self._slack
            fresh = set()
            for p in self._alpha.scan(tau - self._slack, hi):
                a_end = self._alpha.entries[p][1]
                if a_end >= durable_end(starts[p], tau) and (
                        prev == POS_INF or a_end < durable_end(starts[p], prev)):
                    fresh.add(p)
            again = {
                p for p in self._beta.scan(tau - self._slack)
                if self._beta.entries[p][1] >= durable_end(starts[p], tau)
            }
            overlap = fresh & again
            if overlap:
                logger.debug("anchors both fresh and re-activated: %s", sorted(overlap))
            again -= fresh
            anchors = sorted(fresh | again)

            def work(p: int) -> list[TriangleRecord]:
                if p in fresh:
                    return triangles_for_anchor(self.D, p, tau, eps)
                return _delta_for_anchor(self.D, p, tau, prev, eps)

            count = drive(anchors, work, sink, self.threads)
            for p in anchors:
                self._activation(p, tau)
        self.prev_tau = tau
        self.cumulative += count
        return count
