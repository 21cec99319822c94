"""Pairs kept alive by their common neighbours.

For a pair ``(p, q)`` within distance 1, the witnesses are the points near
both of them. A pair is SUM-durable when the witnesses' lifespans, clipped to
the pair's common lifespan ``J``, add up to at least ``tau``. It is
(tau, kappa)-UNION-durable when some ``kappa`` witnesses jointly cover at
least ``tau`` of ``J``.

Both reporters walk anchors as the triangle code does. Within one canonical
ball, candidates ``q`` are visited by decreasing end time, so ``J`` only
shrinks; the aggregate can then only drop, and the first failure ends the
ball.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Iterable

from .core import InputError, POS_INF, durable_end
from .covertree import CanonicalBall
from .durable_ball import DurableBallStructure
from .intervals import iter_by_end_desc
from .patterns import Sink, close_matrix, drive

__all__ = ["PairRecord", "report_sum_pairs", "report_union_pairs", "greedy_cover", "UNION_FACTOR"]

UNION_FACTOR = 1.0 - 1.0 / math.e


@dataclass(frozen=True, order=True)
class PairRecord:
    p: int
    q: int
    agg: str
    value: float

    def key(self) -> tuple[int, int]:
        return (self.p, self.q)


def _check(D: DurableBallStructure, tau: float, eps: float) -> None:
    if tau < 0:
        raise InputError("tau must be non-negative")
    if not (0 < eps <= 1):
        raise InputError("eps must lie in (0, 1]")
    if not D.with_aggregates:
        raise InputError("pair aggregates need a structure built with_aggregates=True")


def _neighbourhood(D: DurableBallStructure, p: int, eps: float):
    """Canonical balls around ``p``, their closeness matrix, and the ball holding ``p``."""
    balls = D.canonical_balls(p, eps / 2)
    close = close_matrix(D.ds, [b.rep for b in balls], 1 + eps / 2)
    tree = D.tree
    pos = tree.position[p]
    home = next(i for i, b in enumerate(balls)
                if tree.node_lo[b.node] <= pos < tree.node_hi[b.node])
    return balls, close, home


def _candidates(D: DurableBallStructure, ball: CanonicalBall, p: int, end_lo: float) -> list[int]:
    s_p = D.ds.start_list[p]
    ranges = D.index(ball.node).durable_candidates(s_p, end_lo, POS_INF, pid=p)
    return list(iter_by_end_desc(ranges))


# -- SUM ------------------------------------------------------------------------

def sum_pairs_for_anchor(D: DurableBallStructure, p: int, tau: float,
                         eps: float) -> list[PairRecord]:
    ds = D.ds
    s_p, e_p = ds.start_list[p], ds.end_list[p]
    balls, close, home = _neighbourhood(D, p, eps)
    out: list[PairRecord] = []
    for j, ball in enumerate(balls):
        # candidates share a moment with p: J = [s_p, min(e_p, e_q)] is non-empty
        cands = _candidates(D, ball, p, s_p)
        if not cands:
            continue
        nodes = [balls[i].node for i in close[j].nonzero()[0].tolist()]
        p_counted = bool(close[j, home])
        for q in cands:
            hi = min(e_p, ds.end_list[q])
            width = hi - s_p
            total = sum(D.sum_index(v).overlap_sum(s_p, hi) for v in nodes)
            # p and q each cover J completely; they are not their own witnesses
            total -= width * (2 if p_counted else 1)
            if total >= tau:
                out.append(PairRecord(p, q, "sum", total))
            else:
                break
    return out


def report_sum_pairs(D: DurableBallStructure, tau: float, eps: float, sink: Sink | None = None,
                     threads: int = 1) -> int:
    """Report pairs whose witnesses' clipped lifespans add up to at least ``tau``.

    Every exact pair is reported once, under the later-starting point; every
    reported pair is within ``1 + eps`` and reaches ``tau`` counting
    witnesses within ``1 + eps``.
    """
    _check(D, tau, eps)
    return drive(range(D.ds.n), lambda p: sum_pairs_for_anchor(D, p, tau, eps), sink, threads)


# -- UNION ----------------------------------------------------------------------

def greedy_cover(best, lo: float, hi: float, kappa: int) -> tuple[float, list[int]]:
    """Greedy maximum coverage of ``[lo, hi]`` with at most ``kappa`` intervals.

    ``best(a, b)`` returns ``(id, start, end)`` of an interval with maximum
    overlap with ``[a, b]``, or ``None``. Intervals that straddle a chosen one
    would have beaten it, so each remaining interval overlaps at most one
    uncovered segment and the per-segment best is the true greedy choice.
    Returns the covered length and the chosen ids.
    """
    heap: list[tuple[float, int, float, float, float, float]] = []

    def push(a: float, b: float) -> None:
        if b <= a:
            return
        found = best(a, b)
        if found is None:
            return
        wid, ws, we = found
        ov = min(we, b) - max(ws, a)
        if ov > 0:
            heapq.heappush(heap, (-ov, wid, a, b, ws, we))

    push(lo, hi)
    covered = 0.0
    chosen: list[int] = []
    while heap and len(chosen) < kappa:
        neg_ov, wid, a, b, ws, we = heapq.heappop(heap)
        covered += -neg_ov
        chosen.append(wid)
        push(a, max(a, ws))
        push(min(b, we), b)
    return covered, chosen


def union_pairs_for_anchor(D: DurableBallStructure, p: int, tau: float, kappa: int,
                           eps: float) -> list[PairRecord]:
    ds = D.ds
    s_p, e_p = ds.start_list[p], ds.end_list[p]
    end_lo = durable_end(s_p, tau)
    if e_p < end_lo:
        return []
    balls, close, _ = _neighbourhood(D, p, eps)
    starts, ends = ds.start_list, ds.end_list
    need = UNION_FACTOR * tau
    out: list[PairRecord] = []
    for j, ball in enumerate(balls):
        cands = _candidates(D, ball, p, end_lo)
        if not cands:
            continue
        indexes = [D.overlap_index(balls[i].node) for i in close[j].nonzero()[0].tolist()]
        for q in cands:
            skip = (p, q)

            def best(a: float, b: float):
                top = None
                for idx in indexes:
                    r = idx.max_overlap(a, b, skip)
                    if r is not None and (top is None or (-r[1], r[0]) < (-top[1], top[0])):
                        top = r
                if top is None:
                    return None
                return top[0], starts[top[0]], ends[top[0]]

            t, _ = greedy_cover(best, s_p, min(e_p, ends[q]), kappa)
            if t >= need:
                out.append(PairRecord(p, q, "union", t))
            else:
                break
    return out


def report_union_pairs(D: DurableBallStructure, tau: float, kappa: int, eps: float,
                       sink: Sink | None = None, threads: int = 1) -> int:
    """Report pairs whose common lifespan ``kappa`` witnesses can largely cover.

    Every pair with a witness set of size at most ``kappa`` covering ``tau``
    is reported; every reported pair has greedy coverage at least
    ``(1 - 1/e) * tau`` using witnesses within ``1 + eps``.
    """
    if kappa < 1:
        raise InputError("kappa must be >= 1")
    _check(D, tau, eps)
    return drive(range(D.ds.n), lambda p: union_pairs_for_anchor(D, p, tau, kappa, eps),
                 sink, threads)


def pair_keys(records: Iterable[PairRecord]) -> list[tuple[int, int]]:
    return [r.key() for r in records]
