"""Offline reporting of durable triangles, cliques, paths and stars.

Each pattern is reported once, under its anchor (the member with the latest
start, ties to the larger id). For every anchor ``p`` that lives at least
``tau`` a durable ball query collects the other possible members, grouped in
canonical balls of diameter at most ``eps/2``. Two balls whose
representatives are within ``1 + eps/2`` of each other are "close": any pair
taken across them is within ``1 + eps``, and any pair within distance 1
always lands in close balls. Patterns are then enumerated ball-by-ball, so
the work beyond the ball queries is proportional to the output.
"""

from __future__ import annotations

from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations, permutations, product
from typing import Callable, Iterable, Sequence

import numpy as np

from .core import InputError, is_durable
from .durable_ball import DurableBallStructure, DurableSubset

__all__ = [
    "TriangleRecord",
    "PatternRecord",
    "report_triangles",
    "report_cliques",
    "report_paths",
    "report_stars",
    "triangles_for_anchor",
    "close_pairs",
    "MAX_PATTERN_SIZE",
]

MAX_PATTERN_SIZE = 6


@dataclass(frozen=True, order=True)
class TriangleRecord:
    anchor: int
    q: int
    s: int
    t0: float
    t1: float

    def key(self) -> tuple[int, int, int]:
        return (self.anchor, min(self.q, self.s), max(self.q, self.s))

    @property
    def durability(self) -> float:
        return self.t1 - self.t0


@dataclass(frozen=True, order=True)
class PatternRecord:
    """A clique, path or star.

    ``members`` order: cliques list the anchor then the rest ascending; paths
    list the vertices along the path, oriented so the sequence is smaller
    than its reverse; stars list the center then the leaves ascending.
    """

    kind: str
    members: tuple[int, ...]
    anchor: int
    t0: float
    t1: float

    def key(self):
        if self.kind == "clique":
            return tuple(sorted(self.members))
        if self.kind == "star":
            return (self.members[0], tuple(sorted(self.members[1:])))
        return self.members


Sink = Callable[[object], None]


def close_matrix(ds, reps: Sequence[int], limit: float) -> np.ndarray:
    """Which representatives lie within ``limit`` of each other (diagonal set)."""
    close = ds.metric.distance_matrix(ds.coords[list(reps)]) <= limit
    np.fill_diagonal(close, True)
    return close


def close_pairs(ds, reps: Sequence[int], limit: float) -> list[tuple[int, int]]:
    """Index pairs ``i < j`` of ``reps`` whose points are within ``limit``."""
    if len(reps) < 2:
        return []
    i, j = np.nonzero(np.triu(close_matrix(ds, reps, limit), 1))
    return list(zip(i.tolist(), j.tolist()))


def drive(anchors: Iterable[int], work: Callable[[int], list], sink: Sink | None,
          threads: int = 1) -> int:
    """Run ``work`` per anchor and feed results to ``sink`` in anchor order."""
    if threads < 1:
        raise InputError("threads must be >= 1")
    count = 0
    if threads == 1:
        results = map(work, anchors)
        for recs in results:
            count += len(recs)
            if sink is not None:
                for r in recs:
                    sink(r)
        return count
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for recs in pool.map(work, list(anchors)):
            count += len(recs)
            if sink is not None:
                for r in recs:
                    sink(r)
    return count


def _check_eps_tau(tau: float, eps: float) -> None:
    if tau < 0:
        raise InputError("tau must be non-negative")
    if not (0 < eps <= 1):
        raise InputError("eps must lie in (0, 1]")


def _lives(D: DurableBallStructure, p: int, tau: float) -> bool:
    return is_durable(D.ds.start_list[p], D.ds.end_list[p], tau)


def _groups(subsets: list[DurableSubset]) -> list[list[int]]:
    return [sub.ids() for sub in subsets]


# -- triangles ------------------------------------------------------------------

def triangles_for_anchor(D: DurableBallStructure, p: int, tau: float,
                         eps: float) -> list[TriangleRecord]:
    """All reported triangles anchored at ``p``."""
    ds = D.ds
    if not _lives(D, p, tau):
        return []
    subsets = D.durable_ball_query(p, tau, eps / 2)
    groups = _groups(subsets)
    ends = ds.end_list
    s_p = ds.start_list[p]
    e_p = ends[p]
    out: list[TriangleRecord] = []
    for g in groups:
        for q, s in combinations(g, 2):
            out.append(TriangleRecord(p, q, s, s_p, min(e_p, ends[q], ends[s])))
    for i, j in close_pairs(ds, [sub.rep for sub in subsets], 1 + eps / 2):
        for q in groups[i]:
            e_pq = min(e_p, ends[q])
            for s in groups[j]:
                out.append(TriangleRecord(p, q, s, s_p, min(e_pq, ends[s])))
    return out


def report_triangles(D: DurableBallStructure, tau: float, eps: float, sink: Sink | None = None,
                     threads: int = 1, anchors: Iterable[int] | None = None) -> int:
    """Report every ``tau``-durable triangle and possibly some ``eps``-triangles.

    Every triangle with pairwise distances at most 1 and common lifespan at
    least ``tau`` is reported exactly once; every reported triple has pairwise
    distances at most ``1 + eps`` and common lifespan at least ``tau``.
    Returns the number of records.
    """
    _check_eps_tau(tau, eps)
    anchors = range(D.ds.n) if anchors is None else anchors
    return drive(anchors, lambda p: triangles_for_anchor(D, p, tau, eps), sink, threads)


# -- cliques --------------------------------------------------------------------

def _check_size(m: int, lo: int) -> None:
    if not (lo <= m <= MAX_PATTERN_SIZE):
        raise InputError(f"pattern size must lie in [{lo}, {MAX_PATTERN_SIZE}]")


def _record(kind: str, members: tuple[int, ...], p: int, ds) -> PatternRecord:
    t1 = min(ds.end_list[x] for x in members)
    return PatternRecord(kind, members, p, ds.start_list[p], t1)


def cliques_for_anchor(D: DurableBallStructure, p: int, m: int, tau: float,
                       eps: float) -> list[PatternRecord]:
    ds = D.ds
    if not _lives(D, p, tau):
        return []
    subsets = D.durable_ball_query(p, tau, eps / 2)
    groups = _groups(subsets)
    close = close_matrix(ds, [sub.rep for sub in subsets], 1 + eps / 2)
    k = len(groups)
    out: list[PatternRecord] = []

    def emit(chosen: list[int]) -> None:
        counts = Counter(chosen)
        parts = [combinations(groups[i], c) for i, c in sorted(counts.items())]
        for combo in product(*parts):
            rest = sorted(x for part in combo for x in part)
            out.append(_record("clique", (p, *rest), p, ds))

    def extend(start: int, chosen: list[int], used: Counter) -> None:
        if len(chosen) == m - 1:
            emit(chosen)
            return
        for i in range(start, k):
            if used[i] >= len(groups[i]):
                continue
            if any(not close[i, j] for j in used):
                continue
            used[i] += 1
            chosen.append(i)
            extend(i, chosen, used)
            chosen.pop()
            used[i] -= 1
            if used[i] == 0:
                del used[i]

    extend(0, [], Counter())
    return out


def report_cliques(D: DurableBallStructure, m: int, tau: float, eps: float,
                   sink: Sink | None = None, threads: int = 1) -> int:
    """Report ``m``-cliques (all pairs within 1) whose members share ``tau`` of lifespan."""
    _check_size(m, 3)
    _check_eps_tau(tau, eps)
    return drive(range(D.ds.n), lambda p: cliques_for_anchor(D, p, m, tau, eps), sink, threads)


# -- paths ----------------------------------------------------------------------

def paths_for_anchor(D: DurableBallStructure, p: int, m: int, tau: float,
                     eps: float) -> list[PatternRecord]:
    ds = D.ds
    if not _lives(D, p, tau):
        return []
    radius = float(m - 1)
    # finer query granularity keeps balls at diameter eps/2 in absolute terms
    subsets = D.durable_ball_query(p, tau, eps / (2 * radius), radius=radius)
    groups = [[p]] + _groups(subsets)
    close = close_matrix(ds, [p] + [sub.rep for sub in subsets], 1 + eps / 2)
    k = len(groups)
    out: list[PatternRecord] = []
    walk: list[int] = []
    used = Counter()

    def emit() -> None:
        slots: dict[int, list[int]] = {}
        for pos, b in enumerate(walk):
            slots.setdefault(b, []).append(pos)
        items = sorted(slots.items())
        for choice in product(*(permutations(groups[b], len(pos)) for b, pos in items)):
            seq = [0] * m
            for (b, positions), pts in zip(items, choice):
                for pos, x in zip(positions, pts):
                    seq[pos] = x
            t = tuple(seq)
            if t < t[::-1]:
                out.append(_record("path", t, p, ds))

    def extend() -> None:
        if len(walk) == m:
            if used[0] == 1:
                emit()
            return
        last = walk[-1] if walk else None
        for b in range(k):
            if used[b] >= len(groups[b]):
                continue
            if last is not None and not close[last, b]:
                continue
            if used[0] == 0 and b != 0 and m - len(walk) == 1:
                continue
            used[b] += 1
            walk.append(b)
            extend()
            walk.pop()
            used[b] -= 1

    extend()
    return out


def report_paths(D: DurableBallStructure, m: int, tau: float, eps: float,
                 sink: Sink | None = None, threads: int = 1) -> int:
    """Report simple paths on ``m`` points with consecutive hops within 1."""
    _check_size(m, 2)
    _check_eps_tau(tau, eps)
    return drive(range(D.ds.n), lambda p: paths_for_anchor(D, p, m, tau, eps), sink, threads)


# -- stars ----------------------------------------------------------------------

def stars_for_anchor(D: DurableBallStructure, p: int, m: int, tau: float,
                     eps: float) -> list[PatternRecord]:
    ds = D.ds
    if not _lives(D, p, tau):
        return []
    radius = 2.0
    subsets = D.durable_ball_query(p, tau, eps / (2 * radius), radius=radius)
    groups = _groups(subsets)
    reps = [sub.rep for sub in subsets]
    limit = 1 + eps / 2
    close = close_matrix(ds, reps, limit)
    near_p = ds.metric.to_many(ds.coords[p], ds.coords[reps]) <= limit if reps else np.zeros(0, bool)
    sizes = np.array([len(g) for g in groups], dtype=int)
    out: list[PatternRecord] = []

    # p at the center: leaves from every ball close to p
    pool = [x for i in np.flatnonzero(near_p).tolist() for x in groups[i]]
    for leaves in combinations(sorted(pool), m - 1):
        out.append(_record("star", (p, *leaves), p, ds))

    # p as a leaf: the center sits in a ball close to p
    for j in np.flatnonzero(near_p).tolist():
        nbr = np.flatnonzero(close[j]).tolist()
        if int(sizes[nbr].sum()) - 1 < m - 2:
            continue
        pool_j = sorted(x for i in nbr for x in groups[i])
        for c in groups[j]:
            others = [x for x in pool_j if x != c]
            for rest in combinations(others, m - 2):
                leaves = tuple(sorted((p, *rest)))
                out.append(_record("star", (c, *leaves), p, ds))
    return out


def report_stars(D: DurableBallStructure, m: int, tau: float, eps: float,
                 sink: Sink | None = None, threads: int = 1) -> int:
    """Report stars: a center within 1 of each of its ``m - 1`` leaves."""
    _check_size(m, 2)
    _check_eps_tau(tau, eps)
    return drive(range(D.ds.n), lambda p: stars_for_anchor(D, p, m, tau, eps), sink, threads)
