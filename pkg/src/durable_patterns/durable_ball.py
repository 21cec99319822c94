"""Cover tree whose nodes carry interval indexes over their subtree points.

A durable ball query around ``p`` returns, per canonical ball, the ranges of
points that started before ``p`` (anchor rule) and are still alive at
``start_p + tau``. Node indexes are built on first use, since a query only
touches canonical nodes at one granularity; ``materialize()`` builds all of
them up front.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from .core import Dataset, InputError, POS_INF, durable_end
from .covertree import CanonicalBall, CoverTree
from .intervals import (
    CanonicalRange,
    DurableIntervalIndex,
    MaxOverlapIndex,
    SumAnnotatedIndex,
    flatten,
)

__all__ = ["DurableBallStructure", "DurableSubset"]


@dataclass
class DurableSubset:
    """Temporal candidates inside one canonical ball.

    ``below``/``above`` are filled by split queries: candidates ending before
    the split time and at or after it.
    """

    ball: CanonicalBall
    candidates: list[CanonicalRange]
    below: list[CanonicalRange] | None = None
    above: list[CanonicalRange] | None = None

    @property
    def rep(self) -> int:
        return self.ball.rep

    def ids(self) -> list[int]:
        return flatten(self.candidates)

    def count(self) -> int:
        return sum(len(r) for r in self.candidates)


@dataclass
class DurableBallStructure:
    ds: Dataset
    with_aggregates: bool = False
    tree: CoverTree = field(init=False)

    def __post_init__(self) -> None:
        self.tree = CoverTree(self.ds.coords, self.ds.metric)
        t = self.tree
        k = t.num_nodes
        self._index: list[DurableIntervalIndex | None] = [None] * k
        self._overlap: list[MaxOverlapIndex | None] = [None] * k
        self._lock = threading.Lock()
        # subtree summaries used to skip subtrees with no temporal candidate
        self.node_min_start = np.full(k, POS_INF)
        self.node_max_end = np.full(k, -POS_INF)
        starts, ends = self.ds.starts, self.ds.ends
        for node in range(k - 1, -1, -1):
            kids = t.node_children[node]
            if kids:
                self.node_min_start[node] = self.node_min_start[kids].min()
                self.node_max_end[node] = self.node_max_end[kids].max()
            else:
                pts = t.members(node)
                self.node_min_start[node] = starts[pts].min()
                self.node_max_end[node] = ends[pts].max()
        self._min_start: list[float] = self.node_min_start.tolist()
        self._max_end: list[float] = self.node_max_end.tolist()

    # -- per-node indexes -----------------------------------------------------

    def index(self, node: int) -> DurableIntervalIndex:
        idx = self._index[node]
        if idx is None:
            with self._lock:
                idx = self._index[node]
                if idx is None:
                    pts = self.tree.members(node)
                    cls = SumAnnotatedIndex if self.with_aggregates else DurableIntervalIndex
                    idx = cls(pts, self.ds.starts[pts], self.ds.ends[pts])
                    self._index[node] = idx
        return idx

    def sum_index(self, node: int) -> SumAnnotatedIndex:
        if not self.with_aggregates:
            raise InputError("structure was built without aggregate indexes")
        return self.index(node)  # type: ignore[return-value]

    def overlap_index(self, node: int) -> MaxOverlapIndex:
        if not self.with_aggregates:
            raise InputError("structure was built without aggregate indexes")
        idx = self._overlap[node]
        if idx is None:
            with self._lock:
                idx = self._overlap[node]
                if idx is None:
                    pts = self.tree.members(node)
                    idx = MaxOverlapIndex(pts, self.ds.starts[pts], self.ds.ends[pts])
                    self._overlap[node] = idx
        return idx

    def materialize(self) -> DurableBallStructure:
        for node in range(self.tree.num_nodes):
            self.index(node)
            if self.with_aggregates:
                self.overlap_index(node)
        return self

    def built_index_sizes(self) -> dict[int, int]:
        return {v: len(idx) for v, idx in enumerate(self._index) if idx is not None}

    # -- queries --------------------------------------------------------------

    def canonical_balls(self, p: int, eps: float, radius: float = 1.0) -> list[CanonicalBall]:
        """All canonical balls around ``p``, with no temporal filter."""
        return self.tree.ball_report(self.ds.coords[p], radius, eps)

    def _query(self, p: int, end_lo: float, end_split: float | None,
               eps: float, radius: float) -> list[DurableSubset]:
        if self.ds.n == 0:
            return []
        s_p = self.ds.start_list[p]
        min_start, max_end = self._min_start, self._max_end

        def prune(node: int) -> bool:
            return min_start[node] > s_p or max_end[node] < end_lo

        out: list[DurableSubset] = []
        for ball in self.tree.ball_report(self.ds.coords[p], radius, eps, prune):
            idx = self.index(ball.node)
            if end_split is None:
                ranges = idx.durable_candidates(s_p, end_lo, POS_INF, pid=p)
                if ranges:
                    out.append(DurableSubset(ball, ranges))
            else:
                below, above = idx.partition(s_p, end_lo, end_split, pid=p)
                if below or above:
                    out.append(DurableSubset(ball, below + above, below, above))
        return out

    def durable_ball_query(self, p: int, tau: float, eps: float,
                           radius: float = 1.0) -> list[DurableSubset]:
        """Points near ``p`` that started before it and last until ``start_p + tau``.

        Every such point within ``radius`` is reported, none beyond
        ``(1 + eps) * radius``, grouped by canonical ball; balls without a
        candidate are omitted.
        """
        if tau < 0:
            raise InputError("tau must be non-negative")
        return self._query(p, durable_end(float(self.ds.starts[p]), tau), None, eps, radius)

    def durable_ball_query_prime(self, p: int, tau_lo: float, tau_hi: float, eps: float,
                                 radius: float = 1.0) -> list[DurableSubset]:
        """Like ``durable_ball_query(tau_lo)``, with candidates split at ``start_p + tau_hi``."""
        if not (0 <= tau_lo < tau_hi):
            raise InputError("durable_ball_query_prime needs 0 <= tau_lo < tau_hi")
        return self.split_query(p, tau_lo, tau_hi, eps, radius)

    def split_query(self, p: int, tau_lo: float, tau_hi: float, eps: float,
                    radius: float = 1.0) -> list[DurableSubset]:
        """Unchecked split query; ``tau_hi`` may be infinite."""
        s_p = float(self.ds.starts[p])
        split = POS_INF if tau_hi == POS_INF else durable_end(s_p, tau_hi)
        return self._query(p, durable_end(s_p, tau_lo), split, eps, radius)

    def split_query_abs(self, p: int, end_lo: float, end_split: float, eps: float,
                        radius: float = 1.0) -> list[DurableSubset]:
        """Split query phrased with absolute end times instead of offsets."""
        return self._query(p, end_lo, end_split, eps, radius)
