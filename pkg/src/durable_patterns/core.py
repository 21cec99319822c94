"""Temporal points, lifespans and metrics.

Every other module consumes the types defined here. The comparison helpers at
the bottom (``precedes``, ``earlier_mask``, ``durable_end``) are the single
source of the anchor rule and the durability test; the engine and the
brute-force oracle both go through them.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)

NEG_INF = float("-inf")
POS_INF = float("inf")


class InputError(ValueError):
    """Raised when arguments or input data violate a precondition."""


@dataclass(frozen=True, order=True)
class Lifespan:
    """Closed time interval ``[start, end]``."""

    start: float
    end: float

    def __post_init__(self) -> None:
        if not (self.start <= self.end):
            raise InputError(f"lifespan start {self.start} exceeds end {self.end}")

    @property
    def length(self) -> float:
        return self.end - self.start

    def intersect(self, other: Lifespan) -> Lifespan | None:
        return lifespan_intersection([self, other])


def lifespan_intersection(intervals: Iterable[Lifespan]) -> Lifespan | None:
    """Common part of ``intervals``; ``None`` stands for the empty interval."""
    intervals = list(intervals)
    if not intervals:
        raise InputError("lifespan_intersection needs at least one interval")
    lo = max(iv.start for iv in intervals)
    hi = min(iv.end for iv in intervals)
    if lo > hi:
        return None
    return Lifespan(lo, hi)


def durability(interval: Lifespan | None) -> float:
    return 0.0 if interval is None else interval.length


@dataclass(frozen=True)
class TemporalPoint:
    id: int
    coords: tuple[float, ...]
    lifespan: Lifespan

    @property
    def start(self) -> float:
        return self.lifespan.start

    @property
    def end(self) -> float:
        return self.lifespan.end


class Metric:
    """A distance function over coordinate vectors.

    Use the constructors ``Metric.l1()``, ``Metric.l2()``, ``Metric.linf()``,
    ``Metric.lp(alpha)`` or ``Metric.custom(fn)``. ``pairwise`` and ``to_many``
    are vectorised for the norm metrics and fall back to a Python loop for
    custom callbacks.
    """

    def __init__(self, kind: str, alpha: float | None = None,
                 fn: Callable[[np.ndarray, np.ndarray], float] | None = None) -> None:
        kind = kind.upper()
        if kind not in ("L1", "L2", "LINF", "LP", "CUSTOM"):
            raise InputError(f"unknown metric kind {kind!r}")
        if kind == "LP" and (alpha is None or alpha < 1):
            raise InputError("L_alpha metric needs alpha >= 1")
        if kind == "CUSTOM" and fn is None:
            raise InputError("custom metric needs a distance callback")
        self.kind = kind
        self.alpha = alpha
        self._fn = fn

    @classmethod
    def l1(cls) -> Metric:
        return cls("L1")

    @classmethod
    def l2(cls) -> Metric:
        return cls("L2")

    @classmethod
    def linf(cls) -> Metric:
        return cls("LINF")

    @classmethod
    def lp(cls, alpha: float) -> Metric:
        if alpha == 1:
            return cls("L1")
        if alpha == 2:
            return cls("L2")
        if math.isinf(alpha):
            return cls("LINF")
        return cls("LP", alpha=alpha)

    @classmethod
    def custom(cls, fn: Callable[[np.ndarray, np.ndarray], float]) -> Metric:
        return cls("CUSTOM", fn=fn)

    @classmethod
    def parse(cls, name: str) -> Metric:
        """Parse ``l1``, ``l2``, ``linf`` or ``lp:<alpha>``."""
        key = name.strip().lower()
        if key in ("l1", "manhattan"):
            return cls.l1()
        if key in ("l2", "euclidean"):
            return cls.l2()
        if key in ("linf", "chebyshev", "max"):
            return cls.linf()
        if key.startswith("lp:"):
            return cls.lp(float(key[3:]))
        raise InputError(f"unknown metric {name!r}")

    def __repr__(self) -> str:
        if self.kind == "LP":
            return f"Metric(LP, alpha={self.alpha})"
        return f"Metric({self.kind})"

    def to_many(self, x: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Distances from the vector ``x`` to every row of ``ys``."""
        if ys.shape[0] == 0:
            return np.empty(0)
        if self.kind == "CUSTOM":
            return np.array([float(self._fn(x, y)) for y in ys])
        return self._reduce(np.abs(ys - x))

    def _reduce(self, diff: np.ndarray) -> np.ndarray:
        """Row norms of a 2-d array of absolute coordinate differences."""
        if self.kind == "L2":
            return np.sqrt(np.einsum("ij,ij->i", diff, diff))
        if self.kind == "L1":
            return diff.sum(axis=1)
        if self.kind == "LINF":
            return diff.max(axis=1)
        return (diff ** self.alpha).sum(axis=1) ** (1.0 / self.alpha)

    def distance_matrix(self, xs: np.ndarray) -> np.ndarray:
        """All pairwise distances among the rows of ``xs`` in one vectorised pass.

        Entries equal ``to_many`` bit for bit: the same reductions run on the
        same differences, just stacked into one array.
        """
        k = xs.shape[0]
        if self.kind == "CUSTOM" or k == 0:
            return self.pairwise(xs)
        diff = np.abs(xs[None, :, :] - xs[:, None, :]).reshape(k * k, xs.shape[1])
        return self._reduce(diff).reshape(k, k)

    def pairwise(self, xs: np.ndarray, ys: np.ndarray | None = None) -> np.ndarray:
        ys = xs if ys is None else ys
        out = np.empty((xs.shape[0], ys.shape[0]))
        for i in range(xs.shape[0]):
            out[i] = self.to_many(xs[i], ys)
        return out

    def __call__(self, a: Sequence[float], b: Sequence[float]) -> float:
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if a.shape != b.shape:
            raise InputError(f"dimension mismatch: {a.shape} vs {b.shape}")
        return float(self.to_many(a, b[None, :])[0])


def distance(a: TemporalPoint, b: TemporalPoint, metric: Metric) -> float:
    if len(a.coords) != len(b.coords):
        raise InputError("dimension mismatch")
    return metric(a.coords, b.coords)


@dataclass
class Dataset:
    """Points with coordinates and lifespans under one metric.

    ``coords``, ``starts``, ``ends`` are read-only numpy views indexed by point
    id; ids are dense, ``0..n-1``.
    """

    points: list[TemporalPoint]
    metric: Metric = field(default_factory=Metric.l2)
    dim: int | None = None

    def __post_init__(self) -> None:
        pts = sorted(self.points, key=lambda p: p.id)
        if [p.id for p in pts] != list(range(len(pts))):
            seen: set[int] = set()
            for p in pts:
                if p.id in seen:
                    raise InputError(f"duplicate point id {p.id}")
                seen.add(p.id)
            raise InputError("point ids must be dense 0..n-1")
        self.points = pts
        if self.dim is None:
            self.dim = len(pts[0].coords) if pts else 0
        for p in pts:
            if len(p.coords) != self.dim:
                raise InputError(f"point {p.id} has {len(p.coords)} coordinates, expected {self.dim}")
        self.coords = np.array([p.coords for p in pts], dtype=float).reshape(len(pts), self.dim)
        self.starts = np.array([p.start for p in pts], dtype=float)
        self.ends = np.array([p.end for p in pts], dtype=float)
        for arr in (self.coords, self.starts, self.ends):
            arr.setflags(write=False)
        # plain-float copies for scalar hot loops
        self.start_list: list[float] = self.starts.tolist()
        self.end_list: list[float] = self.ends.tolist()
        if not (np.all(np.isfinite(self.coords)) and np.all(np.isfinite(self.starts))
                and np.all(np.isfinite(self.ends))):
            raise InputError("coordinates and times must be finite")

    @classmethod
    def from_arrays(cls, coords, starts, ends, metric: Metric | None = None) -> Dataset:
        coords = np.asarray(coords, dtype=float)
        if coords.ndim == 1:
            coords = coords[:, None]
        pts = [
            TemporalPoint(i, tuple(float(c) for c in coords[i]), Lifespan(float(s), float(e)))
            for i, (s, e) in enumerate(zip(starts, ends))
        ]
        return cls(pts, metric or Metric.l2(), dim=coords.shape[1] if len(pts) else coords.shape[-1])

    def __len__(self) -> int:
        return len(self.points)

    @property
    def n(self) -> int:
        return len(self.points)

    def dist(self, i: int, j: int) -> float:
        return float(self.metric.to_many(self.coords[i], self.coords[j:j + 1])[0])

    def lifespan(self, ids: Iterable[int]) -> Lifespan | None:
        return lifespan_intersection(self.points[i].lifespan for i in ids)

    def max_pair_distance(self, ids: Sequence[int]) -> float:
        return max((self.dist(a, b) for a, b in combinations(ids, 2)), default=0.0)

    def time_scale(self) -> float:
        if self.n == 0:
            return 0.0
        return float(max(np.abs(self.starts).max(), np.abs(self.ends).max()))


def spread(ds: Dataset) -> float:
    """Max over min pairwise distance, by exhaustive scan."""
    if ds.n < 2:
        raise InputError("spread needs at least two points")
    dmax, dmin = 0.0, POS_INF
    for i in range(ds.n - 1):
        d = ds.metric.to_many(ds.coords[i], ds.coords[i + 1:])
        dmax = max(dmax, float(d.max()))
        dmin = min(dmin, float(d.min()))
    if dmin == 0.0:
        logger.warning("duplicate coordinates present; spread is infinite")
        return POS_INF
    return dmax / dmin


# -- anchor rule and durability test -------------------------------------------

def precedes(start_a: float, id_a: int, start_b: float, id_b: int) -> bool:
    """True when ``a`` starts strictly before ``b`` in the (start, id) order.

    The anchor of a pattern is the member that no other member succeeds, i.e.
    the latest start with ties going to the larger id.
    """
    return start_a < start_b or (start_a == start_b and id_a < id_b)


def earlier_mask(starts: np.ndarray, ids: np.ndarray, start: float, pid: int) -> np.ndarray:
    """Vectorised ``precedes(starts[i], ids[i], start, pid)``."""
    return (starts < start) | ((starts == start) & (ids < pid))


def anchor_of(ds: Dataset, ids: Iterable[int]) -> int:
    return max(ids, key=lambda i: (ds.starts[i], i))


def durable_end(start: float, tau: float) -> float:
    """Smallest end time an interval starting at ``start`` needs to last ``tau``."""
    return start + tau


def is_durable(start: float, end: float, tau: float) -> bool:
    return end >= durable_end(start, tau)
