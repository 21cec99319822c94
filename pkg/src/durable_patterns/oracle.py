"""Brute-force reference answers for every query type.

Everything here works from the definitions: all pairwise distances, all
triples or subsets, direct lifespan arithmetic. Only the anchor rule and the
durability comparison are shared with the engine (``core``), so that both
sides classify boundary cases identically. ``relax`` widens the distance
threshold from 1 to ``1 + relax``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .core import (
    NEG_INF,
    Dataset,
    InputError,
    anchor_of,
    durable_end,
    earlier_mask,
    is_durable,
)

__all__ = [
    "OracleConfig",
    "OracleLimitError",
    "oracle_triangles",
    "oracle_cliques",
    "oracle_paths",
    "oracle_stars",
    "oracle_sum_pairs",
    "oracle_union_pairs",
    "oracle_activation",
    "union_length",
]


class OracleLimitError(InputError):
    """The instance is too large for exhaustive enumeration."""


@dataclass(frozen=True)
class OracleConfig:
    relax: float = 0.0
    limits: dict[str, int] = field(default_factory=lambda: {
        "triangles": 200,
        "cliques": 40,
        "paths": 40,
        "stars": 40,
        "sum": 200,
        "union": 12,
        "kappa": 3,
    })

    def check(self, problem: str, n: int) -> None:
        cap = self.limits[problem]
        if n > cap:
            raise OracleLimitError(f"oracle for {problem} is limited to n <= {cap} (got {n})")


DEFAULT = OracleConfig()


def adjacency(ds: Dataset, relax: float = 0.0) -> np.ndarray:
    if relax < 0:
        raise InputError("relax must be non-negative")
    if ds.n == 0:
        return np.zeros((0, 0), dtype=bool)
    adj = ds.metric.pairwise(ds.coords) <= 1.0 + relax
    np.fill_diagonal(adj, False)
    return adj


def _anchored_candidates(ds: Dataset, adj: np.ndarray, p: int, tau: float) -> np.ndarray:
    s_p = float(ds.starts[p])
    mask = earlier_mask(ds.starts, np.arange(ds.n), s_p, p)
    mask &= adj[p]
    mask &= ds.ends >= durable_end(s_p, tau)
    return np.flatnonzero(mask)


def oracle_triangles(ds: Dataset, tau: float, relax: float = 0.0,
                     config: OracleConfig = DEFAULT) -> set[tuple[int, int, int]]:
    """All ``(anchor, a, b)`` with ``a < b`` forming a ``tau``-durable triangle."""
    config.check("triangles", ds.n)
    adj = adjacency(ds, relax)
    out: set[tuple[int, int, int]] = set()
    for p in range(ds.n):
        if not is_durable(float(ds.starts[p]), float(ds.ends[p]), tau):
            continue
        idx = _anchored_candidates(ds, adj, p, tau)
        if idx.size < 2:
            continue
        sub = np.triu(adj[np.ix_(idx, idx)], 1)
        for i, j in zip(*np.nonzero(sub)):
            a, b = int(idx[i]), int(idx[j])
            out.add((p, min(a, b), max(a, b)))
    return out


def _durable_set(ds: Dataset, members, tau: float) -> bool:
    members = list(members)
    p = anchor_of(ds, members)
    return is_durable(float(ds.starts[p]), float(min(ds.ends[members])), tau)


def oracle_cliques(ds: Dataset, m: int, tau: float, relax: float = 0.0,
                   config: OracleConfig = DEFAULT) -> set[tuple[int, ...]]:
    """Sorted member tuples of all ``tau``-durable ``m``-cliques."""
    config.check("cliques", ds.n)
    adj = adjacency(ds, relax)
    out = set()
    for combo in combinations(range(ds.n), m):
        if all(adj[a, b] for a, b in combinations(combo, 2)) and _durable_set(ds, combo, tau):
            out.add(combo)
    return out


def oracle_paths(ds: Dataset, m: int, tau: float, relax: float = 0.0,
                 config: OracleConfig = DEFAULT) -> set[tuple[int, ...]]:
    """Simple paths on ``m`` points, each oriented to be smaller than its reverse."""
    config.check("paths", ds.n)
    adj = adjacency(ds, relax)
    nbrs = [np.flatnonzero(adj[i]).tolist() for i in range(ds.n)]
    out = set()

    def grow(path: list[int]) -> None:
        if len(path) == m:
            t = tuple(path)
            if t < t[::-1] and _durable_set(ds, t, tau):
                out.add(t)
            return
        for x in nbrs[path[-1]]:
            if x not in path:
                path.append(x)
                grow(path)
                path.pop()

    for v in range(ds.n):
        grow([v])
    return out


def oracle_stars(ds: Dataset, m: int, tau: float, relax: float = 0.0,
                 config: OracleConfig = DEFAULT) -> set[tuple[int, tuple[int, ...]]]:
    """``(center, leaves)`` for all stars with ``m - 1`` leaves."""
    config.check("stars", ds.n)
    adj = adjacency(ds, relax)
    out = set()
    for c in range(ds.n):
        nb = np.flatnonzero(adj[c]).tolist()
        for leaves in combinations(nb, m - 1):
            if _durable_set(ds, (c, *leaves), tau):
                out.add((c, leaves))
    return out


def _pair_anchor(ds: Dataset, a: int, b: int) -> tuple[int, int]:
    p = anchor_of(ds, (a, b))
    return (p, b if p == a else a)


def _common(ds: Dataset, a: int, b: int) -> tuple[float, float] | None:
    lo = max(float(ds.starts[a]), float(ds.starts[b]))
    hi = min(float(ds.ends[a]), float(ds.ends[b]))
    return (lo, hi) if lo <= hi else None


def sum_values(ds: Dataset, relax: float = 0.0,
               config: OracleConfig = DEFAULT) -> dict[tuple[int, int], float]:
    """SUM aggregate of every adjacent pair with a common lifespan, keyed ``(anchor, other)``."""
    config.check("sum", ds.n)
    adj = adjacency(ds, relax)
    out: dict[tuple[int, int], float] = {}
    for a, b in zip(*np.nonzero(np.triu(adj, 1))):
        a, b = int(a), int(b)
        j = _common(ds, a, b)
        if j is None:
            continue
        total = 0.0
        for w in np.flatnonzero(adj[a] & adj[b]).tolist():
            total += max(0.0, min(float(ds.ends[w]), j[1]) - max(float(ds.starts[w]), j[0]))
        out[_pair_anchor(ds, a, b)] = total
    return out


def oracle_sum_pairs(ds: Dataset, tau: float, relax: float = 0.0,
                     config: OracleConfig = DEFAULT) -> set[tuple[int, int]]:
    return {k for k, v in sum_values(ds, relax, config).items() if v >= tau}


def union_length(segments: list[tuple[float, float]]) -> float:
    total = 0.0
    cur_lo = cur_hi = None
    for lo, hi in sorted(segments):
        if hi <= lo:
            continue
        if cur_hi is None or lo > cur_hi:
            if cur_hi is not None:
                total += cur_hi - cur_lo
            cur_lo, cur_hi = lo, hi
        else:
            cur_hi = max(cur_hi, hi)
    if cur_hi is not None:
        total += cur_hi - cur_lo
    return total


def union_values(ds: Dataset, kappa: int, relax: float = 0.0,
                 config: OracleConfig = DEFAULT) -> dict[tuple[int, int], float]:
    """Best coverage of the common lifespan by at most ``kappa`` witnesses, per pair."""
    if kappa < 1:
        raise InputError("kappa must be >= 1")
    config.check("union", ds.n)
    if kappa > config.limits["kappa"]:
        raise OracleLimitError(f"oracle for union is limited to kappa <= {config.limits['kappa']}")
    adj = adjacency(ds, relax)
    out: dict[tuple[int, int], float] = {}
    for a, b in zip(*np.nonzero(np.triu(adj, 1))):
        a, b = int(a), int(b)
        j = _common(ds, a, b)
        if j is None:
            continue
        segs = []
        for w in np.flatnonzero(adj[a] & adj[b]).tolist():
            lo, hi = max(float(ds.starts[w]), j[0]), min(float(ds.ends[w]), j[1])
            if lo < hi:
                segs.append((lo, hi))
        best = 0.0
        for size in range(1, min(kappa, len(segs)) + 1):
            for subset in combinations(segs, size):
                best = max(best, union_length(list(subset)))
        out[_pair_anchor(ds, a, b)] = best
    return out


def oracle_union_pairs(ds: Dataset, tau: float, kappa: int, relax: float = 0.0,
                       config: OracleConfig = DEFAULT) -> set[tuple[int, int]]:
    return {k for k, v in union_values(ds, kappa, relax, config).items() if v >= tau}


def oracle_activation(ds: Dataset, p: int, tau: float = math.inf, relax: float = 0.0,
                      config: OracleConfig = DEFAULT) -> float:
    """Largest durability below ``tau`` of a triangle anchored at ``p``, or ``-inf``."""
    config.check("triangles", ds.n)
    adj = adjacency(ds, relax)
    s_p = float(ds.starts[p])
    idx = _anchored_candidates(ds, adj, p, 0.0)
    limit = math.inf if tau == math.inf else durable_end(s_p, tau)
    best = NEG_INF
    e_p = float(ds.ends[p])
    for i, j in combinations(idx.tolist(), 2):
        if not adj[i, j]:
            continue
        end = min(e_p, float(ds.ends[i]), float(ds.ends[j]))
        if end >= s_p and end < limit:
            best = max(best, end - s_p)
    return best
