"""Base-2 cover tree with canonical-ball reporting.

Points are inserted one at a time. A point that lands on an existing location
(distance 0) joins that location's bucket instead of creating a new site, so
the level structure only ever sees distinct locations.

Invariants, with ``C_i`` the sites present at level ``i``:

* nesting: a site present at level ``i`` is present at every level below;
* covering: a site whose top level is ``i`` has a parent at level ``i + 1``
  closer than ``2**(i + 1)``;
* separation: two sites of ``C_i`` are at least ``2**i`` apart.

Chains of single children are stored once (path compression). A stored node
covers the logical levels ``bottom..level`` of one site, and its point set is
the contiguous slice ``order[lo:hi]`` of the leaf chain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from .core import Metric, NEG_INF

__all__ = ["CoverTree", "CanonicalBall", "check_invariants", "target_level"]


def _pow2(level: int) -> float:
    return math.ldexp(1.0, level)


def _ceil_level(value: float) -> int:
    """Smallest ``L`` with ``value < 2**L`` (``value > 0``)."""
    return math.frexp(value)[1]


def target_level(eps: float, radius: float) -> int:
    """Largest level whose separating radius is at most ``eps * radius / 4``."""
    return math.frexp(eps * radius / 4.0)[1] - 1


@dataclass(frozen=True)
class CanonicalBall:
    node: int
    rep: int
    tree: "CoverTree"

    @property
    def size(self) -> int:
        return self.tree.node_hi[self.node] - self.tree.node_lo[self.node]

    def members(self) -> list[int]:
        return self.tree.members(self.node)


class CoverTree:
    """Cover tree over the rows of ``coords`` under ``metric``.

    Point ids are row indices. ``ball_report`` answers approximate ball
    queries as a list of disjoint canonical balls.
    """

    def __init__(self, coords: np.ndarray, metric: Metric) -> None:
        coords = np.asarray(coords, dtype=float)
        if coords.ndim == 1:
            coords = coords[:, None]
        self.coords = coords
        self.metric = metric
        n = coords.shape[0]
        self.n = n

        self.site_points: list[list[int]] = []
        self.site_top: list[int] = []
        self.site_parent: list[int] = []
        self._children: list[dict[int, list[int]]] = []
        self._site_coords = np.empty_like(coords)

        self.node_site: list[int] = []
        self.node_rep: list[int] = []
        self.node_level: list[int] = []
        self.node_bottom: list[float] = []
        self.node_children: list[list[int]] = []
        self.node_lo: list[int] = []
        self.node_hi: list[int] = []
        self.order: list[int] = []
        self.position: list[int] = []
        self.top_level = 0

        if n == 0:
            return
        reach = float(metric.to_many(coords[0], coords).max())
        self.top_level = _ceil_level(reach) if reach > 0 else 0
        self._new_site(0, self.top_level, -1)
        for pid in range(1, n):
            self._insert(pid)
        self._compress()

    # -- construction ---------------------------------------------------------

    def _new_site(self, pid: int, top: int, parent: int) -> int:
        s = len(self.site_points)
        self.site_points.append([pid])
        self.site_top.append(top)
        self.site_parent.append(parent)
        self._children.append({})
        self._site_coords[s] = self.coords[pid]
        if parent >= 0:
            self._children[parent].setdefault(top, []).append(s)
        return s

    def _insert(self, pid: int) -> None:
        x = self.coords[pid]
        level = self.top_level
        d_root = float(self.metric.to_many(x, self._site_coords[:1])[0])
        if d_root == 0.0:
            self.site_points[0].append(pid)
            return
        # Q holds the sites of C_level closer than 2**(level+1); any site of a
        # lower level closer than its own separating radius descends from Q.
        cover = [0]
        cover_d = [d_root]
        parent_level, parent = None, -1
        while cover:
            r = _pow2(level)
            best = -1
            best_d = r
            for s, d in zip(cover, cover_d):
                if d < best_d:
                    best, best_d = s, d
            if best >= 0:
                parent_level, parent = level, best
            cand: list[int] = []
            below = level - 1
            for s in cover:
                cand.append(s)
                kids = self._children[s].get(below)
                if kids:
                    cand.extend(kids)
            dists = self.metric.to_many(x, self._site_coords[cand])
            zero = np.flatnonzero(dists == 0.0)
            if zero.size:
                self.site_points[cand[int(zero[0])]].append(pid)
                return
            keep = np.flatnonzero(dists < r)
            cover = [cand[k] for k in keep]
            cover_d = dists[keep].tolist()
            level = below
        self._new_site(pid, parent_level - 1, parent)

    def _compress(self) -> None:
        # iterative pre-order over logical nodes (site, level)
        stack: list[tuple[int, int, int]] = [(0, self.top_level, -1)]
        while stack:
            site, level, parent_node = stack.pop()
            node = len(self.node_site)
            self.node_site.append(site)
            self.node_rep.append(self.site_points[site][0])
            self.node_level.append(level)
            self.node_children.append([])
            self.node_lo.append(len(self.order))
            self.node_hi.append(-1)
            if parent_node >= 0:
                self.node_children[parent_node].append(node)
            attach = [c for c in self._children[site] if c <= level - 1]
            if not attach:
                self.node_bottom.append(NEG_INF)
                self.order.extend(self.site_points[site])
                self._close_leaf(node)
                continue
            c = max(attach)
            self.node_bottom.append(c + 1)
            pushes = [(site, c, node)] + [(k, c, node) for k in self._children[site][c]]
            stack.extend(reversed(pushes))
        self._finish_ranges()

    def _close_leaf(self, node: int) -> None:
        self.node_hi[node] = len(self.order)

    def _finish_ranges(self) -> None:
        # internal nodes end where the last descendant leaf ends
        for node in range(len(self.node_site) - 1, -1, -1):
            kids = self.node_children[node]
            if kids:
                self.node_hi[node] = max(self.node_hi[k] for k in kids)
        self.position = [0] * self.n
        for pos, pid in enumerate(self.order):
            self.position[pid] = pos

    # -- queries --------------------------------------------------------------

    @property
    def root(self) -> int:
        return 0

    @property
    def num_nodes(self) -> int:
        return len(self.node_site)

    def subtree_size(self, node: int) -> int:
        return self.node_hi[node] - self.node_lo[node]

    def members(self, node: int) -> list[int]:
        return self.order[self.node_lo[node]:self.node_hi[node]]

    def iter_members(self, node: int) -> Iterator[int]:
        for pos in range(self.node_lo[node], self.node_hi[node]):
            yield self.order[pos]

    def ball_report(self, center, radius: float, eps: float,
                    prune: Callable[[int], bool] | None = None) -> list[CanonicalBall]:
        """Canonical balls covering the points within ``radius`` of ``center``.

        The balls are disjoint, every point within ``radius`` lies in one of
        them, every member lies within ``eps * radius / 2`` of its ball's
        representative and within ``(1 + eps) * radius`` of ``center``.
        ``prune(node)`` may veto whole subtrees, e.g. on temporal grounds.
        """
        if not (0 < eps <= 1) or not radius > 0:
            raise ValueError("ball_report needs eps in (0, 1] and radius > 0")
        if self.n == 0:
            return []
        x = np.asarray(center, dtype=float)
        t = target_level(eps, radius)
        keep_within = (1.0 + eps / 2.0) * radius
        out: list[CanonicalBall] = []
        if prune is not None and prune(0):
            return []
        # breadth-first, so each level costs one vectorised distance call
        frontier = [0]
        dists = self.metric.to_many(x, self.coords[self.node_rep[0]:self.node_rep[0] + 1]).tolist()
        while frontier:
            expand: list[int] = []
            for node, d in zip(frontier, dists):
                bottom = self.node_bottom[node]
                lv = t if bottom <= t else int(bottom)
                if d > radius + _pow2(lv + 1):
                    continue
                if bottom <= t:
                    if d <= keep_within:
                        out.append(CanonicalBall(node, self.node_rep[node], self))
                    continue
                expand.extend(self.node_children[node])
            if prune is not None:
                expand = [k for k in expand if not prune(k)]
            frontier = expand
            if expand:
                reps = [self.node_rep[k] for k in expand]
                dists = self.metric.to_many(x, self.coords[reps]).tolist()
        return out

    def dump(self) -> str:
        """Indented ``level,repId,r_v,subtreeSize`` lines, one per stored node."""
        lines: list[str] = []
        stack = [(0, 0)]
        while stack:
            node, depth = stack.pop()
            lvl = self.node_level[node]
            lines.append(f"{'  ' * depth}{lvl},{self.node_rep[node]},{_pow2(lvl):g},{self.subtree_size(node)}")
            for k in reversed(self.node_children[node]):
                stack.append((k, depth + 1))
        return "\n".join(lines)


def check_invariants(tree: CoverTree) -> list[str]:
    """Exhaustive check of nesting, covering, separation and subtree radii.

    Returns a list of human-readable violations (empty when the tree is valid).
    Quadratic per level; meant for tests and diagnostics.
    """
    problems: list[str] = []
    if tree.n == 0:
        return problems
    metric = tree.metric
    site_xy = np.array([tree.coords[pts[0]] for pts in tree.site_points])
    tops = np.array(tree.site_top)
    # co-located points share a bucket; distinct buckets are distinct locations
    for s, pts in enumerate(tree.site_points):
        d = metric.to_many(site_xy[s], tree.coords[pts])
        if np.any(d != 0):
            problems.append(f"site {s} bucket holds non-co-located points")
    for s in range(1, len(tree.site_points)):
        p = tree.site_parent[s]
        if tops[p] < tops[s] + 1:
            problems.append(f"site {s} parent {p} absent at level {tops[s] + 1}")
        d = float(metric.to_many(site_xy[s], site_xy[p:p + 1])[0])
        if not d < _pow2(int(tops[s]) + 1):
            problems.append(f"site {s} at distance {d} from parent violates covering")
    levels = sorted(set(tops.tolist()))
    for lvl in levels:
        present = np.flatnonzero(tops >= lvl)
        for a_i, a in enumerate(present):
            d = metric.to_many(site_xy[a], site_xy[present[a_i + 1:]])
            if np.any(d < _pow2(lvl)):
                problems.append(f"separation violated at level {lvl} by site {a}")
    for node in range(tree.num_nodes):
        bottom = tree.node_bottom[node]
        if bottom == NEG_INF:
            if len(tree.members(node)) != len(tree.site_points[tree.node_site[node]]):
                problems.append(f"leaf {node} does not hold exactly its bucket")
            continue
        kids = tree.node_children[node]
        if not kids or tree.node_site[kids[0]] != tree.node_site[node]:
            problems.append(f"node {node} lacks its self-child (nesting)")
        for k in kids:
            if tree.node_level[k] != int(bottom) - 1:
                problems.append(f"child {k} of node {node} at wrong level")
        rep = tree.coords[tree.node_rep[node]]
        d = metric.to_many(rep, tree.coords[tree.members(node)])
        if np.any(d >= _pow2(int(bottom) + 1)):
            problems.append(f"node {node} has a member outside its covering radius")
    seen = sorted(tree.order)
    if seen != list(range(tree.n)):
        problems.append("leaf chain is not a permutation of the points")
    return problems
