import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from durable_patterns.core import Metric, spread
from durable_patterns.covertree import CoverTree, check_invariants, target_level

from conftest import make


def build(xy, metric=None):
    return CoverTree(np.asarray(xy, dtype=float), metric or Metric.l2())


def scan(tree, center, radius):
    d = tree.metric.to_many(np.asarray(center, dtype=float), tree.coords)
    return d


def test_single_point():
    tree = build([[0.3, 0.7]])
    assert check_invariants(tree) == []
    balls = tree.ball_report([0.3, 0.7], 1.0, 0.1)
    assert [b.members() for b in balls] == [[0]]


def test_two_points_dump():
    tree = build([[0.0], [1.0]])
    assert check_invariants(tree) == []
    assert tree.dump() == "1,0,2,2\n  0,0,1,1\n  0,1,1,1"


def test_t3_dump_has_three_leaves():
    tree = build([[0, 0], [0.5, 0], [0, 0.5]])
    assert tree.dump().splitlines() == ["0,0,1,3", "  -1,0,0.5,1", "  -1,1,0.5,1", "  -1,2,0.5,1"]


def test_empty_tree():
    tree = CoverTree(np.zeros((0, 2)), Metric.l2())
    assert tree.ball_report([0, 0], 1.0, 0.5) == []
    assert check_invariants(tree) == []


def test_colocated_points_share_bucket():
    tree = build([[0, 0], [1, 1], [0, 0], [1, 1], [0, 0]])
    assert check_invariants(tree) == []
    assert sorted(len(pts) for pts in tree.site_points) == [2, 3]
    balls = tree.ball_report([0, 0], 0.5, 0.5)
    assert sorted(x for b in balls for x in b.members()) == [0, 2, 4]


def test_t3_ball_report():
    tree = build([[0, 0], [0.5, 0], [0, 0.5]])
    balls = tree.ball_report([0, 0.5], 1.0, 0.5)
    got = sorted(x for b in balls for x in b.members())
    assert got == [0, 1, 2]


def test_ball_report_rejects_bad_parameters():
    tree = build([[0, 0]])
    with pytest.raises(ValueError):
        tree.ball_report([0, 0], 1.0, 0.0)
    with pytest.raises(ValueError):
        tree.ball_report([0, 0], 0.0, 0.5)


def test_target_level():
    assert target_level(0.1, 1.0) == -6  # 2^-6 <= 0.025 < 2^-5
    assert target_level(1.0, 4.0) == 0


def test_random_trees_valid_and_shallow():
    rng = np.random.default_rng(0)
    for _ in range(40):
        xy = rng.random((64, 2))
        tree = build(xy)
        assert check_invariants(tree) == []
        levels = tree.top_level - min(tree.site_top) + 1
        ds = make(xy, [0] * 64, [1] * 64)
        # root level rounds up and leaf levels round down, one level each
        assert levels <= math.log2(spread(ds)) + 3


def check_ball_sandwich(tree, center, radius, eps):
    balls = tree.ball_report(center, radius, eps)
    d = scan(tree, center, radius)
    members = [x for b in balls for x in b.members()]
    assert len(members) == len(set(members)), "balls overlap"
    got = set(members)
    assert set(np.flatnonzero(d <= radius).tolist()) <= got
    assert all(d[x] <= (1 + eps) * radius for x in got)
    for b in balls:
        rep = tree.coords[b.rep]
        dm = tree.metric.to_many(rep, tree.coords[b.members()])
        assert dm.max() <= eps * radius / 2
        assert b.size == len(b.members())


@pytest.mark.parametrize("metric", ["l1", "l2", "linf", "lp:3"])
def test_ball_report_sandwich(metric):
    rng = np.random.default_rng(hash(metric) % 1000)
    tree = build(rng.random((200, 2)), Metric.parse(metric))
    assert check_invariants(tree) == []
    for _ in range(50):
        c = rng.random(2) * 1.2 - 0.1
        check_ball_sandwich(tree, c, float(rng.choice([0.2, 0.5, 1.0, 2.0])), 0.2)


def test_subtree_enumeration_matches_size():
    rng = np.random.default_rng(4)
    tree = build(rng.random((100, 3)))
    for node in range(tree.num_nodes):
        assert len(list(tree.iter_members(node))) == tree.subtree_size(node)


points = arrays(np.float64, st.tuples(st.integers(1, 40), st.integers(1, 3)),
                elements=st.floats(-4, 4, allow_nan=False).map(lambda v: round(v, 2)))


@settings(max_examples=60, deadline=None)
@given(points, st.sampled_from([0.05, 0.3, 1.0]), st.sampled_from([0.5, 1.0, 2.0]))
def test_invariants_and_sandwich_hold_for_any_points(xy, eps, radius):
    tree = build(xy)
    assert check_invariants(tree) == []
    check_ball_sandwich(tree, xy[0], radius, eps)
    check_ball_sandwich(tree, xy[-1] + 0.37, radius, eps)
