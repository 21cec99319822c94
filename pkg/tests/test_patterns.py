import numpy as np
import pytest

from durable_patterns.core import InputError, Metric, anchor_of, lifespan_intersection, durability
from durable_patterns.durable_ball import DurableBallStructure
from durable_patterns.oracle import (oracle_cliques, oracle_paths, oracle_stars,
                                     oracle_triangles)
from durable_patterns.patterns import (report_cliques, report_paths, report_stars,
                                       report_triangles)

from conftest import make, random_instance


def run(report, ds, *args, **kw):
    out = []
    report(DurableBallStructure(ds), *args, sink=out.append, **kw)
    return out


def keys(records):
    k = [r.key() for r in records]
    assert len(k) == len(set(k)), "duplicate emission"
    return set(k)


def test_t3_single_triangle(t3):
    recs = run(report_triangles, t3, 3, 0.1)
    assert [(r.anchor, {r.q, r.s}, r.t0, r.t1) for r in recs] == [(2, {0, 1}, 4.0, 8.0)]
    assert run(report_triangles, t3, 5, 0.1) == []


def test_t4_four_triangles(t4):
    recs = run(report_triangles, t4, 2, 0.1)
    got = {(r.key(), r.t0, r.t1) for r in recs}
    assert got == {((1, 0, 3), 2.0, 6.0), ((2, 0, 1), 4.0, 8.0),
                   ((2, 0, 3), 4.0, 6.0), ((2, 1, 3), 4.0, 6.0)}
    assert keys(recs) == oracle_triangles(t4, 2)


def test_t4_clique(t4):
    recs = run(report_cliques, t4, 4, 2, 0.1)
    assert [(r.key(), r.t0, r.t1) for r in recs] == [((0, 1, 2, 3), 4.0, 6.0)]


def test_cliques_of_three_are_triangles():
    rng = np.random.default_rng(12)
    ds = random_instance(rng, 40)
    tri = {tuple(sorted(k)) for k in keys(run(report_triangles, ds, 1.0, 0.2))}
    assert keys(run(report_cliques, ds, 3, 1.0, 0.2)) == tri


def test_path_on_a_line():
    ds = make([[0.0], [0.9], [1.8]], [0, 0, 0], [10, 10, 10])
    assert keys(run(report_paths, ds, 3, 1, 0.1)) == {(0, 1, 2)}
    assert run(report_triangles, ds, 1, 0.1) == []


def test_t3_edges_as_two_paths(t3):
    assert keys(run(report_paths, t3, 2, 1, 0.1)) == {(0, 1), (0, 2), (1, 2)}


def test_star_without_clique():
    ds = make([[0, 0], [1, 0], [-1, 0], [0, 1]], [0] * 4, [10] * 4)
    recs = run(report_stars, ds, 4, 5, 0.1)
    assert keys(recs) == {(0, (1, 2, 3))}
    assert run(report_cliques, ds, 4, 5, 0.1) == []


def test_t3_stars_match_oracle(t3):
    got = keys(run(report_stars, t3, 3, 3, 0.1))
    assert got == oracle_stars(t3, 3, 3) == {(0, (1, 2)), (1, (0, 2)), (2, (0, 1))}


def test_tau_above_every_intersection(t4):
    for report, m in [(report_cliques, 3), (report_paths, 3), (report_stars, 3)]:
        assert run(report, t4, m, 100, 0.1) == []


@pytest.mark.parametrize("report,lo", [(report_cliques, 3), (report_paths, 2), (report_stars, 2)])
def test_pattern_size_bounds(t3, report, lo):
    D = DurableBallStructure(t3)
    with pytest.raises(InputError):
        report(D, lo - 1, 1, 0.1)
    with pytest.raises(InputError):
        report(D, 7, 1, 0.1)


def test_bad_eps_and_tau(t3):
    D = DurableBallStructure(t3)
    for tau, eps in [(1, 0), (1, 1.5), (-1, 0.1)]:
        with pytest.raises(InputError):
            report_triangles(D, tau, eps)


def check_triangle_records(ds, recs, tau):
    for r in recs:
        members = (r.anchor, r.q, r.s)
        assert anchor_of(ds, members) == r.anchor
        span = lifespan_intersection(ds.points[x].lifespan for x in members)
        assert (span.start, span.end) == (r.t0, r.t1)
        assert durability(span) >= tau


@pytest.mark.parametrize("metric", ["l2", "l1", "lp:3"])
def test_triangle_sandwich(metric):
    rng = np.random.default_rng(20)
    for _ in range(15):
        ds = random_instance(rng, int(rng.integers(20, 90)), metric=Metric.parse(metric))
        for eps in (0.05, 0.25):
            tau = float(rng.uniform(0.5, 4))
            recs = run(report_triangles, ds, tau, eps)
            got = keys(recs)
            assert oracle_triangles(ds, tau) <= got <= oracle_triangles(ds, tau, eps)
            check_triangle_records(ds, recs, tau)


def test_triangle_output_shrinks_as_tau_grows():
    rng = np.random.default_rng(21)
    ds = random_instance(rng, 80)
    D = DurableBallStructure(ds)
    prev = None
    for tau in (0.5, 1.0, 2.0, 4.0):
        out = []
        report_triangles(D, tau, 0.2, out.append)
        cur = keys(out)
        if prev is not None:
            assert cur <= prev
        prev = cur


@pytest.mark.parametrize("m", [3, 4])
def test_clique_sandwich(m):
    rng = np.random.default_rng(30 + m)
    for _ in range(5):
        ds = random_instance(rng, 40)
        got = keys(run(report_cliques, ds, m, 1.0, 0.2))
        assert oracle_cliques(ds, m, 1.0) <= got <= oracle_cliques(ds, m, 1.0, 0.2)


@pytest.mark.parametrize("m", [2, 3, 4])
def test_path_sandwich(m):
    rng = np.random.default_rng(40 + m)
    for _ in range(5):
        ds = random_instance(rng, 30, scale=3.0)
        got = keys(run(report_paths, ds, m, 1.0, 0.2))
        assert oracle_paths(ds, m, 1.0) <= got <= oracle_paths(ds, m, 1.0, 0.2)


@pytest.mark.parametrize("m", [2, 3, 4])
def test_star_sandwich(m):
    rng = np.random.default_rng(50 + m)
    for _ in range(5):
        ds = random_instance(rng, 30, scale=3.0)
        got = keys(run(report_stars, ds, m, 1.0, 0.2))
        assert oracle_stars(ds, m, 1.0) <= got <= oracle_stars(ds, m, 1.0, 0.2)


def test_threads_give_same_records():
    rng = np.random.default_rng(60)
    ds = random_instance(rng, 100)
    one = sorted(run(report_triangles, ds, 1.0, 0.2))
    four = sorted(run(report_triangles, ds, 1.0, 0.2, threads=4))
    assert one == four
