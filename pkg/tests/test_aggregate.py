import math
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from durable_patterns.aggregate import (UNION_FACTOR, greedy_cover, report_sum_pairs,
                                        report_union_pairs)
from durable_patterns.core import InputError
from durable_patterns.durable_ball import DurableBallStructure
from durable_patterns.oracle import (oracle_sum_pairs, oracle_union_pairs, sum_values,
                                     union_length, union_values)

from conftest import between, random_instance


def run(report, ds, *args):
    out = []
    report(DurableBallStructure(ds, with_aggregates=True), *args, sink=out.append)
    k = [r.key() for r in out]
    assert len(k) == len(set(k)), "duplicate pair"
    return {r.key(): r.value for r in out}


def test_sum_hand_example(s4):
    got = run(report_sum_pairs, s4, 7, 0.1)
    assert got[(1, 0)] == 7.0
    assert set(got) == oracle_sum_pairs(s4, 7)


def test_sum_at_eight_matches_oracle(s4):
    assert set(run(report_sum_pairs, s4, 8, 0.1)) == oracle_sum_pairs(s4, 8) == set()


def test_union_hand_examples(u_instance):
    assert run(report_union_pairs, u_instance, 7, 1, 0.1)[(1, 0)] == 7.0
    assert run(report_union_pairs, u_instance, 10, 2, 0.1)[(1, 0)] == 10.0


def test_aggregate_errors(s4):
    with pytest.raises(InputError):
        report_union_pairs(DurableBallStructure(s4, with_aggregates=True), 1, 0, 0.1)
    with pytest.raises(InputError):
        report_sum_pairs(DurableBallStructure(s4), 1, 0.1)


def test_sum_sandwich_and_witness_bound():
    rng = np.random.default_rng(80)
    for _ in range(20):
        ds = random_instance(rng, int(rng.integers(10, 60)))
        eps = 0.2
        exact = sum_values(ds)
        # sums are exact only up to rounding, so keep tau off achieved values
        tau = between(exact.values(), rng)
        got = run(report_sum_pairs, ds, tau, eps)
        assert oracle_sum_pairs(ds, tau) <= set(got) <= oracle_sum_pairs(ds, tau, eps)
        relaxed = sum_values(ds, eps)
        for k, v in got.items():
            assert v >= tau
            assert v <= relaxed[k] + 1e-9
            if k in exact:
                assert v >= exact[k] - 1e-9


def test_union_sandwich():
    rng = np.random.default_rng(81)
    eps = 0.2
    for _ in range(20):
        ds = random_instance(rng, 12, scale=1.5)
        for kappa in (1, 2, 3):
            tau = float(rng.uniform(1, 6))
            got = run(report_union_pairs, ds, tau, kappa, eps)
            assert oracle_union_pairs(ds, tau, kappa) <= set(got)
            assert set(got) <= oracle_union_pairs(ds, UNION_FACTOR * tau, kappa, eps)


def test_greedy_coverage_bounds():
    rng = np.random.default_rng(82)
    for _ in range(15):
        ds = random_instance(rng, 12, scale=1.5)
        for kappa in (1, 2, 3):
            # threshold 0 reports every candidate pair with its greedy coverage
            got = run(report_union_pairs, ds, 0.0, kappa, 0.2)
            best = union_values(ds, kappa)
            for k, t in got.items():
                p, q = k
                width = min(ds.ends[p], ds.ends[q]) - ds.starts[p]
                assert t <= width + 1e-12
                if k in best:
                    assert t >= UNION_FACTOR * best[k] - 1e-9


def clipped(intervals, ids, lo, hi):
    segs = [(max(lo, intervals[i][0]), min(hi, intervals[i][1])) for i in ids]
    return union_length([a for a in segs if a[0] < a[1]])


def brute_greedy(intervals, lo, hi, kappa):
    chosen: list[int] = []
    covered = 0.0
    for _ in range(kappa):
        rest = [i for i in range(len(intervals)) if i not in chosen]
        if not rest:
            break
        pick = max(rest, key=lambda i: clipped(intervals, chosen + [i], lo, hi))
        gained = clipped(intervals, chosen + [pick], lo, hi)
        if gained <= covered:
            break
        chosen.append(pick)
        covered = gained
    return covered


def make_best(intervals):
    def best(a, b):
        top = None
        for i, (s, e) in enumerate(intervals):
            ov = min(e, b) - max(s, a)
            if ov > 0 and (top is None or ov > top[0]):
                top = (ov, i)
        return None if top is None else (top[1], *intervals[top[1]])
    return best


ivals = st.lists(st.tuples(st.integers(0, 20), st.integers(1, 10)), min_size=1, max_size=8)


@settings(max_examples=150, deadline=None)
@given(ivals, st.integers(0, 10), st.integers(1, 15), st.integers(1, 4))
def test_greedy_cover_matches_textbook_greedy(raw, lo, width, kappa):
    intervals = [(float(s), float(s + L)) for s, L in raw]
    hi = lo + width
    covered, chosen = greedy_cover(make_best(intervals), lo, hi, kappa)
    assert len(chosen) == len(set(chosen)) <= kappa
    assert covered <= width
    assert math.isclose(covered, clipped(intervals, chosen, lo, hi), abs_tol=1e-9)
    assert math.isclose(covered, brute_greedy(intervals, lo, hi, kappa), abs_tol=1e-9)
    opt = max(clipped(intervals, c, lo, hi)
              for r in range(1, min(kappa, len(intervals)) + 1)
              for c in combinations(range(len(intervals)), r))
    assert covered >= UNION_FACTOR * opt - 1e-9
