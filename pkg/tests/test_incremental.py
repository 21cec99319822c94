import math

import numpy as np
import pytest

from durable_patterns.core import InputError
from durable_patterns.durable_ball import DurableBallStructure
from durable_patterns.incremental import (IncrementalSession, compute_activation,
                                          detect_triangle, report_delta_triangles)
from durable_patterns.oracle import oracle_activation, oracle_triangles

from conftest import make, random_instance

NEG = -math.inf


def session_step(S, tau):
    out = []
    n = S.query(tau, out.append)
    assert n == len(out)
    return [r.key() for r in out]


def test_activation_hand_values(t3, t4):
    assert IncrementalSession(DurableBallStructure(t3), 0.1).alpha == {0: NEG, 1: NEG, 2: 4.0}
    assert IncrementalSession(DurableBallStructure(t4), 0.1).alpha == {0: NEG, 1: 4.0, 2: 4.0,
                                                                       3: NEG}
    assert compute_activation(DurableBallStructure(t3), 2, math.inf, 0.1) == 4.0
    assert compute_activation(DurableBallStructure(t3), 2, 4, 0.1) == NEG
    assert compute_activation(DurableBallStructure(t4), 2, 4, 0.1) == 2.0


def test_detect_hand_values(t3, t4):
    assert detect_triangle(DurableBallStructure(t4), 2, 2, 4, 0.1)
    D3 = DurableBallStructure(t3)
    assert not detect_triangle(D3, 0, 0, 100, 0.1)
    assert detect_triangle(D3, 2, 4, 5, 0.1)
    assert not detect_triangle(D3, 2, 4.5, 5, 0.1)
    with pytest.raises(InputError):
        detect_triangle(D3, 2, 5, 5, 0.1)


def test_delta_for_one_anchor(t4):
    D = DurableBallStructure(t4)
    out = []
    assert report_delta_triangles(D, 2, 2, 4, 0.1, out.append) == 2
    assert {r.key() for r in out} == {(2, 0, 3), (2, 1, 3)}
    assert report_delta_triangles(D, 0, 2, 4, 0.1) == 0
    with pytest.raises(InputError):
        report_delta_triangles(D, 2, 4, 2, 0.1)


def test_delta_with_infinite_previous_is_full_report(t4):
    D = DurableBallStructure(t4)
    out = []
    report_delta_triangles(D, 2, 2, math.inf, 0.1, out.append)
    assert {r.key() for r in out} == {k for k in oracle_triangles(t4, 2) if k[0] == 2}


def test_t4_session(t4):
    S = IncrementalSession(DurableBallStructure(t4), 0.1)
    assert sorted(session_step(S, 4)) == [(1, 0, 3), (2, 0, 1)]
    assert sorted(session_step(S, 2)) == [(2, 0, 3), (2, 1, 3)]
    assert S.cumulative == 4
    assert session_step(S, 2) == []
    assert session_step(S, 10) == []
    S.reset()
    assert S.cumulative == 0 and S.prev_tau == math.inf
    assert len(session_step(S, 2)) == 4


def test_rising_threshold_reports_full_set(t4):
    S = IncrementalSession(DurableBallStructure(t4), 0.1)
    session_step(S, 2)
    assert sorted(session_step(S, 4)) == [(1, 0, 3), (2, 0, 1)]


def test_empty_session():
    S = IncrementalSession(DurableBallStructure(make(np.zeros((0, 2)), [], [])), 0.1)
    assert S.alpha == {}
    assert session_step(S, 1) == []


def test_bad_thresholds(t3):
    S = IncrementalSession(DurableBallStructure(t3), 0.1)
    for tau in (0, -1):
        with pytest.raises(InputError):
            S.query(tau)
    with pytest.raises(InputError):
        IncrementalSession(DurableBallStructure(t3), 0)


def test_monotone_sequence_builds_up_full_set():
    rng = np.random.default_rng(70)
    ds = random_instance(rng, 60)
    eps = 0.2
    S = IncrementalSession(DurableBallStructure(ds), eps)
    seen: set = set()
    prev = None
    for tau in (5, 4, 3, 2, 1):
        step = set(session_step(S, tau))
        assert not step & seen
        exact_new = oracle_triangles(ds, tau) - (oracle_triangles(ds, prev) if prev else set())
        assert exact_new <= step
        assert step <= oracle_triangles(ds, tau, eps)
        seen |= step
        prev = tau
    assert oracle_triangles(ds, 1) <= seen <= oracle_triangles(ds, 1, eps)


def test_activation_sandwich_and_consistency():
    rng = np.random.default_rng(71)
    eps = 0.25
    for _ in range(5):
        ds = random_instance(rng, 50)
        D = DurableBallStructure(ds)
        for p in range(ds.n):
            tau = float(rng.uniform(0.5, 6))
            v = compute_activation(D, p, tau, eps)
            assert v < tau
            assert oracle_activation(ds, p, tau) <= v <= oracle_activation(ds, p, tau, eps)
            if v != NEG:
                assert detect_triangle(D, p, v, tau, eps)
