import math

import numpy as np
import pytest

from durable_patterns.core import InputError
from durable_patterns.oracle import (OracleConfig, OracleLimitError, oracle_activation,
                                     oracle_sum_pairs, oracle_triangles, oracle_union_pairs,
                                     sum_values, union_length, union_values)

from conftest import make, random_instance


def test_triangle_hand_values(t3, t4):
    assert oracle_triangles(t3, 3) == {(2, 0, 1)}
    assert oracle_triangles(t4, 2) == {(1, 0, 3), (2, 0, 1), (2, 0, 3), (2, 1, 3)}


def test_relaxation_only_adds():
    rng = np.random.default_rng(100)
    for _ in range(10):
        ds = random_instance(rng, 40)
        assert oracle_triangles(ds, 1.0) <= oracle_triangles(ds, 1.0, 0.2)


def test_aggregate_hand_values(s4, u_instance):
    assert (1, 0) in oracle_sum_pairs(s4, 7)
    assert union_values(u_instance, 2)[(1, 0)] == 10.0
    assert (1, 0) in oracle_union_pairs(u_instance, 10, 2)
    with pytest.raises(InputError):
        union_values(u_instance, 0)


def test_activation_hand_values(t3, t4):
    assert oracle_activation(t3, 2) == 4.0
    assert oracle_activation(t3, 0, 3) == -math.inf
    assert oracle_activation(t4, 2, 4) == 2.0


def test_limits_refuse_large_inputs():
    rng = np.random.default_rng(101)
    ds = random_instance(rng, 20)
    cfg = OracleConfig(limits={**OracleConfig().limits, "triangles": 10})
    with pytest.raises(OracleLimitError):
        oracle_triangles(ds, 1.0, config=cfg)
    with pytest.raises(OracleLimitError):
        union_values(random_instance(rng, 13), 2)


def test_union_length():
    assert union_length([]) == 0
    assert union_length([(0, 4), (3, 10), (5, 6)]) == 10
    assert union_length([(0, 1), (2, 3)]) == 2


def test_values_do_not_depend_on_point_order():
    rng = np.random.default_rng(102)
    ds = random_instance(rng, 12)
    perm = rng.permutation(ds.n)
    shuffled = make(ds.coords[perm], ds.starts[perm], ds.ends[perm])
    back = {int(new): int(old) for new, old in enumerate(perm)}

    def relabel(values):
        return {tuple(sorted((back[a], back[b]))): v for (a, b), v in values.items()}

    def plain(values):
        return {tuple(sorted(k)): v for k, v in values.items()}

    assert relabel(sum_values(shuffled)) == pytest.approx(plain(sum_values(ds)))
    assert relabel(union_values(shuffled, 2)) == pytest.approx(plain(union_values(ds, 2)))
