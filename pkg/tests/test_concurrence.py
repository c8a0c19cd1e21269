import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pisep.concurrence import (
    KPartition,
    block_deficit,
    block_purity,
    check_permutation_invariance,
    enumerate_k_partitions,
    kme_concurrence_pure,
    partition_value,
    stirling2,
)
from pisep.exceptions import DimensionError, UnsupportedInputError, ValidationError
from pisep.states import (
    PureState,
    make_ghz,
    make_product,
    make_w,
    partial_trace,
    random_mixed,
    random_pure,
    tensor_product,
)


def brute_partitions(n, k):
    """All k-block partitions via labelings, deduplicated by canonical form."""
    seen = set()
    for labels in itertools.product(range(k), repeat=n):
        if len(set(labels)) != k:
            continue
        blocks = tuple(sorted(tuple(q for q in range(n) if labels[q] == b) for b in range(k)))
        seen.add(blocks)
    return seen


def test_three_two():
    got = [str(p) for p in enumerate_k_partitions(3, 2)]
    assert sorted(got) == sorted(["{0}|{1,2}", "{0,2}|{1}", "{0,1}|{2}"])


def test_singletons():
    parts = list(enumerate_k_partitions(5, 5))
    assert len(parts) == 1 and parts[0].blocks == tuple((q,) for q in range(5))


@pytest.mark.parametrize("n", range(1, 7))
def test_partitions_match_brute_force(n):
    for k in range(1, n + 1):
        got = [p.blocks for p in enumerate_k_partitions(n, k)]
        assert len(got) == len(set(got)) == stirling2(n, k)
        assert set(got) == brute_partitions(n, k)


def test_stirling_values():
    assert [stirling2(4, k) for k in range(1, 5)] == [1, 7, 6, 1]
    assert stirling2(10, 3) == 9330


def test_partition_validation():
    with pytest.raises(ValidationError):
        KPartition(((0, 1), (1, 2)))
    with pytest.raises(ValidationError):
        KPartition(((0,), ()))
    with pytest.raises(ValidationError):
        list(enumerate_k_partitions(3, 4))
    with pytest.raises(DimensionError):
        list(enumerate_k_partitions(11, 2))
    assert KPartition(((2, 1), (0,))).blocks == ((0,), (1, 2))


@pytest.mark.parametrize("n", [2, 3, 4, 6])
def test_ghz_is_one(n):
    value, _ = kme_concurrence_pure(make_ghz(n), 2)
    assert value == pytest.approx(1.0, abs=1e-12)


def test_w3_value():
    value, part = kme_concurrence_pure(make_w(3), 2)
    assert value == pytest.approx(2 * math.sqrt(2) / 3, abs=1e-12)
    assert str(part) == "{0}|{1,2}"


@pytest.mark.parametrize("k", [2, 3, 4])
def test_product_state_zero(k):
    value, _ = kme_concurrence_pure(make_product(4), k)
    assert value == pytest.approx(0.0, abs=1e-12)


def test_biseparable_state_vanishes_only_at_k2():
    # Bell pair on qubits {0,1} next to a Bell pair on {2,3}
    bell = make_ghz(2)
    state = tensor_product([bell, bell])
    v2, part = kme_concurrence_pure(state, 2)
    assert v2 == pytest.approx(0.0, abs=1e-12)
    assert part.blocks == ((0, 1), (2, 3))
    v3, _ = kme_concurrence_pure(state, 3)
    assert v3 > 0.1


def test_block_purity_matches_partial_trace():
    psi = random_pure(5, seed=3)
    for block in [(0,), (1, 3), (0, 2, 4), (1, 2, 3, 4)]:
        expected = partial_trace(psi, list(block)).purity()
        assert block_purity(psi, block) == pytest.approx(expected, abs=1e-13)


def test_minimum_over_partitions():
    psi = random_pure(4, seed=9)
    value, part = kme_concurrence_pure(psi, 2)
    all_values = [partition_value(psi, p) for p in enumerate_k_partitions(4, 2)]
    assert value == pytest.approx(min(all_values), abs=1e-15)
    assert partition_value(psi, part) == pytest.approx(value, abs=1e-15)


def test_mixed_input_rejected():
    with pytest.raises(UnsupportedInputError):
        kme_concurrence_pure(random_mixed(3, seed=0), 2)
    # rank-one density matrices are accepted
    value, _ = kme_concurrence_pure(make_w(3).to_density(), 2)
    assert value == pytest.approx(2 * math.sqrt(2) / 3, abs=1e-12)


def test_k_range():
    with pytest.raises(ValidationError):
        kme_concurrence_pure(make_w(3), 1)
    with pytest.raises(ValidationError):
        kme_concurrence_pure(make_w(3), 4)


def test_invariance_all_permutations_n4():
    psi = random_pure(4, seed=1)
    perms = list(itertools.permutations(range(4)))
    assert check_permutation_invariance(psi, 2, permutations=perms) <= 1e-10


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 100_000), n=st.integers(2, 5))
def test_concurrence_bounds(seed, n):
    psi = random_pure(n, seed=seed)
    for k in range(2, n + 1):
        value, _ = kme_concurrence_pure(psi, k)
        # each block purity is at least 2^-|A|, so the deficit sum is below k
        assert 0.0 <= value < math.sqrt(2.0)
    assert check_permutation_invariance(psi, 2, trials=3, seed=seed) <= 1e-10


def test_deficit_is_accurate_for_products():
    vec = PureState(np.kron(random_pure(2, seed=1).amplitudes, random_pure(3, seed=2).amplitudes))
    # product across {0,1,2} | {3,4}: exact zero, up to squared round-off
    assert block_deficit(vec, (0, 1, 2)) < 1e-28
    assert block_deficit(vec, (0,)) == pytest.approx(1 - block_purity(vec, (0,)), abs=1e-14)
