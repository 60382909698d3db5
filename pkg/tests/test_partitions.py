import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from cuecorr.errors import CapacityError
from cuecorr.partitions import (PartitionClass, SetPartition, WindowStructure, bell_number,
                                centered_product_expansion, classify_partition,
                                constraint_matrix, dim_L_pi, enumerate_connecting_partitions,
                                enumerate_set_partitions, equivalence_classes, expand_moment,
                                integer_rank, is_connecting, iter_set_partitions,
                                moments_from_cumulants, optimal_dimension)


def P(M, *blocks):
    # 1-based blocks, as written by hand
    return SetPartition(M, tuple(tuple(i - 1 for i in b) for b in blocks))


def bell_recurrence(n):
    B = [1]
    for k in range(n):
        B.append(sum(math.comb(k, j) * B[j] for j in range(k + 1)))
    return B[n]


def fraction_rank(rows):
    a = [[Fraction(x) for x in r] for r in rows]
    rank = 0
    for col in range(len(a[0]) if a else 0):
        piv = next((i for i in range(rank, len(a)) if a[i][col] != 0), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        for i in range(len(a)):
            if i != rank and a[i][col] != 0:
                f = a[i][col] / a[rank][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[rank])]
        rank += 1
    return rank


# --- enumeration ------------------------------------------------------------

@pytest.mark.parametrize("M", range(1, 9))
def test_partition_count_is_bell(M):
    parts = enumerate_set_partitions(M)
    assert len(parts) == bell_number(M) == bell_recurrence(M)
    assert len({p.blocks for p in parts}) == len(parts)
    for p in parts:
        flat = sorted(i for b in p.blocks for i in b)
        assert flat == list(range(M))
        assert 1 <= len(p) <= M


def test_small_counts():
    assert [p.blocks for p in enumerate_set_partitions(1)] == [((0,),)]
    assert len(enumerate_set_partitions(3)) == 5
    assert len(enumerate_set_partitions(4)) == 15


def test_rgs_order_is_stable():
    parts = enumerate_set_partitions(3)
    assert parts[0].blocks == ((0, 1, 2),)
    assert parts[-1].blocks == ((0,), (1,), (2,))


def test_capacity_guard():
    with pytest.raises(CapacityError):
        enumerate_set_partitions(13)
    with pytest.raises(CapacityError):
        enumerate_set_partitions(0)
    assert len(enumerate_set_partitions(5, max_size=5)) == 52


def test_invalid_partitions_rejected():
    with pytest.raises(ValueError):
        SetPartition(3, ((0, 1), (1, 2)))
    with pytest.raises(ValueError):
        SetPartition(3, ((0, 1),))


def test_iter_set_partitions_on_labels():
    out = list(iter_set_partitions("abc"))
    assert len(out) == 5
    assert ["a", "b", "c"] in [sorted(sum(p, [])) for p in out]


# --- connecting partitions ---------------------------------------------------

def test_connecting_examples():
    assert [p.blocks for p in enumerate_connecting_partitions(2, 1)] == [((0, 1),)]
    c22 = {p.blocks for p in enumerate_connecting_partitions(2, 2)}
    assert P(4, (1, 2), (3, 4)).blocks not in c22
    assert P(4, (1, 3), (2, 4)).blocks in c22
    c31 = {p.blocks for p in enumerate_connecting_partitions(3, 1)}
    assert c31 == {P(3, (1, 2, 3)).blocks}


def test_connecting_by_bruteforce_filter():
    # a window fails when it is a union of blocks
    for m, l in [(2, 2), (2, 3), (3, 2), (4, 2)]:
        w = WindowStructure(m, l)
        brute = []
        for p in enumerate_set_partitions(m * l):
            bad = any(set().union(*[set(b) for b in p.blocks if set(b) <= set(win)]) == set(win)
                      for win in w.windows)
            if not bad:
                brute.append(p.blocks)
        assert brute == [p.blocks for p in enumerate_connecting_partitions(m, l)]


@pytest.mark.parametrize("m,l", [(2, 1), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2), (4, 1), (4, 2)])
def test_centered_expansion_equals_connecting(m, l):
    a = {p.blocks for p in centered_product_expansion(m, l)}
    b = {p.blocks for p in enumerate_connecting_partitions(m, l)}
    assert a == b


def test_connecting_classes_have_size_at_least_two():
    for m, l in [(2, 2), (3, 2), (4, 2)]:
        w = WindowStructure(m, l)
        for p in enumerate_connecting_partitions(m, l):
            assert min(equivalence_classes(p, w).sizes()) >= 2


def _random_cumulants(seed):
    rng = random.Random(seed)
    cache = {}

    def kappa(labels):
        key = frozenset(labels)
        if key not in cache:
            cache[key] = rng.uniform(-1.0, 1.0)
        return cache[key]

    return kappa


@pytest.mark.parametrize("m,l", [(2, 1), (2, 2), (3, 1), (2, 3), (3, 2)])
def test_centered_moment_cancellation(m, l):
    # E prod_i (Y_i - E Y_i) with Y_i = prod of the variables in window i,
    # expanded by inclusion-exclusion into raw moments
    w = WindowStructure(m, l)
    for seed in range(3):
        kappa = _random_cumulants(seed)
        lhs = 0.0
        for r in range(m + 1):
            for S in itertools.combinations(range(m), r):
                rest = [i for j in range(m) if j not in S for i in w.windows[j]]
                term = expand_moment(rest, kappa) if rest else 1.0
                for j in S:
                    term *= expand_moment(list(w.windows[j]), kappa)
                lhs += (-1) ** r * term
        rhs = sum(math.prod(kappa(b) for b in p.blocks) for p in enumerate_connecting_partitions(m, l))
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)


# --- equivalence classes, classification, dimension --------------------------

def test_equivalence_examples():
    w21 = WindowStructure(2, 1)
    assert equivalence_classes(P(2, (1, 2)), w21).classes == ((0, 1),)
    w42 = WindowStructure(4, 2)
    chain = P(8, (1, 3), (2, 5), (4, 7), (6, 8))
    assert equivalence_classes(chain, w42).classes == ((0, 1, 2, 3),)
    pairs = P(8, (1, 3), (2, 4), (5, 7), (6, 8))
    assert equivalence_classes(pairs, w42).classes == ((0, 1), (2, 3))
    with pytest.raises(ValueError):
        equivalence_classes(P(4, (1, 2, 3, 4)), w42)


def test_classification_examples():
    assert classify_partition(P(4, (1, 3), (2, 4)), WindowStructure(2, 2)) is PartitionClass.OPTIMAL
    chain = P(8, (1, 3), (2, 5), (4, 7), (6, 8))
    assert classify_partition(chain, WindowStructure(4, 2)) is PartitionClass.SUBOPTIMAL
    w31 = WindowStructure(3, 1)
    for p in enumerate_connecting_partitions(3, 1):
        assert classify_partition(p, w31) is PartitionClass.SUBOPTIMAL
    with pytest.raises(ValueError):
        classify_partition(P(4, (1, 2), (3, 4)), WindowStructure(2, 2))


def test_dimension_examples():
    w = WindowStructure(2, 2)
    assert dim_L_pi(P(4, (1, 3), (2, 4)), w) == 1
    assert dim_L_pi(P(4, (1, 2, 3, 4)), w) == 2 == optimal_dimension(P(4, (1, 2, 3, 4)), w)
    chain = P(8, (1, 3), (2, 5), (4, 7), (6, 8))
    w42 = WindowStructure(4, 2)
    assert integer_rank(constraint_matrix(chain, w42)) == 7
    assert dim_L_pi(chain, w42) == 1 < optimal_dimension(chain, w42)


@pytest.mark.parametrize("m,l", [(2, 2), (2, 3), (4, 2)])
def test_rank_dichotomy(m, l):
    w = WindowStructure(m, l)
    n = l - 1
    seen = set()
    for p in enumerate_connecting_partitions(m, l):
        d = dim_L_pi(p, w)
        cls = classify_partition(p, w)
        seen.add(cls)
        if cls is PartitionClass.OPTIMAL:
            assert d == m * n + m // 2 - len(p)
        else:
            assert d < m * n + m / 2 - len(p)
        if m == 2:
            assert d == 2 * n + 1 - len(p)
    assert seen == {PartitionClass.OPTIMAL, PartitionClass.SUBOPTIMAL} or m == 2


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(st.integers(-3, 3), min_size=6, max_size=6), min_size=1, max_size=7))
def test_bareiss_matches_fraction_rank(rows):
    assert integer_rank(rows) == fraction_rank(rows)


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_connecting_predicate_matches_definition(data):
    m = data.draw(st.integers(2, 4))
    l = data.draw(st.integers(1, 3 if m < 4 else 2))
    rgs = [0]
    for _ in range(m * l - 1):
        rgs.append(data.draw(st.integers(0, max(rgs) + 1)))
    p = SetPartition.from_rgs(rgs)
    w = WindowStructure(m, l)
    unions = [set().union(*[set(b) for b in p.blocks if set(b) <= set(win)]) for win in w.windows]
    assert is_connecting(p, w) == all(u != set(win) for u, win in zip(unions, w.windows))


# --- moments from cumulants ----------------------------------------------------

def test_moment_examples():
    assert moments_from_cumulants(5, (0,)) == 5
    assert moments_from_cumulants(4, (2, -2)) == 2
    assert moments_from_cumulants(2, (1, 2, -3)) == 1


def test_moments_accept_custom_oracle():
    calls = []

    def kappa(N, ks):
        calls.append(ks)
        return 1

    assert moments_from_cumulants(3, (1, 2, 3), kappa) == 5
    assert len(calls) >= 5


def test_moment_capacity():
    with pytest.raises(CapacityError):
        moments_from_cumulants(3, [1] * 13)
