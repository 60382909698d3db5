import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from cuecorr.cumulants import (Composition, J_N_value, c_rescaled, c_rescaled_batch,
                               composition_weight, compositions, j_value, kappa_batch,
                               kappa_closed_form, kappa_exact, kappa_naive, vanishes_by_support)
from cuecorr.errors import CapacityError


def closed(k):
    return list(k) + [-sum(k)]


@st.composite
def zero_sum_tuples(draw, p_min=2, p_max=5, bound=12):
    p = draw(st.integers(p_min, p_max))
    head = draw(st.lists(st.integers(-bound, bound).filter(bool), min_size=p - 1, max_size=p - 1))
    k = closed(head)
    assume(k[-1] != 0)
    return k


# --- j and J -----------------------------------------------------------------

def test_j_examples():
    assert j_value(Composition((2,)), (0.3, -0.3)) == 0
    assert j_value(Composition((1, 1)), (0.4, -0.4)) == pytest.approx(0.4)
    assert j_value(Composition((1, 1)), (0.8, -0.8)) == pytest.approx(0.8)
    assert j_value(Composition((1, 1)), (1.3, -1.3)) == 1
    assert j_value(Composition((1, 1, 1)), (0.7, 0.7, -1.4)) == 1


def test_J_examples():
    assert J_N_value(10, Composition((1, 1)), (3, -3)) == 3
    assert J_N_value(10, Composition((2,)), (7, -7)) == 0
    assert J_N_value(5, Composition((1, 1)), (8, -8)) == 5
    with pytest.raises(ValueError):
        J_N_value(5, Composition((1, 1)), (1, 2))
    with pytest.raises(ValueError):
        j_value(Composition((1, 1)), (0.1, 0.2, -0.3))


def test_compositions_enumeration():
    for p in range(1, 7):
        comps = list(compositions(p))
        assert len(comps) == 2 ** (p - 1)
        assert len({c.parts for c in comps}) == len(comps)
        assert all(c.total == p for c in comps)
    assert composition_weight(Composition((1, 2))) == Fraction(1, 4)
    with pytest.raises(ValueError):
        Composition((1, 0))


@settings(max_examples=100, deadline=None)
@given(zero_sum_tuples(bound=9), st.integers(1, 9), st.data())
def test_J_equals_N_times_j(k, N, data):
    comps = list(compositions(len(k)))
    c = comps[data.draw(st.integers(0, len(comps) - 1))]
    # j in exact rational arithmetic
    lhs = J_N_value(N, c, k)
    rhs = N * j_value(c, [Fraction(x, N) for x in k])
    assert lhs == rhs


# --- kappa_exact -------------------------------------------------------------

def test_kappa_examples():
    assert kappa_exact(10, (3, -3)) == 3
    assert kappa_exact(5, (2, 3, -5)) == 0
    assert kappa_exact(4, (3, 3, -6)) == 2
    assert kappa_exact(6, (8, 8, -8, -8)) == -6
    assert kappa_exact(7, (5, 0, -5)) == 0
    assert kappa_exact(5, (0,)) == 5
    assert kappa_exact(5, (1,)) == 0
    assert kappa_exact(5, (1, 2)) == 0


def test_kappa_order_guard():
    with pytest.raises(CapacityError):
        kappa_exact(3, [1] * 8)
    with pytest.raises(CapacityError):
        kappa_exact(3, [])


@pytest.mark.parametrize("N", [1, 2, 3, 4])
@pytest.mark.parametrize("p", [2, 3, 4])
def test_grouped_sum_matches_naive(N, p):
    for head in itertools.product([x for x in range(-2 * N, 2 * N + 1) if x], repeat=p - 1):
        k = closed(head)
        if k[-1] == 0:
            continue
        naive = kappa_naive(N, k)
        assert naive.denominator == 1
        assert kappa_exact(N, k) == naive


def test_grouped_sum_matches_naive_order5():
    rng = np.random.default_rng(5)
    for _ in range(40):
        N = int(rng.integers(1, 6))
        k = closed(rng.integers(1, 2 * N + 1, size=4) * rng.choice([-1, 1], size=4))
        if k[-1] == 0:
            continue
        assert kappa_exact(N, k) == kappa_naive(N, k)


@settings(max_examples=150, deadline=None)
@given(zero_sum_tuples(p_max=5), st.integers(1, 10), st.randoms())
def test_kappa_symmetries(k, N, rnd):
    v = kappa_exact(N, k)
    shuffled = list(k)
    rnd.shuffle(shuffled)
    assert kappa_exact(N, shuffled) == v
    assert kappa_exact(N, [-x for x in k]) == v


@settings(max_examples=150, deadline=None)
@given(zero_sum_tuples(p_max=5, bound=30), st.integers(1, 10))
def test_kappa_bounded_by_multiple_of_N(k, N):
    # measured constants: |kappa_p| <= C_p N with C_2=C_3=C_4=1, C_5=2
    C = {2: 1, 3: 1, 4: 1, 5: 2}[len(k)]
    assert abs(kappa_exact(N, k)) <= C * N


@settings(max_examples=150, deadline=None)
@given(zero_sum_tuples(p_min=3, p_max=5), st.integers(1, 10))
def test_vanishing_below_2N(k, N):
    if sum(abs(x) for x in k) <= 2 * N:
        assert vanishes_by_support(np.array(k) / N)
        assert kappa_exact(N, k) == 0


def test_cumulant_is_stable_in_N_beyond_all_frequencies():
    # once N >= sum of positive parts, kappa_p (p >= 3) is zero and kappa_2 = |k|
    for k in [(1, 2, -3), (2, 2, -1, -3), (1, 1, 1, -3)]:
        assert kappa_exact(50, k) == 0
    assert kappa_exact(50, (7, -7)) == 7


# --- batch evaluation ----------------------------------------------------------

@pytest.mark.parametrize("p", [2, 3, 4, 5, 6])
def test_batch_matches_scalar(p):
    rng = np.random.default_rng(p)
    N = 4
    K = rng.integers(-2 * N, 2 * N + 1, size=(300, p))
    K[:, -1] = -K[:, :-1].sum(axis=1)
    want = np.array([kappa_exact(N, k) for k in K])
    assert np.array_equal(kappa_batch(N, K), want)
    assert np.array_equal(kappa_batch(N, K, use_support_shortcut=False), want)
    assert np.array_equal(kappa_batch(N, K, chunk=7), want)


def test_batch_edge_cases():
    assert kappa_batch(5, np.zeros((0, 3), dtype=int)).shape == (0,)
    assert list(kappa_batch(5, [[0], [2]])) == [5, 0]
    assert list(kappa_batch(6, [[8, 8, -8, -8], [1, 2, -4, 1], [1, 0, -1, 0]])) == [-6, 0, 0]
    with pytest.raises(ValueError):
        kappa_batch(5, [1, 2, 3])


# --- closed forms ----------------------------------------------------------------

def test_closed_form_examples():
    assert kappa_closed_form(10, (-3, 3)) == 3
    assert kappa_closed_form(10, (15, 20, -35)) == 10
    assert kappa_closed_form(10, (9, 9, -9, -9)) == -8
    assert kappa_closed_form(10, (1, 2, 3, -6)) is None
    with pytest.raises(ValueError):
        kappa_closed_form(10, (1, 1, 1, 1, -4))


@pytest.mark.parametrize("N", [1, 3, 5, 8])
def test_closed_form_agrees_on_boxes(N):
    B = 2 * N
    vals = [x for x in range(-B, B + 1)]
    for p in (2, 3, 4):
        for head in itertools.product(vals, repeat=p - 1):
            k = closed(head)
            if abs(k[-1]) > B:
                continue
            cf = kappa_closed_form(N, k)
            if cf is not None:
                assert cf == kappa_exact(N, k), (N, k)


def test_closed_form_boundaries_p3():
    # equality cases between the tabulated regimes
    N = 10
    for a, b in [(10, 10), (10, 3), (3, 10), (5, 5), (11, 10), (10, 11), (4, 6)]:
        assert kappa_closed_form(N, (a, b, -a - b)) == kappa_exact(N, (a, b, -a - b))


# --- rescaled cumulants ----------------------------------------------------------

def test_c_examples():
    assert c_rescaled((0.3, -0.3)) == pytest.approx(0.3)
    assert c_rescaled((0.7, 0.7, -1.4)) == pytest.approx(0.4)
    assert c_rescaled((0.2, -0.2, 0.1)) == 0
    assert c_rescaled((0.0,)) == 1
    assert c_rescaled((0.5,)) == 0
    assert c_rescaled((0.5, 0.0, -0.5)) == 0


@settings(max_examples=150, deadline=None)
@given(zero_sum_tuples(p_max=6, bound=15), st.integers(1, 10))
def test_scaling_relation(k, N):
    t = np.array(k, dtype=float) / N
    assert abs(N * c_rescaled(t) - kappa_exact(N, k)) <= 1e-9
    assert abs(N * c_rescaled_batch(t[None])[0] - kappa_exact(N, k)) <= 1e-9


def test_c_order_guard():
    with pytest.raises(CapacityError):
        c_rescaled([0.1] * 8)
