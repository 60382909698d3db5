import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate

from cuecorr.asymptotics import (mean_asymptotic, parametrize_subspace, partition_integral,
                                 variance_asymptotic, variance_closed_form_pairs)
from cuecorr.errors import ToleranceError
from cuecorr.partitions import (SetPartition, WindowStructure, dim_L_pi,
                                enumerate_connecting_partitions, enumerate_set_partitions)
from cuecorr.statistic import mean_exact, variance_exact
from cuecorr.testfunctions import gaussian, symmetric_gaussian, triangle, zero


def P(M, *blocks):
    return SetPartition(M, tuple(tuple(i - 1 for i in b) for b in blocks))


# --- parametrisation ---------------------------------------------------------

def test_parametrisation_examples():
    par = parametrize_subspace(P(2, (1,), (2,)), WindowStructure(1, 2))
    assert par.dim == 0
    par = parametrize_subspace(P(4, (1, 3), (2, 4)), WindowStructure(2, 2))
    assert par.free_indices == (0,)
    assert [list(map(int, r)) for r in par.reconstruction] == [[1], [-1], [-1], [1]]
    par = parametrize_subspace(P(4, (1, 2, 3, 4)), WindowStructure(2, 2))
    assert par.free_indices == (0, 2)
    assert par.reconstruct([Fraction(3), Fraction(5)]) == [3, -3, 5, -5]


@pytest.mark.parametrize("m,l", [(1, 2), (1, 3), (1, 4), (2, 2), (2, 3), (3, 2)])
def test_parametrisation_is_exact(m, l):
    w = WindowStructure(m, l)
    parts = enumerate_set_partitions(m * l) if m == 1 else enumerate_connecting_partitions(m, l)
    rng = np.random.default_rng(m * 10 + l)
    for pi in parts:
        par = parametrize_subspace(pi, w)
        assert par.rank + par.dim == par.ambient_dim
        assert par.dim == dim_L_pi(pi, w)
        assert par.is_integral
        free = [Fraction(int(x), int(y)) for x, y in zip(rng.integers(-9, 9, par.dim), rng.integers(1, 5, par.dim))]
        assert all(r == 0 for r in par.residuals(par.reconstruct(free)))
        # free coordinates are never window closures, so they stay inside the hat box
        closures = {win[-1] for win in w.windows}
        assert not closures.intersection(par.free_indices)


# --- mean --------------------------------------------------------------------

def test_mean_zero():
    assert mean_asymptotic(zero()) == 0


@pytest.mark.parametrize("a", [0.25, 0.5, 1.0])
def test_mean_triangle_closed_form(a):
    want = (1 + a * a / 3) / math.sqrt(2 * math.pi)
    assert mean_asymptotic(triangle(a)) == pytest.approx(want, rel=1e-12)


def test_mean_gaussian_by_quad():
    f = gaussian(1.0)
    h = lambda t: math.exp(-t * t / 2)
    integral = integrate.quad(lambda t: h(t) * min(abs(t), 1), -12, 12, points=[-1, 0, 1], epsabs=1e-14)[0]
    want = (integral + 1) / math.sqrt(2 * math.pi)
    assert mean_asymptotic(f) == pytest.approx(want, rel=1e-9)


def test_mean_forms_agree_for_symmetric_transforms():
    f1 = triangle(1.5)
    assert mean_asymptotic(f1, form="compositions") == pytest.approx(mean_asymptotic(f1), rel=1e-12)
    f2 = symmetric_gaussian(1.0, 2)
    assert mean_asymptotic(f2, form="compositions") == pytest.approx(mean_asymptotic(f2), rel=1e-9)


def test_mean_forms_differ_without_full_symmetry():
    # hat_f symmetric in (t_1, t_2) only: the composition form is not the partition sum
    f = gaussian(1.0, 2)
    assert abs(mean_asymptotic(f, form="compositions") - mean_asymptotic(f)) > 1e-3


def test_mean_is_limit_of_exact_mean():
    f = triangle(1.5)
    M = mean_asymptotic(f)
    gaps = [abs(mean_exact(N, f) / N - M) for N in (16, 32, 64)]
    assert gaps[1] < gaps[0] and gaps[2] < gaps[1]


def test_mean_arity_two_limit():
    f = symmetric_gaussian(1.0, 2)
    M = mean_asymptotic(f)
    gaps = [abs(mean_exact(N, f) / N - M) for N in (8, 16, 32)]
    assert gaps[2] < gaps[1] < gaps[0]


def test_unknown_form():
    with pytest.raises(ValueError):
        mean_asymptotic(triangle(1.0), form="bogus")


# --- variance ------------------------------------------------------------------

def test_variance_zero():
    assert variance_asymptotic(zero()) == 0
    assert variance_closed_form_pairs(zero()) == 0


def test_variance_small_triangle_is_first_term():
    # for a <= 1/2 only (1/pi) int hat^2 t^2 survives: a^3 / (15 pi)
    f = triangle(0.5)
    want = 0.5**3 / (15 * math.pi)
    assert variance_closed_form_pairs(f) == pytest.approx(want, rel=1e-12)
    assert variance_asymptotic(f) == pytest.approx(want, rel=1e-10)


@pytest.mark.parametrize("f", [gaussian(1.0), gaussian(0.6), triangle(1.5), triangle(3.0)])
def test_variance_cross_formula(f):
    assert variance_asymptotic(f) == pytest.approx(variance_closed_form_pairs(f), rel=1e-6)


def test_literal_third_term_domain_is_inconsistent():
    # integrating the last term over [0,1]^2 only disagrees with the partition sum
    f = gaussian(1.0)
    h = lambda s: math.exp(-s * s / 2)
    quadrant = integrate.dblquad(lambda t, s: h(s) * h(t) * (s + t - 1), 0, 1, lambda s: 1 - s, lambda s: 1)[0]
    literal = variance_closed_form_pairs(f) + quadrant / math.pi
    assert abs(literal - variance_asymptotic(f)) > 1e-3


def test_variance_details_and_breakdown():
    res = variance_asymptotic(triangle(1.5), return_details=True)
    assert res.value == pytest.approx(sum(v for _, v in res.terms), rel=1e-12)
    assert res.error_estimate < 1e-8
    assert len(res.as_dict()["terms"]) == len(res.terms)


def test_variance_is_limit_of_exact_variance():
    f = triangle(1.5)
    s2 = variance_asymptotic(f)
    g64, g128 = (abs(variance_exact(N, f) / N - s2) for N in (64, 128))
    assert g128 <= 0.6 * g64


def test_variance_arity_two_small_support():
    # a = 1/4: every block of three or more frequencies stays below the vanishing threshold
    f = triangle(0.25, 2)
    s2 = variance_asymptotic(f)
    assert s2 > 0
    gaps = [abs(variance_exact(N, f) / N - s2) for N in (16, 32)]
    assert gaps[1] < gaps[0]


def test_tolerance_error_carries_diagnostics():
    f = gaussian(1.0)
    pi = P(4, (1, 2, 3, 4))
    with pytest.raises(ToleranceError) as exc:
        variance_asymptotic(f, tol=1e-30, step=4.0)
    assert "terms" in exc.value.diagnostics
    v, e = partition_integral(f, pi, WindowStructure(2, 2), step=4.0)
    assert e > 0


def test_closed_form_requires_arity_one():
    with pytest.raises(ValueError):
        variance_closed_form_pairs(gaussian(1.0, 2))


def test_error_estimate_on_narrow_support():
    # support inside one default step: the two passes must still differ
    sigma = 20.0
    res = mean_asymptotic(gaussian(sigma), return_details=True)
    h = lambda t: sigma * math.exp(-0.5 * (sigma * t) ** 2)
    want = (integrate.quad(lambda t: h(t) * abs(t), -1, 1, points=[0], epsabs=1e-14)[0] + sigma) / math.sqrt(2 * math.pi)
    assert res.error_estimate > 0
    assert abs(res.value - want) <= 10 * res.error_estimate + 1e-12 * want
