"""The smoothed local correlation statistic and its exact finite-N moments.

For eigenangles ``theta_1, ..., theta_N`` and a test function ``f`` of ``n``
variables,

    S_N(f) = sum over all (j_1, ..., j_{n+1}) of
             f(N (theta_{j_2} - theta_{j_1})_c, ..., N (theta_{j_{n+1}} - theta_{j_1})_c),

repeated indices included.  Expanding ``f(N .)`` in a Fourier series turns
this into

    S_N(f) = (2 pi)^{-n/2} N^{-n} sum_{k in Z^n} hat_f(k/N) prod_{j=1}^{n+1} T_{N,k_j},
    k_{n+1} = -(k_1 + ... + k_n),

and taking expectations of products of traces through their cumulants gives
the exact mean, variance and higher centred moments as finite sums over
partitions and over integer points of the subspaces ``L_pi``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cumulants import kappa_batch
from .errors import CapacityError, NumericalConsistencyError
from .lattice import parametrize_subspace
from .partitions import (WindowStructure, enumerate_connecting_partitions,
                         enumerate_set_partitions)
from .testfunctions import TestFunction

TWO_PI = 2.0 * math.pi
#: Default cap on lattice points visited per partition.
LATTICE_BUDGET = 20_000_000
IMAG_TOL = 1e-9


@dataclass(frozen=True)
class TraceVector:
    """``T_{N,s}`` for ``s = -s_max, ..., s_max``; ``values[s + s_max]``."""

    N: int
    s_max: int
    values: np.ndarray

    def __getitem__(self, s):
        return self.values[np.asarray(s) + self.s_max]


def circular_difference(x, y):
    """Phase difference ``(x - y)_c`` folded into ``[-pi, pi)``.

    Both arguments must lie in ``[0, 2 pi)``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    for v in (x, y):
        if np.any((v < 0) | (v >= TWO_PI)):
            raise ValueError("angles must lie in [0, 2*pi)")
    out = _fold(x - y)
    return float(out) if out.ndim == 0 else out


def _fold(d):
    d = np.asarray(d, dtype=float)
    return np.where(d >= math.pi, d - TWO_PI, np.where(d < -math.pi, d + TWO_PI, d))


def power_traces(theta, s_max: int) -> TraceVector:
    theta = np.asarray(theta, dtype=float)
    N = theta.size
    if s_max < 1:
        raise ValueError("s_max must be at least 1")
    s = np.arange(1, s_max + 1)
    pos = np.exp(1j * np.outer(s, theta)).sum(axis=1)
    values = np.concatenate([np.conj(pos[::-1]), [complex(N, 0.0)], pos])
    return TraceVector(N, s_max, values)


# ---------------------------------------------------------------------------
# evaluating the statistic on a sample
# ---------------------------------------------------------------------------

def _tuple_grid(diffs, n):
    """All n-tuples drawn from ``diffs`` as an array of shape (len**n, n)."""
    mesh = np.meshgrid(*([diffs] * n), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _direct_naive(f, theta):
    N, n = theta.size, f.arity
    D = _fold(theta[None, :] - theta[:, None])  # D[j1, j] = (theta_j - theta_j1)_c
    total = 0.0
    for j1 in range(N):
        total += float(np.sum(f.kernel(_tuple_grid(D[j1], n), N)))
    return total


def _direct_windowed(f, theta, radius):
    N, n = theta.size, f.arity
    r = radius / N
    order = np.sort(theta)
    ext = np.concatenate([order - TWO_PI, order, order + TWO_PI])
    total = 0.0
    for th in order:
        lo = np.searchsorted(ext, th - r, side="left")
        hi = np.searchsorted(ext, th + r, side="right")
        diffs = ext[lo:hi] - th
        total += float(np.sum(f.kernel(_tuple_grid(diffs, n), N)))
    return total


def statistic_direct(f: TestFunction, theta, method: str = "window") -> float:
    """``S_N(f)`` by summing the kernel over index tuples.

    ``method="window"`` visits only tuples within the kernel's spatial cutoff
    of the base angle; ``"naive"`` visits all ``N^{n+1}`` tuples.  Functions
    without a usable cutoff (``direct_radius is None``) always use the naive
    path.
    """
    if f.direct is None and f.periodic is None:
        raise NotImplementedError(f"test function {f.name} has no direct evaluator")
    theta = np.asarray(theta, dtype=float)
    if f.is_zero:
        return 0.0
    if method == "naive" or f.direct_radius is None or f.periodic is not None:
        return _direct_naive(f, theta)
    if method != "window":
        raise ValueError(f"unknown method {method!r}")
    if f.direct_radius / theta.size >= math.pi:
        return _direct_naive(f, theta)
    return _direct_windowed(f, theta, f.direct_radius)


def required_s_max(f: TestFunction, N: int) -> int:
    return max(1, f.arity * f.fourier_cutoff(N))


def statistic_fourier(f: TestFunction, traces: TraceVector) -> float:
    """``S_N(f)`` from the trace powers through the truncated Fourier series."""
    N, n = traces.N, f.arity
    if f.is_zero:
        return 0.0
    K = f.fourier_cutoff(N)
    if traces.s_max < n * K:
        raise ValueError(f"need s_max >= {n * K} for this test function, got {traces.s_max}")
    ks = np.arange(-K, K + 1)
    if n == 1:
        acc = np.sum(f.hat(ks[:, None] / N) * traces[ks] * traces[-ks])
    else:
        acc = 0j
        rest = _tuple_grid(ks, n - 1)
        t_rest = np.prod(traces[rest], axis=1)
        for k1 in ks:
            k = np.concatenate([np.full((rest.shape[0], 1), k1), rest], axis=1)
            closure = -k.sum(axis=1)
            acc += np.sum(f.hat(k / N) * traces[k1] * t_rest * traces[closure])
    acc = acc / ((TWO_PI ** (n / 2)) * N**n)
    if abs(acc.imag) > IMAG_TOL * (1 + abs(acc.real)):
        raise NumericalConsistencyError(f"imaginary residue {acc.imag:.3e} in S_N(f)",
                                        {"real": acc.real, "imag": acc.imag})
    return float(acc.real)


# ---------------------------------------------------------------------------
# exact moments by lattice sums
# ---------------------------------------------------------------------------

def _free_grid_chunks(dim, K, chunk):
    side = 2 * K + 1
    total = side**dim
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total))
        yield np.stack(np.unravel_index(idx, (side,) * dim), axis=-1).astype(np.int64) - K


def partition_lattice_sum(N: int, f: TestFunction, pi, w: WindowStructure,
                          budget: int = LATTICE_BUDGET, chunk: int = 1 << 16) -> float:
    """``sum_k prod_windows hat_f(k_window / N) prod_B kappa_|B|(k_B)`` over ``L_pi`` in ``Z^d``.

    Each window holds ``n`` free frequencies and one closure ``-sum``; only
    the free ones enter ``hat_f`` and are bounded by the Fourier cutoff.
    """
    n = w.l - 1
    par = parametrize_subspace(pi, w)
    R = par.int_matrix()
    # a block of size >= 2 containing an identically zero coordinate kills the term
    zero_rows = {i for i in range(par.ambient_dim) if not R[i].any()}
    if any(len(b) > 1 and zero_rows.intersection(b) for b in pi.blocks):
        return 0.0
    K = f.fourier_cutoff(N)
    if (2 * K + 1) ** par.dim > budget:
        raise CapacityError(f"lattice box of {(2 * K + 1) ** par.dim} points exceeds budget {budget}",
                            )
    hat_cols = [list(win[:n]) for win in w.windows]
    bounded = [i for cols in hat_cols for i in cols]
    total = 0.0
    chunks = [np.zeros((1, 0), dtype=np.int64)] if par.dim == 0 else _free_grid_chunks(par.dim, K, chunk)
    for free in chunks:
        k = free @ R.T if par.dim else np.zeros((1, par.ambient_dim), dtype=np.int64)
        k = k[np.all(np.abs(k[:, bounded]) <= K, axis=1)]
        # hat factors are cheap, so apply them first and drop exact zeros
        prod = np.ones(k.shape[0])
        for cols in hat_cols:
            prod *= f.hat(k[:, cols] / N)
        for b in sorted(pi.blocks, key=len):
            keep = prod != 0
            k, prod = k[keep], prod[keep]
            if not k.shape[0]:
                break
            prod *= kappa_batch(N, k[:, list(b)])
        total += float(np.sum(prod))
    return total


def _check_arity(f, limit, what):
    if f.arity > limit:
        raise CapacityError(f"{what} is implemented for arity <= {limit}, got {f.arity}")


def mean_exact(N: int, f: TestFunction, budget: int = LATTICE_BUDGET) -> float:
    """Exact ``E S_N(f)`` for CUE(N) as a partition sum of lattice sums."""
    _check_arity(f, 3, "mean_exact")
    if f.is_zero:
        return 0.0
    n = f.arity
    w = WindowStructure(1, n + 1)
    total = sum(partition_lattice_sum(N, f, pi, w, budget) for pi in enumerate_set_partitions(n + 1))
    return total / (TWO_PI ** (n / 2) * N**n)


def centered_moment_exact(N: int, f: TestFunction, m: int, budget: int = LATTICE_BUDGET) -> float:
    """Exact ``E (S_N(f) - E S_N(f))^m`` over connecting partitions of ``m`` windows."""
    if m < 2:
        raise ValueError("m must be at least 2")
    if f.is_zero:
        return 0.0
    n = f.arity
    w = WindowStructure(m, n + 1)
    parts = enumerate_connecting_partitions(m, n + 1)
    total = sum(partition_lattice_sum(N, f, pi, w, budget) for pi in parts)
    return total / (TWO_PI ** (n * m / 2) * N ** (n * m))


def variance_exact(N: int, f: TestFunction, budget: int = LATTICE_BUDGET) -> float:
    """Exact ``Var S_N(f)`` for CUE(N)."""
    _check_arity(f, 2, "variance_exact")
    return centered_moment_exact(N, f, 2, budget)


def mean_closed_form_pairs(N: int, f: TestFunction) -> float:
    """Pair-statistic mean ``(2 pi)^{-1/2} [sum_k hat_f(k/N) min(|k|/N, 1) + N hat_f(0)]``."""
    if f.arity != 1:
        raise ValueError("the pair formula needs arity 1")
    K = f.fourier_cutoff(N)
    k = np.arange(-K, K + 1)
    t = k / N
    hat = f.hat(t[:, None])
    s = math.fsum(hat * np.minimum(np.abs(t), 1.0))
    return (s + N * float(f.hat(np.zeros((1, 1)))[0])) / math.sqrt(TWO_PI)
