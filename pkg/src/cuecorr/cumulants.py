"""Joint cumulants of CUE trace powers ``T_{N,k} = Tr U^k``.

``kappa_exact(N, k)`` is the joint cumulant of ``T_{N,k_1}, ..., T_{N,k_p}``.
For ``p > 1`` it vanishes unless the frequencies are nonzero and sum to zero,
and is then a signed combination, over compositions ``(p_1, ..., p_m)`` of
``p`` and all orderings of ``k``, of

    J_N = min(N, max(0, partial sums) + max(0, -partial sums)),

the partial sums being taken at the composition breakpoints.  The rescaled
function ``c_p(t) = kappa_p(N t) / N`` is independent of ``N`` and uses the
same combination with ``min(1, ...)``.

Three evaluation paths exist and are cross-checked in the tests:

* :func:`kappa_exact` -- exact ``Fraction`` weights, permutations grouped by
  repeated values, memoised on a canonical key;
* :func:`kappa_naive` -- the literal ``p!`` sum, for small fixtures;
* :func:`kappa_batch` -- integer-scaled weights, vectorised over many tuples.
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import CapacityError, NumericalConsistencyError

MAX_ORDER = 7
HYPERPLANE_TOL = 1e-12


@dataclass(frozen=True)
class Composition:
    """Ordered parts ``(p_1, ..., p_m)``, all positive."""

    parts: tuple

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        if not parts or min(parts) < 1:
            raise ValueError(f"composition parts must be positive, got {self.parts}")
        object.__setattr__(self, "parts", parts)

    @property
    def total(self) -> int:
        return sum(self.parts)

    @property
    def breakpoints(self) -> tuple:
        """Prefix lengths ``p_1, p_1+p_2, ..., p_1+...+p_{m-1}``."""
        return tuple(itertools.accumulate(self.parts))[:-1]


def compositions(p: int):
    """All ``2**(p-1)`` compositions of ``p``, ordered by breakpoint bitmask."""
    for mask in range(1 << (p - 1)):
        cuts = [0] + [b for b in range(1, p) if mask >> (b - 1) & 1] + [p]
        yield Composition(tuple(cuts[i + 1] - cuts[i] for i in range(len(cuts) - 1)))


def composition_weight(c: Composition) -> Fraction:
    """``(-1)^m / (m * p_1! * ... * p_m!)``."""
    m = len(c.parts)
    den = m
    for q in c.parts:
        den *= math.factorial(q)
    return Fraction((-1) ** m, den)


@functools.lru_cache(maxsize=None)
def _structure(p: int):
    """Per-order tables: compositions, weights, breakpoint masks and permutations."""
    comps = list(compositions(p))
    weights = [composition_weight(c) for c in comps]
    scale = math.lcm(*(w.denominator for w in weights))
    int_weights = np.array([int(w * scale) for w in weights], dtype=np.int64)
    # mask[c, b] is True when prefix length b+1 is a breakpoint of composition c
    mask = np.zeros((len(comps), max(p - 1, 1)), dtype=bool)
    for ci, c in enumerate(comps):
        for b in c.breakpoints:
            mask[ci, b - 1] = True
    perms = np.array(list(itertools.permutations(range(p))), dtype=np.intp)
    return comps, weights, scale, int_weights, mask, perms


def _check_order(p):
    if not 1 <= p <= MAX_ORDER:
        raise CapacityError(f"cumulant order {p} outside 1..{MAX_ORDER}")


def _breakpoint_extremes(partial, bps):
    pos = max([0] + [partial[b - 1] for b in bps])
    neg = max([0] + [-partial[b - 1] for b in bps])
    return pos, neg


def j_value(c: Composition, t: Sequence[float]) -> float:
    """``min(1, max(0, partial sums) + max(0, -partial sums))`` at the breakpoints of ``c``."""
    if len(t) != c.total:
        raise ValueError(f"{len(t)} arguments for a composition of {c.total}")
    partial = list(itertools.accumulate(t))
    pos, neg = _breakpoint_extremes(partial, c.breakpoints)
    return min(1, pos + neg)


def J_N_value(N: int, c: Composition, k: Sequence[int]) -> int:
    """Integer counterpart of :func:`j_value`, clamped at ``N`` instead of 1."""
    k = [int(x) for x in k]
    if len(k) != c.total:
        raise ValueError(f"{len(k)} frequencies for a composition of {c.total}")
    if sum(k) != 0:
        raise ValueError(f"frequencies must sum to zero, got {sum(k)}")
    partial = list(itertools.accumulate(k))
    pos, neg = _breakpoint_extremes(partial, c.breakpoints)
    return min(N, pos + neg)


def _canonical_key(k):
    a = tuple(sorted(k))
    b = tuple(sorted(-x for x in k))
    return min(a, b)


def kappa_exact(N: int, k: Sequence[int]) -> int:
    """Exact joint cumulant ``kappa_p^{(N)}(k_1, ..., k_p)`` for ``p <= 7``."""
    k = tuple(int(x) for x in k)
    p = len(k)
    _check_order(p)
    if N < 1:
        raise ValueError("N must be positive")
    if p == 1:
        return N if k[0] == 0 else 0
    if sum(k) != 0 or 0 in k:
        return 0
    return _kappa_cached(N, _canonical_key(k))


@functools.lru_cache(maxsize=1 << 18)
def _kappa_cached(N, key):
    p = len(key)
    comps, weights, *_ = _structure(p)
    bps = [c.breakpoints for c in comps]
    # each distinct arrangement stands for prod(mult!) permutations
    mult = 1
    for _, grp in itertools.groupby(key):
        mult *= math.factorial(len(list(grp)))
    counts = [0] * len(comps)
    for arr in set(itertools.permutations(key)):
        partial = list(itertools.accumulate(arr))
        for ci, bp in enumerate(bps):
            pos, neg = _breakpoint_extremes(partial, bp)
            counts[ci] += min(N, pos + neg)
    total = sum(w * (mult * cnt) for w, cnt in zip(weights, counts))
    if total.denominator != 1:
        raise NumericalConsistencyError(f"non-integer cumulant {total} for N={N}, k={key}")
    return int(total)


def kappa_naive(N: int, k: Sequence[int]) -> Fraction:
    """Literal formula: every composition, every one of the ``p!`` orderings, no shortcuts.

    Only the ``p == 1`` case and the zero-sum / nonzero-entry rule are applied
    separately.  Meant for tests on small ``p``.
    """
    k = tuple(int(x) for x in k)
    p = len(k)
    _check_order(p)
    if p == 1:
        return Fraction(N if k[0] == 0 else 0)
    if sum(k) != 0 or 0 in k:
        return Fraction(0)
    total = Fraction(0)
    for c in compositions(p):
        s = sum(J_N_value(N, c, [k[i] for i in sigma]) for sigma in itertools.permutations(range(p)))
        total += composition_weight(c) * s
    return total


def vanishes_by_support(k) -> bool:
    """Quick zero test for ``p >= 3``: ``sum |k_i| <= 2N`` forces ``kappa_p = 0``.

    Callers pass ``k / N`` (or ``t``) so the threshold is 2.
    """
    return len(k) >= 3 and float(np.sum(np.abs(k))) <= 2.0 + HYPERPLANE_TOL


def _subset_max(partial):
    """``out[S, ...] = max(0, max_{b in S} partial[b, ...])`` for every bitmask ``S``.

    ``partial`` has the breakpoint axis first; subset ``S`` is composition
    number ``S`` in :func:`compositions` order.
    """
    m = partial.shape[0]
    out = np.empty((1 << m,) + partial.shape[1:], dtype=partial.dtype)
    out[0] = 0
    for S in range(1, 1 << m):
        low = S & -S
        np.maximum(out[S ^ low], partial[low.bit_length() - 1], out=out[S])
    return out


def _chunk_rows(chunk, n_perms, n_comps, cap=1 << 22):
    return max(1, min(chunk, cap // (n_perms * n_comps)))


def kappa_batch(N: int, K, chunk: int = 1 << 14, use_support_shortcut: bool = True) -> np.ndarray:
    """Exact cumulants for each row of the integer array ``K`` of shape ``(Q, p)``.

    Vectorised over rows: every ordering is evaluated (no grouping), weights
    are scaled to integers and the result is checked for exact divisibility.
    With ``use_support_shortcut`` rows with ``p >= 3`` and ``sum |k| <= 2N``
    are set to zero without evaluation (they vanish identically).
    """
    K = np.asarray(K, dtype=np.int64)
    if K.ndim != 2:
        raise ValueError("K must be a 2-d integer array")
    Q, p = K.shape
    _check_order(p)
    out = np.zeros(Q, dtype=np.int64)
    if Q == 0:
        return out
    if p == 1:
        out[K[:, 0] == 0] = N
        return out
    live = (K.sum(axis=1) == 0) & np.all(K != 0, axis=1)
    if use_support_shortcut and p >= 3:
        live &= np.abs(K).sum(axis=1) > 2 * N
    idx = np.nonzero(live)[0]
    if idx.size == 0:
        return out
    _, _, scale, int_weights, mask, perms = _structure(p)
    if int(np.abs(int_weights).sum()) * len(perms) * N > 2**62:
        raise CapacityError(f"integer accumulation would overflow for N={N}, p={p}")
    chunk = _chunk_rows(chunk, len(perms), 1 << (p - 1))
    for start in range(0, idx.size, chunk):
        rows = idx[start:start + chunk]
        partial = np.ascontiguousarray(np.cumsum(K[rows][:, perms], axis=2)[:, :, :-1].transpose(2, 0, 1))
        J = np.minimum(N, _subset_max(partial) + _subset_max(-partial))  # (C, q, P)
        scaled = int_weights @ J.sum(axis=2)
        if np.any(scaled % scale):
            bad = rows[np.nonzero(scaled % scale)[0][0]]
            raise NumericalConsistencyError(f"non-integer cumulant at N={N}, k={K[bad].tolist()}")
        out[rows] = scaled // scale
    return out


def c_rescaled_batch(T, chunk: int = 1 << 13, use_support_shortcut: bool = True) -> np.ndarray:
    """Rescaled cumulant ``c_p`` on each row of the float array ``T`` of shape ``(Q, p)``."""
    T = np.asarray(T, dtype=float)
    Q, p = T.shape
    _check_order(p)
    out = np.zeros(Q)
    if Q == 0:
        return out
    if p == 1:
        out[np.abs(T[:, 0]) <= HYPERPLANE_TOL] = 1.0
        return out
    live = (np.abs(T.sum(axis=1)) <= HYPERPLANE_TOL) & np.all(T != 0, axis=1)
    if use_support_shortcut and p >= 3:
        live &= np.abs(T).sum(axis=1) > 2.0
    idx = np.nonzero(live)[0]
    if idx.size == 0:
        return out
    _, weights, _, _, mask, perms = _structure(p)
    fw = np.array([float(w) for w in weights])
    chunk = _chunk_rows(chunk, len(perms), 1 << (p - 1))
    for start in range(0, idx.size, chunk):
        rows = idx[start:start + chunk]
        partial = np.ascontiguousarray(np.cumsum(T[rows][:, perms], axis=2)[:, :, :-1].transpose(2, 0, 1))
        j = np.minimum(1.0, _subset_max(partial) + _subset_max(-partial))
        out[rows] = fw @ j.sum(axis=2)
    return out


def c_rescaled(t: Sequence[float]) -> float:
    """Rescaled cumulant ``c_p(t_1, ..., t_p)``; zero off the hyperplane ``sum t = 0``."""
    t = np.asarray(t, dtype=float).reshape(1, -1)
    return float(c_rescaled_batch(t, use_support_shortcut=False)[0])


# ---------------------------------------------------------------------------
# closed forms for p <= 4
# ---------------------------------------------------------------------------

def _kappa3_positive(N, a, b):
    """``kappa_3(a, b, -(a+b))`` for ``a, b > 0``."""
    if a + b <= N:
        return 0
    if a <= N and b <= N:
        return a + b - N
    if a > N and b <= N:
        return b
    if b > N and a <= N:
        return a
    return N


def _kappa4_pairs(N, a, b):
    """``kappa_4(a, b, -a, -b)`` in terms of ``|a|, |b| >= 1``."""
    a, b = abs(a), abs(b)
    if a == b:
        if a <= N / 2:
            return 0
        if a <= N:
            return N - 2 * a
        return -N
    if 1 <= abs(a - b) <= N - 1 and max(a, b) >= N:
        return abs(a - b) - N
    if a <= N - 1 and b <= N - 1 and a + b >= N + 1:
        return N - a - b
    return 0


def kappa_closed_form(N: int, k: Sequence[int]):
    """Tabulated cumulants for ``p <= 4``; ``None`` where no closed form is known.

    For ``p = 4`` only frequency multisets ``{a, b, -a, -b}`` are tabulated.
    """
    k = tuple(int(x) for x in k)
    p = len(k)
    if not 1 <= p <= 4:
        raise ValueError(f"closed forms exist for 1 <= p <= 4, got p={p}")
    if p == 1:
        return N if k[0] == 0 else 0
    if sum(k) != 0 or 0 in k:
        return 0
    if p == 2:
        return min(N, abs(k[0]))
    if p == 3:
        pos = [x for x in k if x > 0]
        neg = [x for x in k if x < 0]
        pair = pos if len(pos) == 2 else [-x for x in neg]
        return _kappa3_positive(N, *pair)
    pos = sorted(x for x in k if x > 0)
    neg = sorted(-x for x in k if x < 0)
    if pos == neg and len(pos) == 2:
        return _kappa4_pairs(N, *pos)
    return None
