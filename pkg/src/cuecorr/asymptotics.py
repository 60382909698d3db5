"""Leading coefficients ``M(f)`` and ``sigma^2(f)`` of the mean and variance.

Both are sums over partitions of integrals over ``L_pi`` of

    prod_windows hat_f(t_window) * prod_B c_|B|(t_B)

against the Lebesgue measure in the free coordinates of
:func:`cuecorr.lattice.parametrize_subspace`.

The integrands are piecewise smooth with kinks on hyperplanes where a subset
sum of some block equals -1, 0 or 1, plus the kinks of ``hat_f``.  In free
dimension <= 2 the kink lines are computed explicitly and Gauss-Legendre
rules are laid on the pieces of the arrangement (exact for piecewise
polynomials).  In higher dimension the same two-dimensional rule is
applied to the last two axes at every node of a tensor Gauss-Legendre rule
on the leading axes.  The result is recomputed at twice the step and the
difference is the reported error.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .cumulants import c_rescaled_batch, compositions, vanishes_by_support
from .errors import CapacityError, ToleranceError
from .lattice import SubspaceParametrization, parametrize_subspace
from .partitions import (SetPartition, WindowStructure, enumerate_connecting_partitions,
                         enumerate_set_partitions)
from .testfunctions import TestFunction

__all__ = [
    "AsymptoticResult",
    "SubspaceParametrization",
    "parametrize_subspace",
    "partition_integral",
    "mean_asymptotic",
    "variance_asymptotic",
    "variance_closed_form_pairs",
]

TWO_PI = 2.0 * math.pi
DEFAULT_TOL = {1: 1e-6, 2: 1e-4, 3: 1e-4}
QUAD_BUDGET = 10_000_000
GL_ORDER = 10
ITER_ORDER = 6
EPS = 1e-15


@dataclass
class AsymptoticResult:
    value: float
    error_estimate: float
    terms: list = field(default_factory=list)  # (blocks, weighted contribution)

    def as_dict(self):
        return {
            "value": self.value,
            "error_estimate": self.error_estimate,
            "terms": [{"blocks": [list(b) for b in blocks], "value": v} for blocks, v in self.terms],
        }


class _Integrand:
    """``prod hat_f * prod c`` on the free coordinates of one partition."""

    def __init__(self, f: TestFunction, pi: SetPartition, w: WindowStructure):
        self.f = f
        self.pi = pi
        self.w = w
        self.n = w.l - 1
        self.par = parametrize_subspace(pi, w)
        self.R = self.par.matrix()
        self.hat_cols = [list(win[:self.n]) for win in w.windows]
        self.bounded = [i for cols in self.hat_cols for i in cols]
        zero_rows = {i for i in range(self.par.ambient_dim) if not self.R[i].any()}
        self.vanishes = any(len(b) > 1 and zero_rows.intersection(b) for b in pi.blocks)
        if not set(self.par.free_indices) <= set(self.bounded):
            raise AssertionError(f"free coordinates {self.par.free_indices} include a closure")
        self.A = f.support_radius
        # on the box, |t_i| <= A for hat coordinates and <= n A for closures;
        # a block of size >= 3 whose bound stays within 2 has c identically zero
        reach = np.full(self.par.ambient_dim, self.n * self.A)
        reach[self.bounded] = self.A
        reach = np.minimum(reach, self.A * np.abs(self.R).sum(axis=1))
        if any(len(b) >= 3 and vanishes_by_support(reach[list(b)]) for b in pi.blocks):
            self.vanishes = True

    @property
    def dim(self):
        return self.par.dim

    def __call__(self, u):
        u = np.asarray(u, dtype=float).reshape(-1, self.dim) if self.dim else np.zeros((1, 0))
        t = u @ self.R.T
        val = np.ones(t.shape[0])
        inside = np.all(np.abs(t[:, self.bounded]) <= self.A * (1 + 1e-12), axis=1)
        val[~inside] = 0.0
        for cols in self.hat_cols:
            live = val != 0
            val[live] *= self.f.hat(t[live][:, cols])
        for b in self.pi.blocks:
            if len(b) == 1:
                continue  # the constraint pins t_b = 0, where c_1 = 1
            live = np.nonzero(val)[0]
            if live.size:
                val[live] *= c_rescaled_batch(t[live][:, list(b)])
        return val

    def kink_forms(self):
        """``(alpha, beta)`` with ``alpha . u = beta`` along every kink of the integrand."""
        forms = set()

        def add(alpha, beta):
            alpha = np.asarray(alpha, dtype=float)
            if not np.any(np.abs(alpha) > 1e-15):
                return
            lead = alpha[np.nonzero(np.abs(alpha) > 1e-15)[0][0]]
            forms.add(tuple(np.round(np.append(alpha, beta) / lead, 12)))

        for b in self.pi.blocks:
            if len(b) < 2:
                continue
            for r in range(1, len(b)):
                for S in itertools.combinations(b, r):
                    alpha = self.R[list(S)].sum(axis=0)
                    for beta in (-1.0, 0.0, 1.0):
                        add(alpha, beta)
        for i in self.bounded:
            for v in self.f.hat_kinks:
                add(self.R[i], v)
            add(self.R[i], self.A)
            add(self.R[i], -self.A)
        return [(np.array(fm[:-1]), fm[-1]) for fm in sorted(forms)]


def _gauss_legendre(q):
    x, wts = np.polynomial.legendre.leggauss(q)
    return x, wts


def _pieces(points, lo, hi, h):
    """Sorted breakpoints in ``[lo, hi]`` with gaps no wider than ``h``."""
    pts = np.unique(np.clip(np.concatenate([[lo, hi], points]), lo, hi))
    out = [pts[0]]
    for a, b in zip(pts[:-1], pts[1:]):
        if b - a < 1e-14:
            continue
        k = max(1, int(math.ceil((b - a) / h)))
        out.extend(a + (b - a) * np.arange(1, k + 1) / k)
    return np.array(out)


def _nodes_on(breaks, q):
    x, wts = _gauss_legendre(q)
    a, b = breaks[:-1, None], breaks[1:, None]
    half = 0.5 * (b - a)
    return (a + half * (x[None] + 1)).ravel(), (half * wts[None]).ravel()


class _Budget:
    def __init__(self, limit):
        self.limit = limit
        self.used = 0

    def charge(self, n):
        self.used += n
        if self.used > self.limit:
            raise CapacityError(f"quadrature needs more than {self.limit} integrand evaluations")


def _rule_1d(forms, evaluate, A, h, q, budget):
    pts = np.array([beta / al[0] for al, beta in forms if abs(al[0]) > EPS])
    nodes, wts = _nodes_on(_pieces(pts, -A, A, h), q)
    budget.charge(nodes.size)
    return float(np.dot(evaluate(nodes[:, None]), wts))


def _rule_2d(forms, evaluate, A, h, q, budget):
    """Kink-aligned rule on ``[-A, A]^2``: exact for piecewise polynomials of degree < 2q."""
    al = np.array([f[0] for f in forms]).reshape(-1, 2)
    be = np.array([f[1] for f in forms])
    vert = np.abs(al[:, 1]) <= EPS
    vertical = be[vert & (np.abs(al[:, 0]) > EPS)] / al[vert & (np.abs(al[:, 0]) > EPS), 0]
    la, lb = al[~vert], be[~vert]
    # u1 of every pairwise crossing of non-vertical lines
    i, j = np.triu_indices(la.shape[0], 1)
    det = la[i, 0] * la[j, 1] - la[i, 1] * la[j, 0]
    ok = np.abs(det) > EPS
    cross = (lb[i] * la[j, 1] - lb[j] * la[i, 1])[ok] / det[ok]
    cross = np.unique(np.round(cross[np.abs(cross) < A], 12))
    u1, w1 = _nodes_on(_pieces(np.concatenate([vertical, cross]), -A, A, h), q)
    slope, icept = -la[:, 0] / la[:, 1], lb / la[:, 1]
    grid = np.linspace(-A, A, max(2, int(math.ceil(2 * A / h)) + 1))
    x, wts = _gauss_legendre(q)
    n_br = slope.size + grid.size
    budget.charge(u1.size * (n_br - 1) * q)
    total = 0.0
    batch = max(1, (1 << 17) // ((n_br - 1) * q))
    for start in range(0, u1.size, batch):
        u = u1[start:start + batch]
        br = np.clip(icept[None] + slope[None] * u[:, None], -A, A)
        br = np.sort(np.concatenate([br, np.broadcast_to(grid, (u.size, grid.size))], axis=1), axis=1)
        lo, half = br[:, :-1, None], 0.5 * (br[:, 1:, None] - br[:, :-1, None])
        u2 = (lo + half * (x + 1)).reshape(u.size, -1)
        wt = (w1[start:start + batch, None] * (half * wts).reshape(u.size, -1))
        live = wt > 0  # empty pieces where breakpoints coincide or sit on the box edge
        rows, cols = np.nonzero(live)
        total += float(np.dot(wt[live], evaluate(np.column_stack([u[rows], u2[rows, cols]]))))
    return total


def _restrict(forms, fixed):
    """Forms on the trailing coordinates once the leading ones equal ``fixed``."""
    k = fixed.size
    out = []
    for al, beta in forms:
        tail = al[k:]
        if np.any(np.abs(tail) > EPS):
            out.append((tail, beta - float(np.dot(al[:k], fixed))))
    return out


def _integrate(g: _Integrand, h: float, q: int, budget: _Budget) -> float:
    """Tensor Gauss-Legendre on all but the last two axes, kink-aligned on those.

    With ``dim <= 2`` the rule is exact up to the Gauss-Legendre order on
    every piece.  Above that the leading axes are cut only at their own
    axis-parallel kinks and at spacing ``h``; the functions they integrate
    have already been smoothed by the inner integration.
    """
    A, d = g.A, g.dim
    forms = g.kink_forms()
    if d == 1:
        return _rule_1d(forms, g, A, h, q, budget)
    if d == 2:
        return _rule_2d(forms, g, A, h, q, budget)
    lead = d - 2
    axis_nodes = []
    for ax in range(lead):
        own = [beta / al[ax] for al, beta in forms
               if abs(al[ax]) > EPS and np.count_nonzero(np.abs(al) > EPS) == 1]
        axis_nodes.append(_nodes_on(_pieces(np.array(own), -A, A, h), q))
    total = 0.0
    for combo in itertools.product(*[range(len(x)) for x, _ in axis_nodes]):
        fixed = np.array([axis_nodes[ax][0][c] for ax, c in enumerate(combo)])
        weight = math.prod(axis_nodes[ax][1][c] for ax, c in enumerate(combo))

        def evaluate(pts, fixed=fixed):
            return g(np.column_stack([np.broadcast_to(fixed, (pts.shape[0], lead)), pts]))

        total += weight * _rule_2d(_restrict(forms, fixed), evaluate, A, h, q, budget)
    return total


def partition_integral(f: TestFunction, pi: SetPartition, w: WindowStructure,
                       step: float = 0.5, budget: int = QUAD_BUDGET):
    """``(value, error_estimate)`` of the integral over ``L_pi`` for one partition.

    The estimate is the change between step ``2 * h`` and ``h``, with
    ``h = step * min(1, A)`` for support radius ``A``; the returned value is
    the finer one.
    """
    g = _Integrand(f, pi, w)
    if g.vanishes or f.is_zero:
        return 0.0, 0.0
    if g.dim == 0:
        return float(g(np.zeros((1, 0)))[0]), 0.0
    q = GL_ORDER if g.dim <= 2 else ITER_ORDER
    b = _Budget(budget)
    # pieces scale with a narrow support, else both passes share one piece
    h = step * min(1.0, g.A)
    coarse = _integrate(g, 2 * h, q, b)
    fine = _integrate(g, h, q, b)
    return fine, abs(fine - coarse)


def _finish(total, err, terms, tol, what):
    scale = max(abs(total), 1e-300)
    if err > tol * scale and err > 1e-14:
        raise ToleranceError(f"{what}: step halving changed the result by {err:.3e} "
                             f"(tolerance {tol:g} relative to {total:.6g})",
                             {"value": total, "error_estimate": err,
                              "terms": [(list(map(list, b)), v) for b, v in terms]})
    return AsymptoticResult(float(total), float(err), [(b, float(v)) for b, v in terms])


def mean_asymptotic(f: TestFunction, form: str = "partitions", tol: float | None = None,
                    step: float = 0.5, return_details: bool = False):
    """Limit of ``E S_N(f) / N``.

    ``form="partitions"`` sums over every set partition of ``{0, ..., n}``.
    ``form="compositions"`` sums over consecutive-block partitions only,
    each weighted by ``(n+1)! / (m! n_1! ... n_m!)``; the two agree when
    ``hat_f`` is invariant under permutations of ``(t_1, ..., t_n, t_{n+1})``
    (always for ``n = 1``; e.g. ``symgauss``), not for general ``f``.
    """
    n = f.arity
    if n > 3:
        raise CapacityError("mean_asymptotic supports arity <= 3")
    tol = DEFAULT_TOL[n] if tol is None else tol
    if f.is_zero:
        return AsymptoticResult(0.0, 0.0) if return_details else 0.0
    w = WindowStructure(1, n + 1)
    terms, total, err = [], 0.0, 0.0
    if form == "partitions":
        weighted = [(pi, 1.0) for pi in enumerate_set_partitions(n + 1)]
    elif form == "compositions":
        weighted = []
        for c in compositions(n + 1):
            m = len(c.parts)
            coef = math.factorial(n + 1) / math.factorial(m)
            for q in c.parts:
                coef /= math.factorial(q)
            cuts = [0, *c.breakpoints, n + 1]
            pi = SetPartition(n + 1, tuple(tuple(range(cuts[i], cuts[i + 1])) for i in range(m)))
            weighted.append((pi, coef))
    else:
        raise ValueError(f"unknown form {form!r}")
    norm = TWO_PI ** (-n / 2)
    for pi, coef in weighted:
        v, e = partition_integral(f, pi, w, step)
        terms.append((pi.blocks, norm * coef * v))
        total += norm * coef * v
        err += norm * coef * e
    res = _finish(total, err, terms, tol, "mean_asymptotic")
    return res if return_details else res.value


def variance_asymptotic(f: TestFunction, tol: float | None = None, step: float = 0.5,
                        budget: int = QUAD_BUDGET, return_details: bool = False):
    """Limit of ``Var S_N(f) / N`` as a sum over connecting partitions of two windows."""
    n = f.arity
    if n > 2:
        raise CapacityError("variance_asymptotic supports arity <= 2")
    tol = DEFAULT_TOL[n] if tol is None else tol
    if f.is_zero:
        return AsymptoticResult(0.0, 0.0) if return_details else 0.0
    w = WindowStructure(2, n + 1)
    norm = TWO_PI ** (-n)
    terms, total, err = [], 0.0, 0.0
    for pi in enumerate_connecting_partitions(2, n + 1):
        v, e = partition_integral(f, pi, w, step, budget)
        if v != 0.0:
            terms.append((pi.blocks, norm * v))
        total += norm * v
        err += norm * e
    res = _finish(total, err, terms, tol, "variance_asymptotic")
    return res if return_details else res.value


def _quad(func, lo, hi, points=()):
    pts = sorted({p for p in points if lo < p < hi})
    val, _ = integrate.quad(func, lo, hi, points=pts or None, limit=400,
                            epsabs=1e-13, epsrel=1e-12)
    return val


def variance_closed_form_pairs(f: TestFunction) -> float:
    """Pair-statistic limiting variance as three explicit integrals.

        (1/pi) int hat(t)^2 min(|t|, 1)^2 dt
      - (1/pi) int_{|s-t| <= 1, max(|s|,|t|) >= 1} hat(s) hat(t) (1 - |s-t|) ds dt
      - (1/pi) int_{|s|, |t| <= 1, st >= 0, |s+t| > 1} hat(s) hat(t) (|s+t| - 1) ds dt

    The second region meets only the quadrants where ``s`` and ``t`` share a
    sign, and so does the third; both are taken over both such quadrants.  Adaptive quadrature with
    breakpoints at the kinks; independent of the partition machinery.
    """
    if f.arity != 1:
        raise ValueError("the pair variance formula needs arity 1")
    if f.is_zero:
        return 0.0
    A = f.support_radius
    kinks = tuple(f.hat_kinks)

    def hat(x):
        return float(f.hat(np.array([[x]]))[0])

    first = _quad(lambda t: hat(t) ** 2 * min(abs(t), 1.0) ** 2, -A, A, (-1.0, 0.0, 1.0) + kinks)

    def inner_second(s):
        hs = hat(s)
        if hs == 0.0:
            return 0.0
        g = lambda t: hat(t) * (1.0 - abs(s - t))
        pts = (s,) + kinks

        def seg(lo, hi):
            lo, hi = max(lo, -A), min(hi, A)
            return _quad(g, lo, hi, pts) if hi > lo else 0.0

        if abs(s) >= 1:
            return hs * seg(s - 1, s + 1)
        # |s| < 1: only |t| >= 1 qualifies
        return hs * (seg(1.0, s + 1) + seg(s - 1, -1.0))

    outer_pts = (-1.0, 0.0, 1.0) + kinks + tuple(k + d for k in kinks for d in (-1.0, 1.0))
    second = _quad(inner_second, -A, A, outer_pts + (-2.0, 2.0))

    def inner_third(s):
        hs = hat(s)
        g = lambda t: hat(t) * (abs(s) + abs(t) - 1.0)
        r = 1.0 - abs(s)
        return hs * (_quad(g, r, 1.0, kinks) if s >= 0 else _quad(g, -1.0, -r, kinks))

    third = _quad(inner_third, -1.0, 1.0, (0.0,) + kinks)
    return (first - second - third) / math.pi
