"""Haar (CUE) sampling, a brute-force moment oracle and Monte Carlo experiments.

Haar unitaries come from the QR decomposition of a complex Ginibre matrix
with the phases of ``diag(R)`` moved into ``Q``; without that correction the
distribution is not Haar.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import CapacityError, ConfigError, NumericalConsistencyError
from .statistic import power_traces, required_s_max, statistic_fourier
from .testfunctions import TestFunction

TWO_PI = 2.0 * math.pi
UNIT_CIRCLE_TOL = 1e-8
MAX_REDRAWS = 100
JACKKNIFE_BLOCK = 100
ORACLE_MAX_N = 3
ORACLE_MAX_POINTS = 5_000_000


def haar_unitary(N: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def _angles(eig):
    theta = np.mod(np.angle(eig), TWO_PI)
    # mod can round up to exactly 2 pi for tiny negative angles
    theta[theta >= TWO_PI] = 0.0
    return np.sort(theta)


def sample_cue_eigenangles(N: int, rng: np.random.Generator, stats: dict | None = None) -> np.ndarray:
    """Sorted eigenangles in ``[0, 2 pi)`` of one Haar unitary of size ``N``.

    A draw whose eigenvalues leave the unit circle by more than ``1e-8`` is
    discarded and redrawn; ``stats["rejected"]`` counts such draws.
    """
    if N < 1:
        raise ConfigError("N must be at least 1")
    for _ in range(MAX_REDRAWS):
        eig = np.linalg.eigvals(haar_unitary(N, rng))
        if np.max(np.abs(np.abs(eig) - 1.0)) <= UNIT_CIRCLE_TOL:
            return _angles(eig)
        if stats is not None:
            stats["rejected"] = stats.get("rejected", 0) + 1
    raise NumericalConsistencyError(f"{MAX_REDRAWS} consecutive draws left the unit circle (N={N})")


# ---------------------------------------------------------------------------
# brute-force oracle
# ---------------------------------------------------------------------------

def brute_force_joint_moment(N: int, k) -> complex:
    """``E prod_j T_{N,k_j}`` by direct integration against the CUE density.

    The density ``prod_{a<b} |e^{i theta_a} - e^{i theta_b}|^2 / ((2 pi)^N N!)``
    times the trace product is a trigonometric polynomial of degree at most
    ``sum |k| + N - 1`` per angle, so the equispaced rule with more nodes than
    that is exact up to rounding.
    """
    k = [int(x) for x in k]
    if not 1 <= N <= ORACLE_MAX_N:
        raise CapacityError(f"the brute-force oracle supports 1 <= N <= {ORACLE_MAX_N}")
    G = 4 * (sum(abs(x) for x in k) + N)
    if G**N > ORACLE_MAX_POINTS:
        raise CapacityError(f"oracle grid of {G}^{N} points exceeds {ORACLE_MAX_POINTS}")
    theta = TWO_PI * np.arange(G) / G
    mesh = np.meshgrid(*([theta] * N), indexing="ij")
    z = [np.exp(1j * m) for m in mesh]
    density = np.ones(mesh[0].shape)
    for a in range(N):
        for b in range(a + 1, N):
            density = density * np.abs(z[a] - z[b]) ** 2
    prod = np.ones(mesh[0].shape, dtype=complex)
    for s in k:
        prod = prod * sum(za**s for za in z)
    return complex(np.mean(density * prod) / math.factorial(N))


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    N: int
    num_samples: int
    seed: int = 0
    threads: int | None = None

    def __post_init__(self):
        if self.N < 1:
            raise ConfigError("N must be at least 1")
        if self.num_samples < 2:
            raise ConfigError("need at least 2 samples")


@dataclass
class MomentReport:
    mean: float
    variance: float
    skewness: float
    kurtosis: float
    se_mean: float
    se_variance: float
    se_skewness: float
    se_kurtosis: float
    num_samples: int
    seed: int
    rejected: int = 0
    values: np.ndarray | None = field(default=None, repr=False)

    def as_dict(self, include_values=False):
        d = asdict(self)
        d.pop("values")
        if include_values and self.values is not None:
            d["values"] = self.values.tolist()
        return d


def _moments(x):
    m = x.mean()
    c = x - m
    var = np.mean(c**2)
    if var == 0.0:
        return np.array([m, 0.0, 0.0, 0.0])
    return np.array([m, c.var(ddof=1), np.mean(c**3) / var**1.5, np.mean(c**4) / var**2])


def jackknife(values, stat=_moments, block: int = JACKKNIFE_BLOCK):
    """Delete-one-block jackknife: ``(stat(values), standard errors)``."""
    x = np.asarray(values, dtype=float)
    nb = x.size // block
    if nb < 2:
        block = max(1, x.size // 2)
        nb = x.size // block
    x_used = x[:nb * block]
    full = np.asarray(stat(x))
    blocks = x_used.reshape(nb, block)
    loo = np.array([stat(np.delete(blocks, i, axis=0).ravel()) for i in range(nb)])
    se = np.sqrt((nb - 1) / nb * np.sum((loo - loo.mean(axis=0)) ** 2, axis=0))
    return full, se


def _worker_count(cfg):
    if cfg.threads is not None:
        return max(1, int(cfg.threads))
    env = os.environ.get("CUE_CORR_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"CUE_CORR_THREADS must be an integer, got {env!r}") from None
    return 1


def sample_statistic(f: TestFunction, N: int, seed: int, index: int, stats=None) -> float:
    """``S_N(f)`` on sample ``index``; each sample has its own random stream."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))
    theta = sample_cue_eigenangles(N, rng, stats)
    return statistic_fourier(f, power_traces(theta, required_s_max(f, N)))


def monte_carlo_clt_experiment(config: ExperimentConfig, f: TestFunction) -> MomentReport:
    """Sample ``S_N(f)`` and report its moments with jackknife errors.

    Sample ``i`` is driven by ``SeedSequence(seed, spawn_key=(i,))``, so the
    values, and hence the report, do not depend on the worker count.
    """
    n_work = _worker_count(config)
    values = np.empty(config.num_samples)
    counters = [dict() for _ in range(n_work)]
    bounds = np.linspace(0, config.num_samples, n_work + 1).astype(int)

    def run(w):
        for i in range(bounds[w], bounds[w + 1]):
            values[i] = sample_statistic(f, config.N, config.seed, i, counters[w])

    if n_work == 1:
        run(0)
    else:
        with ThreadPoolExecutor(max_workers=n_work) as pool:
            list(pool.map(run, range(n_work)))
    if f.is_zero:
        est, se = np.zeros(4), np.zeros(4)
    else:
        est, se = jackknife(values)
    return MomentReport(*map(float, est), *map(float, se), num_samples=config.num_samples,
                        seed=config.seed, rejected=sum(c.get("rejected", 0) for c in counters),
                        values=values)


def trace_second_moments(N: int, num_samples: int, seed: int = 0, s_max: int | None = None):
    """Sample means and standard errors of ``|T_{N,s}|^2`` for ``s = 1..s_max``."""
    s_max = 2 * N if s_max is None else s_max
    rng = np.random.Generator(np.random.PCG64(seed))
    acc = np.empty((num_samples, s_max))
    for i in range(num_samples):
        tr = power_traces(sample_cue_eigenangles(N, rng), s_max)
        acc[i] = np.abs(tr.values[s_max + 1:]) ** 2
    return acc.mean(axis=0), acc.std(axis=0, ddof=1) / math.sqrt(num_samples)

