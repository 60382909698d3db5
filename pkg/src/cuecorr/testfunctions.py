"""Built-in symmetric test functions and their Fourier transforms.

The transform convention is ``hat_f(xi) = (2 pi)^{-n/2} int f(x) exp(-i xi.x) dx``.
A :class:`TestFunction` carries both sides: ``hat`` drives the Fourier and
lattice computations, ``direct``/``periodic`` drive direct evaluation of the
statistic on eigenangles.

Families
--------
``gaussian:sigma=s``
    ``f(x) = exp(-|x|^2 / (2 s^2))``, ``hat_f(xi) = s^n exp(-s^2 |xi|^2 / 2)``.
    Truncated on both sides where it drops below ``eps`` (default 1e-12).
``triangle:a=a``
    ``hat_f(xi) = prod_i (1 - |xi_i| / a)^+``; compactly supported in
    frequency, so every Fourier/lattice sum is finite.
``symgauss:sigma=s``
    ``hat_f(xi) = exp(-s^2 (|xi|^2 + (sum xi)^2) / 2)``, invariant under
    permutations of ``(xi_1, ..., xi_n, -sum xi)``; this is the shape of
    test functions obtained from translation-invariant symmetric functions
    of ``n+1`` points.
``zero``
    ``hat_f = 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError

DEFAULT_TAIL_EPSILON = 1e-12


@dataclass(frozen=True)
class TestFunction:
    """A symmetric test function of ``arity`` variables.

    Attributes
    ----------
    hat : callable
        Maps an array of shape ``(..., arity)`` to ``hat_f`` values.
    support_radius : float
        ``hat_f`` vanishes (or is below ``tail_epsilon``) outside
        ``[-support_radius, support_radius]^arity``.
    direct : callable, optional
        ``f`` itself on scaled differences ``y = N x``.
    direct_radius : float, optional
        ``f`` is zero (or below ``tail_epsilon``) outside the box of this
        radius; ``None`` means no usable spatial cutoff.
    periodic : callable, optional
        ``(x, N) -> sum_m f(N (x + 2 pi m))``, the exact periodisation of
        ``f(N .)``.  When present it replaces ``direct`` in direct evaluation.
    hat_kinks : tuple
        Per-coordinate values where ``hat_f`` fails to be smooth (quadrature
        breakpoints).
    """

    __test__ = False  # not a pytest class

    name: str
    arity: int
    params: dict
    hat: Callable
    support_radius: float
    tail_epsilon: float = 0.0
    direct: Optional[Callable] = None
    direct_radius: Optional[float] = None
    periodic: Optional[Callable] = None
    hat_kinks: tuple = ()
    is_zero: bool = False
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.arity < 1:
            raise ValueError("arity must be at least 1")
        if self.support_radius <= 0:
            raise ValueError("support_radius must be positive")

    @property
    def spec(self) -> str:
        if not self.params:
            return self.name
        return self.name + ":" + ",".join(f"{k}={v!r}" for k, v in sorted(self.params.items()))

    def fourier_cutoff(self, N: int) -> int:
        """Largest ``|k|`` with ``hat_f(k/N)`` inside the support box."""
        return int(math.floor(self.support_radius * N + 1e-9))

    def kernel(self, x, N: int):
        """``f(N x)`` on circular differences, periodised when a closed form exists."""
        x = np.asarray(x, dtype=float)
        if self.periodic is not None:
            return self.periodic(x, N)
        if self.direct is None:
            raise NotImplementedError(f"{self.name} has no direct evaluator")
        return self.direct(N * x)


def _box(y, radius):
    return np.all(np.abs(y) <= radius, axis=-1)


def gaussian(sigma: float = 1.0, arity: int = 1, eps: float = DEFAULT_TAIL_EPSILON) -> TestFunction:
    sigma = float(sigma)
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    z = math.sqrt(2.0 * math.log(1.0 / eps))
    n = arity

    def hat(xi):
        xi = np.asarray(xi, dtype=float)
        return sigma**n * np.exp(-0.5 * sigma**2 * np.sum(xi * xi, axis=-1))

    radius = sigma * z

    def direct(y):
        y = np.asarray(y, dtype=float)
        val = np.exp(-0.5 * np.sum(y * y, axis=-1) / sigma**2)
        return np.where(_box(y, radius), val, 0.0)

    params = {"sigma": sigma}
    if eps != DEFAULT_TAIL_EPSILON:
        params["eps"] = eps
    return TestFunction("gaussian", n, params, hat, support_radius=z / sigma, tail_epsilon=eps,
                        direct=direct, direct_radius=radius)


def _fejer_like(x, M):
    """``sum_{|k| < M} (1 - |k|/M) e^{ikx}`` in closed form, any real ``M > 0``."""
    K = int(math.ceil(M - 1e-9)) - 1
    x = np.asarray(x, dtype=float)
    s = np.sin(0.5 * x)
    at_zero = s == 0.0
    s_safe = np.where(at_zero, 1.0, s)
    dirichlet = np.where(at_zero, 2 * K + 1, np.sin((K + 0.5) * x) / s_safe)
    fejer = np.where(at_zero, K + 1, np.sin(0.5 * (K + 1) * x) ** 2 / ((K + 1) * s_safe**2))
    return dirichlet - (K + 1) / M * (dirichlet - fejer)


def triangle(a: float = 1.0, arity: int = 1) -> TestFunction:
    a = float(a)
    if a <= 0:
        raise ValueError("a must be positive")
    n = arity
    c = 1.0 / math.sqrt(2 * math.pi)

    def hat(xi):
        xi = np.asarray(xi, dtype=float)
        return np.prod(np.clip(1.0 - np.abs(xi) / a, 0.0, None), axis=-1)

    def direct(y):
        # inverse transform of the 1-d triangle: a * sinc^2(a y / 2)
        y = np.asarray(y, dtype=float)
        return np.prod(c * a * np.sinc(a * y / (2 * np.pi)) ** 2, axis=-1)

    def periodic(x, N):
        return np.prod(c / N * _fejer_like(x, a * N), axis=-1)

    return TestFunction("triangle", n, {"a": a}, hat, support_radius=a, tail_epsilon=0.0,
                        direct=direct, direct_radius=None, periodic=periodic,
                        hat_kinks=(-a, 0.0, a))


def symmetric_gaussian(sigma: float = 1.0, arity: int = 1,
                       eps: float = DEFAULT_TAIL_EPSILON) -> TestFunction:
    sigma = float(sigma)
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    n = arity
    z = math.sqrt(2.0 * math.log(1.0 / eps))

    def hat(xi):
        xi = np.asarray(xi, dtype=float)
        q = np.sum(xi * xi, axis=-1) + np.sum(xi, axis=-1) ** 2
        return np.exp(-0.5 * sigma**2 * q)

    # f(y) = det(A)^{-1/2} exp(-y.A^{-1}.y / 2) with A = sigma^2 (I + 11^T)
    norm = 1.0 / (sigma**n * math.sqrt(n + 1))
    radius = sigma * z * math.sqrt(n + 1)

    def direct(y):
        y = np.asarray(y, dtype=float)
        q = (np.sum(y * y, axis=-1) - np.sum(y, axis=-1) ** 2 / (n + 1)) / sigma**2
        return np.where(_box(y, radius), norm * np.exp(-0.5 * q), 0.0)

    params = {"sigma": sigma}
    if eps != DEFAULT_TAIL_EPSILON:
        params["eps"] = eps
    return TestFunction("symgauss", n, params, hat, support_radius=z / sigma, tail_epsilon=eps,
                        direct=direct, direct_radius=radius)


def zero(arity: int = 1) -> TestFunction:
    def hat(xi):
        return np.zeros(np.shape(xi)[:-1])

    def direct(y):
        return np.zeros(np.shape(y)[:-1])

    return TestFunction("zero", arity, {}, hat, support_radius=1.0, direct=direct,
                        direct_radius=0.0, is_zero=True)


FAMILIES = {
    "gaussian": gaussian,
    "triangle": triangle,
    "symgauss": symmetric_gaussian,
    "zero": zero,
}


def parse_function_spec(spec: str, arity: int = 1) -> TestFunction:
    """Build a test function from ``"family:key=value,..."``, e.g. ``"triangle:a=0.5"``."""
    if not isinstance(spec, str) or not spec.strip():
        raise ConfigError("empty test-function spec")
    name, _, rest = spec.strip().partition(":")
    name = name.strip().lower()
    if name not in FAMILIES:
        raise ConfigError(f"unknown test-function family {name!r}; choose from {sorted(FAMILIES)}")
    kwargs = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, value = item.partition("=")
        if not eq:
            raise ConfigError(f"malformed parameter {item!r} in {spec!r} (expected key=value)")
        try:
            kwargs[key.strip()] = float(value)
        except ValueError:
            raise ConfigError(f"parameter {key.strip()!r} in {spec!r} is not a number") from None
    try:
        return FAMILIES[name](arity=arity, **kwargs)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {name!r}: {exc}") from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
