"""Exact parametrisation of the constrained subspaces ``L_pi``.

``L_pi`` is cut out of ``R^{m(n+1)}`` by one zero-sum equation per window and
one per block of ``pi``.  The constraint matrix is the incidence matrix of a
bipartite graph (every coordinate lies in exactly one window and one block),
hence totally unimodular: integer free coordinates reconstruct to integer
points, so the same parametrisation enumerates ``L_pi`` intersected with the
integer lattice and defines the Lebesgue measure used in the limits.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .partitions import SetPartition, WindowStructure, constraint_matrix


@dataclass(frozen=True)
class SubspaceParametrization:
    ambient_dim: int
    constraints: tuple      # rows of the 0/1 constraint matrix
    rank: int
    free_indices: tuple     # coordinates that parametrise the subspace
    reconstruction: tuple   # ambient_dim x len(free_indices), Fraction entries

    @property
    def dim(self) -> int:
        return len(self.free_indices)

    @property
    def is_integral(self) -> bool:
        return all(x.denominator == 1 for row in self.reconstruction for x in row)

    def matrix(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.reconstruction],
                        dtype=float).reshape(self.ambient_dim, self.dim)

    def int_matrix(self) -> np.ndarray:
        if not self.is_integral:
            raise ValueError("reconstruction is not integral")
        return np.array([[int(x) for x in row] for row in self.reconstruction],
                        dtype=np.int64).reshape(self.ambient_dim, self.dim)

    def reconstruct(self, free_values):
        """Full vector from free coordinates (exact when given ints/Fractions)."""
        return [sum((r * v for r, v in zip(row, free_values)), Fraction(0))
                for row in self.reconstruction]

    def residuals(self, t):
        return [sum(c * x for c, x in zip(row, t)) for row in self.constraints]


def _pivot_order(w: WindowStructure):
    # closure coordinates first so that the free coordinates are, as far as
    # possible, the leading arguments of each window
    closures = [win[-1] for win in w.windows]
    rest = sorted((i for i in range(w.ground_size) if i not in closures), reverse=True)
    return closures + rest


def parametrize_subspace(pi: SetPartition, w: WindowStructure) -> SubspaceParametrization:
    rows = constraint_matrix(pi, w)
    d = w.ground_size
    a = [[Fraction(x) for x in r] for r in rows]
    pivots = {}
    r = 0
    for col in _pivot_order(w):
        piv = next((i for i in range(r, len(a)) if a[i][col] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        pv = a[r][col]
        a[r] = [x / pv for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][col] != 0:
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots[col] = r
        r += 1
        if r == len(a):
            break
    free = tuple(i for i in range(d) if i not in pivots)
    recon = []
    for i in range(d):
        if i in pivots:
            row = a[pivots[i]]
            recon.append(tuple(-row[j] for j in free))
        else:
            recon.append(tuple(Fraction(1 if j == i else 0) for j in free))
    return SubspaceParametrization(d, tuple(tuple(x) for x in rows), r, free, tuple(recon))
