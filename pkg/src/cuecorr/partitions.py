"""Set partitions and the moment/cumulant bookkeeping built on them.

Indices are 0-based throughout: a partition of ``M`` elements partitions
``{0, ..., M-1}``, and window ``i`` of a :class:`WindowStructure` with width
``l`` is ``{i*l, ..., (i+1)*l - 1}``.

Partitions are produced in restricted-growth-string (RGS) order, so fixture
lists are stable between runs.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

from .errors import CapacityError

#: Largest ground set that the enumerators accept by default (Bell(12) = 4213597).
MAX_GROUND_SIZE = 12


@dataclass(frozen=True)
class SetPartition:
    """A partition of ``{0, ..., ground_size-1}`` into non-empty blocks.

    Blocks are stored as sorted tuples, ordered by their smallest element.
    """

    ground_size: int
    blocks: tuple

    def __post_init__(self):
        if self.ground_size < 1:
            raise ValueError("ground_size must be positive")
        blocks = tuple(sorted((tuple(sorted(b)) for b in self.blocks), key=lambda b: b[:1]))
        seen = [x for b in blocks for x in b]
        if any(len(b) == 0 for b in blocks):
            raise ValueError("blocks must be non-empty")
        if sorted(seen) != list(range(self.ground_size)):
            raise ValueError(f"blocks {blocks} do not partition range({self.ground_size})")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def from_rgs(cls, rgs: Sequence[int]) -> "SetPartition":
        nblocks = max(rgs) + 1
        blocks = [[] for _ in range(nblocks)]
        for i, b in enumerate(rgs):
            blocks[b].append(i)
        return cls(len(rgs), tuple(tuple(b) for b in blocks))

    def __len__(self):
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    @property
    def masks(self) -> tuple:
        return tuple(sum(1 << i for i in b) for b in self.blocks)

    def block_sizes(self) -> tuple:
        return tuple(len(b) for b in self.blocks)


@dataclass(frozen=True)
class WindowStructure:
    """``m`` consecutive windows of width ``l`` covering ``{0, ..., m*l-1}``."""

    m: int
    l: int

    def __post_init__(self):
        if self.m < 1 or self.l < 1:
            raise ValueError("m and l must be positive")

    @property
    def ground_size(self) -> int:
        return self.m * self.l

    @property
    def windows(self) -> tuple:
        return tuple(tuple(range(i * self.l, (i + 1) * self.l)) for i in range(self.m))

    @property
    def masks(self) -> tuple:
        return tuple(((1 << self.l) - 1) << (i * self.l) for i in range(self.m))

    def window_of(self, index: int) -> int:
        return index // self.l


@dataclass(frozen=True)
class EquivalenceClasses:
    """Classes of window labels, each a sorted tuple of window indices."""

    classes: tuple

    def sizes(self) -> tuple:
        return tuple(len(c) for c in self.classes)

    def __len__(self):
        return len(self.classes)


class PartitionClass(enum.Enum):
    OPTIMAL = "optimal"
    SUBOPTIMAL = "suboptimal"


def bell_number(n: int) -> int:
    """Bell number via the Bell triangle."""
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


def _check_capacity(M, max_size):
    limit = MAX_GROUND_SIZE if max_size is None else max_size
    if M < 1:
        raise CapacityError(f"ground size must be at least 1, got {M}")
    if M > limit:
        raise CapacityError(
            f"ground size {M} exceeds the enumeration cap {limit} (Bell({M}) = {bell_number(M)})"
        )


def _restricted_growth_strings(M: int) -> Iterator[list]:
    rgs = [0] * M
    # maxes[i] = max(rgs[:i+1])
    maxes = [0] * M

    def rec(i):
        if i == M:
            yield rgs
            return
        for v in range(maxes[i - 1] + 2):
            rgs[i] = v
            maxes[i] = max(maxes[i - 1], v)
            yield from rec(i + 1)

    yield from rec(1)


def enumerate_set_partitions(M: int, max_size: int | None = None) -> list:
    """All Bell(M) partitions of ``range(M)`` in RGS order."""
    _check_capacity(M, max_size)
    return [SetPartition.from_rgs(r) for r in _restricted_growth_strings(M)]


def iter_set_partitions(items: Sequence) -> Iterator[list]:
    """Partitions of an arbitrary sequence, as lists of lists of its items."""
    items = list(items)
    if not items:
        yield []
        return
    for rgs in _restricted_growth_strings(len(items)):
        blocks = [[] for _ in range(max(rgs) + 1)]
        for x, b in zip(items, rgs):
            blocks[b].append(x)
        yield blocks


def windows_covered(pi: SetPartition, w: WindowStructure) -> tuple:
    """Indices of the windows that are unions of blocks of ``pi``."""
    inside = [0] * w.m
    for bm in pi.masks:
        for i, wm in enumerate(w.masks):
            if bm & ~wm == 0:
                inside[i] |= bm
                break
    return tuple(i for i, wm in enumerate(w.masks) if inside[i] == wm)


def is_connecting(pi: SetPartition, w: WindowStructure) -> bool:
    """True when no window is a union of blocks of ``pi``."""
    if pi.ground_size != w.ground_size:
        raise ValueError("partition and window structure have different ground sizes")
    return not windows_covered(pi, w)


def enumerate_connecting_partitions(m: int, l: int, max_size: int | None = None) -> list:
    if m < 2:
        raise ValueError("need at least two windows")
    w = WindowStructure(m, l)
    return [p for p in enumerate_set_partitions(m * l, max_size) if is_connecting(p, w)]


def expand_moment(indices: Sequence, cumulant: Callable[[tuple], float]):
    """Moment of the variables labelled by ``indices`` from their joint cumulants.

    ``cumulant`` receives a tuple of labels (one block) and returns the joint
    cumulant of those variables.
    """
    total = 0
    for blocks in iter_set_partitions(indices):
        term = 1
        for b in blocks:
            term = term * cumulant(tuple(b))
            if term == 0:
                break
        total = total + term
    return total


def moments_from_cumulants(N: int, k: Sequence[int], kappa=None):
    """``E[prod_j T_{N,k_j}]`` as a sum over partitions of products of cumulants.

    ``kappa(N, ks)`` evaluates the joint cumulant of the trace powers ``ks``;
    defaults to :func:`cuecorr.cumulants.kappa_exact`.
    """
    if kappa is None:
        from .cumulants import kappa_exact as kappa
    k = tuple(int(x) for x in k)
    if not 1 <= len(k) <= MAX_GROUND_SIZE:
        raise CapacityError(f"tuple length {len(k)} outside 1..{MAX_GROUND_SIZE}")
    return expand_moment(range(len(k)), lambda b: kappa(N, tuple(k[i] for i in b)))


def centered_product_coefficient(pi: SetPartition, w: WindowStructure) -> int:
    """Coefficient of ``prod_B kappa(B)`` in ``E[prod_i (Y_i - E Y_i)]``, ``Y_i`` the window products.

    Inclusion-exclusion over the windows replaced by their means: a subset ``S``
    of windows contributes ``(-1)^|S|`` exactly when every window in ``S`` is a
    union of blocks of ``pi``.
    """
    covered = set(windows_covered(pi, w))
    coef = 0
    for r in range(w.m + 1):
        for S in itertools.combinations(range(w.m), r):
            if covered.issuperset(S):
                coef += (-1) ** r
    return coef


def centered_product_expansion(m: int, l: int, max_size: int | None = None) -> list:
    """Partitions carrying a nonzero coefficient in the centered-product expansion."""
    if m < 2:
        raise ValueError("need at least two windows")
    w = WindowStructure(m, l)
    out = []
    for p in enumerate_set_partitions(m * l, max_size):
        c = centered_product_coefficient(p, w)
        if c not in (0, 1):
            raise AssertionError(f"coefficient {c} for {p}")
        if c == 1:
            out.append(p)
    return out


def equivalence_classes(pi: SetPartition, w: WindowStructure) -> EquivalenceClasses:
    """Classes of the relation "some block meets both windows", transitively closed."""
    if pi.ground_size != w.ground_size:
        raise ValueError(
            f"partition of {pi.ground_size} elements does not match {w.m} windows of width {w.l}"
        )
    parent = list(range(w.m))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for b in pi.blocks:
        touched = sorted({w.window_of(i) for i in b})
        for other in touched[1:]:
            ra, rb = find(touched[0]), find(other)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    groups = {}
    for i in range(w.m):
        groups.setdefault(find(i), []).append(i)
    return EquivalenceClasses(tuple(tuple(g) for g in sorted(groups.values())))


def classify_partition(pi: SetPartition, w: WindowStructure) -> PartitionClass:
    classes = equivalence_classes(pi, w)
    sizes = classes.sizes()
    if min(sizes) < 2:
        raise ValueError(f"{pi.blocks} is not connecting: a window forms a class on its own")
    if all(s == 2 for s in sizes):
        return PartitionClass.OPTIMAL
    return PartitionClass.SUBOPTIMAL


def constraint_matrix(pi: SetPartition, w: WindowStructure) -> list:
    """0/1 rows: one zero-sum constraint per window, then one per block."""
    if pi.ground_size != w.ground_size:
        raise ValueError("partition and window structure have different ground sizes")
    d = w.ground_size
    rows = [[1 if i in win else 0 for i in range(d)] for win in w.windows]
    rows += [[1 if i in b else 0 for i in range(d)] for b in pi.blocks]
    return rows


def integer_rank(rows: Sequence[Sequence[int]]) -> int:
    """Rank of an integer matrix by fraction-free (Bareiss) elimination."""
    a = [list(map(int, r)) for r in rows]
    if not a:
        return 0
    nrows, ncols = len(a), len(a[0])
    rank, prev = 0, 1
    for col in range(ncols):
        piv = next((r for r in range(rank, nrows) if a[r][col] != 0), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        for r in range(rank + 1, nrows):
            for c in range(col + 1, ncols):
                num = a[r][c] * a[rank][col] - a[r][col] * a[rank][c]
                # Bareiss: exact division by the previous pivot
                a[r][c] = num // prev
            a[r][col] = 0
        prev = a[rank][col]
        rank += 1
        if rank == nrows:
            break
    return rank


def dim_L_pi(pi: SetPartition, w: WindowStructure) -> int:
    """Dimension of the solution space of the window and block zero-sum system."""
    return w.ground_size - integer_rank(constraint_matrix(pi, w))


def optimal_dimension(pi: SetPartition, w: WindowStructure) -> float:
    """The value ``m*n + m/2 - |pi|`` attained by optimal partitions (``n = l - 1``)."""
    return w.m * (w.l - 1) + w.m / 2 - len(pi)

