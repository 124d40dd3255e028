"""Cells of R^N, their enumeration and the direction vectors v_{I,J}.

A cell is indexed by a weak ordering of {0..N-1}; the number of cells of
R^N is the ordered Bell (Fubini) number 1, 3, 13, 75, 541, ...
Equality of coordinates is exact here; simulation code that needs a
tolerance goes through cluster_ranks.
"""

from __future__ import annotations

import math
from collections.abc import Iterator
from functools import lru_cache
from itertools import combinations

import numpy as np

from stickyflows.models.domain import Cell, DirectionVector

MAX_ENUMERATION_DIM = 8


@lru_cache(maxsize=None)
def ordered_bell(n: int) -> int:
    """Fubini number a(n) = sum_{k=1}^{n} C(n, k) a(n - k), a(0) = 1."""
    if n == 0:
        return 1
    return sum(math.comb(n, k) * ordered_bell(n - k) for k in range(1, n + 1))


def _ordered_partitions(items: tuple[int, ...]) -> Iterator[list[tuple[int, ...]]]:
    if not items:
        yield []
        return
    for size in range(1, len(items) + 1):
        for first in combinations(items, size):
            rest = tuple(i for i in items if i not in first)
            for tail in _ordered_partitions(rest):
                yield [first, *tail]


def enumerate_cells(n_points: int) -> list[Cell]:
    """All cells of R^N, each exactly once.

    Raises:
        ValueError: If N is outside 1..MAX_ENUMERATION_DIM.
    """
    if not 1 <= n_points <= MAX_ENUMERATION_DIM:
        raise ValueError(f"N must be in 1..{MAX_ENUMERATION_DIM}, got {n_points}")
    cells = []
    for blocks in _ordered_partitions(tuple(range(n_points))):
        ranks = [0] * n_points
        for r, block in enumerate(blocks):
            for i in block:
                ranks[i] = r
        cells.append(Cell(ranks=tuple(ranks)))
    return cells


def cell_of(x) -> Cell:
    """The unique cell containing x (ties by exact equality)."""
    _, inverse = np.unique(np.asarray(x, dtype=float), return_inverse=True)
    return Cell(ranks=tuple(int(r) for r in np.ravel(inverse)))


def cluster_ranks(states: np.ndarray, gap: float) -> np.ndarray:
    """Rank arrays of the cells after single-linkage clustering.

    Coordinates closer than gap (chained) are put in the same block.
    Works on any leading shape; the last axis holds the N coordinates.
    """
    states = np.asarray(states, dtype=float)
    order = np.argsort(states, axis=-1, kind="stable")
    ordered = np.take_along_axis(states, order, axis=-1)
    breaks = np.diff(ordered, axis=-1) > gap
    block = np.concatenate(
        [np.zeros(states.shape[:-1] + (1,), dtype=np.int64), np.cumsum(breaks, axis=-1)],
        axis=-1,
    )
    ranks = np.empty_like(block)
    np.put_along_axis(ranks, order, block, axis=-1)
    return ranks


def vectors_at_cell(cell: Cell) -> list[DirectionVector]:
    """V(x) for any x in the cell: ordered bipartitions of each block."""
    out = []
    for block in cell.blocks:
        members = tuple(sorted(block))
        for size in range(1, len(members)):
            for upper in combinations(members, size):
                upper_set = frozenset(upper)
                out.append(
                    DirectionVector(
                        upper=upper_set,
                        lower=frozenset(block - upper_set),
                        dimension=cell.dimension,
                    )
                )
    return out


def vectors_at(x) -> list[DirectionVector]:
    """The direction vectors v_{I,J} active at x."""
    return vectors_at_cell(cell_of(x))


def destination_cell(cell: Cell, v: DirectionVector) -> Cell:
    """Cell entered by x + eps v for small eps > 0, x in cell.

    The block containing I and J splits into J (lower) followed by I.
    """
    r = cell.ranks[next(iter(v.upper))]
    ranks = []
    for i, rank in enumerate(cell.ranks):
        if rank > r or i in v.upper:
            ranks.append(rank + 1)
        else:
            ranks.append(rank)
    return Cell(ranks=tuple(ranks))


def faces(cell: Cell) -> list[Cell]:
    """Cells in the closure of cell obtained by merging adjacent blocks."""
    out = []
    for r in range(cell.block_count - 1):
        out.append(Cell(ranks=tuple(rank - 1 if rank > r else rank for rank in cell.ranks)))
    return out
