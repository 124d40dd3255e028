"""Continuous functions on R^N that are affine on every cell (L_N).

A PiecewiseLinearFn stores gradient and offset for every cell.
Construction checks continuity across every face shared by two
adjacent cells by sampling points of the face.
"""

from __future__ import annotations

from collections.abc import Callable, Mapping
from dataclasses import dataclass, field

import numpy as np

from stickyflows.cells.combinatorics import cell_of, enumerate_cells, faces
from stickyflows.errors import InvariantViolation
from stickyflows.models.domain import Cell

CONTINUITY_TOL = 1e-12
FACE_SAMPLES = 4

Piece = tuple[np.ndarray, float]


@dataclass(frozen=True)
class PiecewiseLinearFn:
    """f in L_N given by per-cell affine data."""

    dimension: int
    pieces: Mapping[Cell, Piece] = field(compare=False)
    shift_invariant: bool = False
    name: str = "f"

    def __post_init__(self):
        _check_continuity(self)
        if self.shift_invariant:
            _check_shift_invariant(self)

    def piece(self, cell: Cell) -> Piece:
        return self.pieces[cell]

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        grad, offset = self.pieces[cell_of(x)]
        return float(grad @ x + offset)

    def evaluate_many(self, states: np.ndarray) -> np.ndarray:
        """f at each row of states (shape (..., N))."""
        states = np.asarray(states, dtype=float)
        flat = states.reshape(-1, self.dimension)
        out = np.array([self(row) for row in flat])
        return out.reshape(states.shape[:-1])


def _face_points(face: Cell, rng: np.random.Generator) -> np.ndarray:
    """Random points of a cell: strictly increasing block values."""
    levels = np.cumsum(rng.uniform(0.5, 1.5, size=(FACE_SAMPLES, face.block_count)), axis=1)
    levels += rng.normal(size=(FACE_SAMPLES, 1))
    return levels[:, list(face.ranks)]


def _check_continuity(f: PiecewiseLinearFn) -> None:
    rng = np.random.default_rng(0)
    for cell, (grad, offset) in f.pieces.items():
        for face in faces(cell):
            face_grad, face_offset = f.pieces[face]
            points = _face_points(face, rng)
            gap = np.abs(points @ grad + offset - (points @ face_grad + face_offset))
            if np.max(gap) > CONTINUITY_TOL * max(1.0, float(np.max(np.abs(points)))):
                raise InvariantViolation(
                    f"{f.name} is discontinuous between {cell.describe()} and {face.describe()}",
                    entry=(cell, face),
                )


def _check_shift_invariant(f: PiecewiseLinearFn) -> None:
    for cell, (grad, offset) in f.pieces.items():
        if abs(float(np.sum(grad))) > CONTINUITY_TOL or (
            cell.block_count == 1 and abs(offset) > CONTINUITY_TOL
        ):
            raise InvariantViolation(
                f"{f.name} is not shift invariant on {cell.describe()}", entry=cell
            )


def from_cell_rule(
    n_points: int,
    rule: Callable[[Cell], Piece],
    shift_invariant: bool = False,
    name: str = "f",
) -> PiecewiseLinearFn:
    """Build f by asking rule for the affine piece of every cell."""
    pieces = {}
    for cell in enumerate_cells(n_points):
        grad, offset = rule(cell)
        pieces[cell] = (np.asarray(grad, dtype=float), float(offset))
    return PiecewiseLinearFn(
        dimension=n_points, pieces=pieces, shift_invariant=shift_invariant, name=name
    )


def from_table(
    n_points: int,
    table: Mapping[tuple[int, ...], tuple[list[float], float]],
    shift_invariant: bool = False,
) -> PiecewiseLinearFn:
    """User-supplied affine data keyed by cell rank tuples."""
    expected = {cell.ranks for cell in enumerate_cells(n_points)}
    missing = expected - set(table)
    if missing:
        raise InvariantViolation(f"table misses {len(missing)} cells", entry=sorted(missing)[0])

    def rule(cell: Cell) -> Piece:
        grad, offset = table[cell.ranks]
        return np.asarray(grad, dtype=float), float(offset)

    return from_cell_rule(n_points, rule, shift_invariant=shift_invariant, name="table")


def _unit(n_points: int, i: int) -> np.ndarray:
    e = np.zeros(n_points)
    e[i] = 1.0
    return e


def linear(coefficients) -> PiecewiseLinearFn:
    """Globally linear f(x) = c . x."""
    c = np.asarray(coefficients, dtype=float)
    return from_cell_rule(
        c.size,
        lambda cell: (c, 0.0),
        shift_invariant=abs(float(np.sum(c))) <= CONTINUITY_TOL,
        name="linear",
    )


def abs_difference(i: int, j: int, n_points: int) -> PiecewiseLinearFn:
    """f(x) = |x_i - x_j|."""

    def rule(cell: Cell) -> Piece:
        sign = np.sign(cell.ranks[i] - cell.ranks[j])
        return sign * (_unit(n_points, i) - _unit(n_points, j)), 0.0

    return from_cell_rule(n_points, rule, shift_invariant=True, name=f"|x{i + 1}-x{j + 1}|")


def hinge(upper, lower, n_points: int) -> PiecewiseLinearFn:
    """f(x) = (min_{i in upper} x_i - max_{j in lower} x_j)^+ (convex, in L_N^0)."""
    upper, lower = sorted(upper), sorted(lower)
    if not upper or not lower or set(upper) & set(lower):
        raise ValueError("hinge needs disjoint nonempty index sets")

    def rule(cell: Cell) -> Piece:
        i = min(upper, key=lambda idx: cell.ranks[idx])
        j = max(lower, key=lambda idx: cell.ranks[idx])
        if cell.ranks[i] > cell.ranks[j]:
            return _unit(n_points, i) - _unit(n_points, j), 0.0
        return np.zeros(n_points), 0.0

    return from_cell_rule(n_points, rule, shift_invariant=True, name="hinge")
