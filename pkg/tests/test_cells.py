"""Tests for cells, piecewise-linear functions and the operator A^theta."""

import numpy as np
import pytest

from stickyflows.cells import (
    abs_difference,
    apply_operator,
    cell_of,
    cluster_ranks,
    drift_test,
    enumerate_cells,
    from_table,
    hinge,
    linear,
    ordered_bell,
    vectors_at,
)
from stickyflows.cells.combinatorics import destination_cell
from stickyflows.cells.martingale import drift_test_ensemble
from stickyflows.covariance import gaussian, scaled
from stickyflows.errors import InvariantViolation, MissingThetaEntry
from stickyflows.models.domain import Cell, Path, SimConfig
from stickyflows.theta import build_family


@pytest.fixture(scope="module")
def family():
    return build_family(5, 1.0, 1.0)


class TestEnumeration:
    """Cells of R^N are counted by the ordered Bell numbers."""

    @pytest.mark.parametrize("n_points,count", [(1, 1), (2, 3), (3, 13), (4, 75), (5, 541)])
    def test_counts(self, n_points, count):
        cells = enumerate_cells(n_points)
        assert len(cells) == count == ordered_bell(n_points)
        assert len(set(cells)) == count

    def test_dimension_bounds(self):
        with pytest.raises(ValueError):
            enumerate_cells(9)

    def test_cell_of_and_describe(self):
        cell = cell_of([1.0, 1.0, 0.0])
        assert cell.ranks == (1, 1, 0)
        assert cell.describe() == "x3<x1=x2"

    def test_cluster_ranks_chains_close_points(self):
        ranks = cluster_ranks(np.array([0.0, 0.05, 1.0, 0.09]), 0.1)
        assert ranks.tolist() == [0, 0, 1, 0]


class TestDirectionVectors:
    """V(x) holds one vector per ordered bipartition of each block."""

    def test_distinct_points_have_none(self):
        assert vectors_at([0.0, 1.0, 2.0]) == []

    def test_triple_point(self):
        assert len(vectors_at([0.0, 0.0, 0.0])) == 6

    def test_two_blocks(self):
        assert len(vectors_at([0.0, 0.0, 1.0, 1.0])) == 4

    def test_destination_splits_block(self):
        vectors = vectors_at([0.0, 0.0])
        v = next(v for v in vectors if v.upper == frozenset({0}))
        assert destination_cell(Cell(ranks=(0, 0)), v).ranks == (1, 0)


class TestFunctions:
    """Tests for members of L_N."""

    def test_abs_difference_values(self):
        f = abs_difference(0, 2, 3)
        assert f([0.5, 7.0, -1.0]) == pytest.approx(1.5)
        assert f.shift_invariant

    def test_hinge_values(self):
        f = hinge([0], [1, 2], 3)
        assert f([3.0, 1.0, 2.0]) == pytest.approx(1.0)
        assert f([1.0, 1.0, 2.0]) == 0.0

    def test_hinge_needs_disjoint_sets(self):
        with pytest.raises(ValueError):
            hinge([0], [0, 1], 3)

    def test_discontinuous_table_rejected(self):
        table = {cell.ranks: ([0.0, 0.0], 0.0) for cell in enumerate_cells(2)}
        table[(0, 1)] = ([1.0, 0.0], 0.0)
        with pytest.raises(InvariantViolation):
            from_table(2, table)


class TestOperator:
    """Tests for A^theta_N."""

    def test_abs_difference_on_diagonal(self, family):
        f = abs_difference(0, 1, 2)
        assert apply_operator(f, [0.3, 0.3], family) == pytest.approx(4 * family.get(1, 1))

    def test_zero_off_diagonal(self, family):
        assert apply_operator(abs_difference(0, 1, 2), [0.0, 1.0], family) == 0.0

    def test_hinge_on_triple_point(self, family):
        f = hinge([0], [1, 2], 3)
        assert apply_operator(f, [0.0, 0.0, 0.0], family) == pytest.approx(2 * family.get(1, 2))

    def test_linear_shift_invariant_is_annihilated(self, family):
        f = linear([1.0, 2.0, -3.0])
        assert apply_operator(f, [0.0, 0.0, 0.0], family) == pytest.approx(0.0, abs=1e-15)

    def test_missing_theta_entry(self):
        small = build_family(2, 1.0, 1.0)
        with pytest.raises(MissingThetaEntry):
            apply_operator(hinge([0], [1, 2], 3), [0.0, 0.0, 0.0], small)


class TestDriftTest:
    """Compensator bookkeeping on synthetic paths."""

    @staticmethod
    def constant_path(state, steps=10, dt=0.1, replicas=3):
        state = np.asarray(state, dtype=float)
        return Path(
            times=np.arange(steps + 1) * dt,
            origin=state,
            displacement=np.zeros((replicas, steps + 1, state.size)),
        )

    def test_separated_path_has_no_drift(self, family):
        result = drift_test(self.constant_path([0.0, 1.0]), abs_difference(0, 1, 2), family, 1e-3)
        assert result.mean == 0.0
        assert result.compensator_mean == 0.0

    def test_diagonal_path_accumulates_compensator(self, family):
        path = self.constant_path([0.0, 0.0])
        result = drift_test(path, abs_difference(0, 1, 2), family, 1e-3)
        expected = 4 * family.get(1, 1) * 1.0
        assert result.compensator_mean == pytest.approx(expected, rel=1e-12)
        assert result.mean == pytest.approx(-expected, rel=1e-12)


class TestDriftEnsemble:
    """The drift test on simulated prelimit paths."""

    @staticmethod
    def config(x0, n=50, horizon=0.05, seed=0):
        return SimConfig(
            n_points=len(x0),
            scaled=scaled(gaussian(1.0), n, 1.0),
            x0=tuple(x0),
            dt=0.05 / n**2,
            horizon=horizon,
            seed=seed,
        )

    def test_shift_invariant_linear_is_a_martingale(self, family):
        f = linear([1.0, 2.0, -3.0])
        result = drift_test_ensemble(self.config([0.0, 0.0, 0.0]), f, family, 200)
        assert result.compensator_mean == pytest.approx(0.0, abs=1e-12)
        assert abs(result.zscore) <= 4.0
        assert result.increments.size == 200

    def test_separated_pair_has_no_compensator(self, family):
        f = abs_difference(0, 1, 2)
        result = drift_test_ensemble(self.config([0.0, 3.0], seed=1), f, family, 200)
        assert result.compensator_mean == 0.0
        assert abs(result.zscore) <= 4.0

    def test_coincident_pair_is_compensated(self, family):
        f = abs_difference(0, 1, 2)
        result = drift_test_ensemble(self.config([0.0, 0.0], seed=2), f, family, 400)
        assert result.compensator_mean > 0.0
        assert abs(result.mean) < 0.5 * result.compensator_mean
        assert result.max_jitter == 0.0
