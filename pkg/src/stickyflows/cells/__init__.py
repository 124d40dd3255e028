"""Cells, piecewise-linear test functions and the operator A^theta_N."""

from stickyflows.cells.combinatorics import (
    cell_of,
    cluster_ranks,
    enumerate_cells,
    ordered_bell,
    vectors_at,
)
from stickyflows.cells.functions import (
    PiecewiseLinearFn,
    abs_difference,
    from_table,
    hinge,
    linear,
)
from stickyflows.cells.martingale import drift_test_ensemble
from stickyflows.cells.operator import apply_operator, combine_drift_results, drift_test

__all__ = [
    "PiecewiseLinearFn",
    "abs_difference",
    "apply_operator",
    "cell_of",
    "cluster_ranks",
    "combine_drift_results",
    "drift_test",
    "drift_test_ensemble",
    "enumerate_cells",
    "from_table",
    "hinge",
    "linear",
    "ordered_bell",
    "vectors_at",
]
