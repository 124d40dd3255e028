"""The operator A^theta_N and the martingale-problem drift test.

    A f(x) = sum_{v in V(x)} theta(|I|:|J|) grad_v f(x)

The one-sided gradient grad_v f(x) is read off the affine piece of the
cell entered by x + eps v, which is known combinatorially, so no finite
differences are involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from stickyflows.aggregation.estimates import mean_stderr
from stickyflows.cells.combinatorics import (
    cell_of,
    cluster_ranks,
    destination_cell,
    vectors_at_cell,
)
from stickyflows.cells.functions import PiecewiseLinearFn
from stickyflows.models.domain import Cell, Path, ThetaFamily


def one_sided_gradient(f: PiecewiseLinearFn, cell: Cell, v) -> float:
    grad, _ = f.piece(destination_cell(cell, v))
    return float(grad @ v.vector)


def apply_operator_at_cell(f: PiecewiseLinearFn, cell: Cell, theta: ThetaFamily) -> float:
    """A f on a cell (A f is constant on cells).

    Raises:
        MissingThetaEntry: If theta lacks a block size present in the cell.
    """
    terms = [
        theta.get(v.k, v.l) * one_sided_gradient(f, cell, v) for v in vectors_at_cell(cell)
    ]
    return math.fsum(terms)


def apply_operator(f: PiecewiseLinearFn, x, theta: ThetaFamily) -> float:
    """A f(x) with exact cell membership."""
    return apply_operator_at_cell(f, cell_of(x), theta)


@dataclass(frozen=True)
class DriftTestResult:
    """Per-replica martingale increments and their z-score.

    increments[r] = f(X_t) - f(X_s) - int_s^t A f(X_u) du for replica r.
    """

    increments: np.ndarray
    mean: float
    stderr: float
    zscore: float
    compensator_mean: float
    max_jitter: float = 0.0


def _summarize(increments: np.ndarray, compensators: np.ndarray) -> DriftTestResult:
    est = mean_stderr(increments)
    z = est.value / est.stderr if est.stderr > 0 else 0.0
    return DriftTestResult(
        increments=increments,
        mean=est.value,
        stderr=est.stderr,
        zscore=float(z),
        compensator_mean=float(np.mean(compensators)),
    )


def drift_test(
    path: Path,
    f: PiecewiseLinearFn,
    theta: ThetaFamily,
    diagonal_tolerance: float,
    start_step: int = 0,
    end_step: int | None = None,
) -> DriftTestResult:
    """Estimate the drift of f(X) minus its A^theta compensator.

    Coordinates within diagonal_tolerance (single linkage) count as
    coincident when evaluating A f along the path. A left-point Riemann
    sum over the path grid gives the compensator.
    """
    end_step = path.steps if end_step is None else end_step
    states = path.states
    window = states[:, start_step:end_step]
    ranks = cluster_ranks(window, diagonal_tolerance)

    n_points = path.dimension
    weights = n_points ** np.arange(n_points)
    codes = ranks @ weights
    unique_codes, inverse = np.unique(codes, return_inverse=True)
    rates = np.empty(unique_codes.shape[0])
    for idx, code in enumerate(unique_codes):
        digits = tuple(int(code // n_points**i % n_points) for i in range(n_points))
        cell = Cell(ranks=_normalize(digits))
        rates[idx] = apply_operator_at_cell(f, cell, theta)
    rate_path = rates[inverse.reshape(codes.shape)]
    compensators = rate_path.sum(axis=1) * path.dt

    increments = (
        f.evaluate_many(states[:, end_step]) - f.evaluate_many(states[:, start_step])
    ) - compensators
    return _summarize(increments, compensators)


def combine_drift_results(results: list[DriftTestResult]) -> DriftTestResult:
    """Pool drift results computed on separate replica blocks."""
    increments = np.concatenate([r.increments for r in results])
    compensator_total = math.fsum(r.compensator_mean * r.increments.size for r in results)
    pooled = _summarize(increments, np.zeros(1))
    return DriftTestResult(
        increments=pooled.increments,
        mean=pooled.mean,
        stderr=pooled.stderr,
        zscore=pooled.zscore,
        compensator_mean=compensator_total / increments.size,
        max_jitter=max(r.max_jitter for r in results),
    )


def _normalize(ranks: tuple[int, ...]) -> tuple[int, ...]:
    """Relabel ranks to 0..m-1 preserving order."""
    mapping = {r: i for i, r in enumerate(sorted(set(ranks)))}
    return tuple(mapping[r] for r in ranks)
