"""Martingale drift test over many replica blocks of the prelimit motion.

Paths are long at realistic n, so each block is simulated, tested and
discarded; only the per-replica increments are kept and pooled.
"""

from __future__ import annotations

import dataclasses
import functools
import logging

from stickyflows.cells.functions import PiecewiseLinearFn
from stickyflows.cells.operator import DriftTestResult, combine_drift_results, drift_test
from stickyflows.core.identity import block_sizes, substream
from stickyflows.models.domain import ScaledModel, SimConfig, ThetaFamily
from stickyflows.npoint.simulate import simulate_block, validate_config
from stickyflows.worker.pool import map_blocks

logger = logging.getLogger(__name__)

DEFAULT_BLOCK_SIZE = 32
PEAK_WIDTHS = 100.0


def default_diagonal_tolerance(scaled_model: ScaledModel) -> float:
    """A hundred widths b / (a n^2) of the speed-density peak."""
    return PEAK_WIDTHS * scaled_model.b / (scaled_model.a * scaled_model.n**2)


def _drift_block(
    config: SimConfig,
    f: PiecewiseLinearFn,
    theta: ThetaFamily,
    tolerance: float,
    task: tuple[int, int],
) -> DriftTestResult:
    index, size = task
    path = simulate_block(config, size, substream(config.seed, "marttest", index))
    result = drift_test(path, f, theta, tolerance)
    return dataclasses.replace(result, max_jitter=float(path.metadata.get("max_jitter", 0.0)))


def drift_test_ensemble(
    config: SimConfig,
    f: PiecewiseLinearFn,
    theta: ThetaFamily,
    replicas: int,
    diagonal_tolerance: float | None = None,
    workers: int = 1,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> DriftTestResult:
    """drift_test over `replicas` independent replicas, block by block.

    Block i uses substream(config.seed, "marttest", i); the pooled
    result does not depend on the worker count.
    """
    validate_config(config)
    tolerance = (
        diagonal_tolerance
        if diagonal_tolerance is not None
        else default_diagonal_tolerance(config.scaled)
    )
    tasks = list(enumerate(block_sizes(replicas, block_size)))
    logger.info("drift test of %s on %d replicas (tolerance %.3e)", f.name, replicas, tolerance)
    fn = functools.partial(_drift_block, config, f, theta, tolerance)
    return combine_drift_results(map_blocks(fn, tasks, workers))
