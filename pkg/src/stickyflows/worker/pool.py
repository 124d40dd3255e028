"""Replica-block worker pool.

Blocks are independent pure functions of (seed, tag, block index), so
results do not depend on the worker count. Pool.map keeps input order,
which keeps the downstream reduction order fixed too.
"""

from __future__ import annotations

import logging
import multiprocessing
from collections.abc import Callable, Sequence
from typing import TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def map_blocks(fn: Callable[[T], R], tasks: Sequence[T], workers: int = 1) -> list[R]:
    """Apply fn to every task, in order, on up to ``workers`` processes.

    fn must be picklable (a module-level function or a functools.partial
    of one) when workers > 1.
    """
    tasks = list(tasks)
    if workers <= 1 or len(tasks) <= 1:
        return [fn(task) for task in tasks]
    processes = min(workers, len(tasks))
    logger.debug("mapping %d blocks on %d processes", len(tasks), processes)
    with multiprocessing.get_context("spawn").Pool(processes=processes) as pool:
        return pool.map(fn, tasks, chunksize=1)
