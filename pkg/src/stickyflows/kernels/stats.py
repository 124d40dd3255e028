"""Concentration statistics of kernel densities."""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass

import numpy as np

from stickyflows.covariance.psi import gaussian, scaled
from stickyflows.kernels.filtering import DEFAULT_FEATURES, filter_kernel
from stickyflows.kernels.grid import default_domain_length, initial_point
from stickyflows.kernels.spde import spde_evolve
from stickyflows.models.domain import KernelField, ScaledModel
from stickyflows.worker.pool import map_blocks

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DensityStats:
    max_mass: float
    entropy: float
    support_fraction: float


def density_stats(field: KernelField, threshold: float | None = None) -> DensityStats:
    """Largest cell mass, Shannon entropy and share of cells above threshold.

    threshold defaults to 0.1 / M, a tenth of the uniform cell mass.
    """
    p = field.probabilities
    p = p / math.fsum(p)
    cut = 0.1 / field.cells if threshold is None else threshold
    positive = p[p > 0]
    entropy = -math.fsum(positive * np.log(positive))
    return DensityStats(
        max_mass=float(p.max()),
        entropy=max(entropy, 0.0),
        support_fraction=float(np.count_nonzero(p > cut)) / field.cells,
    )


@dataclass(frozen=True)
class ConcentrationSummary:
    a: float
    b: float
    median_max_mass: float
    median_entropy: float
    median_support_fraction: float
    samples: tuple[DensityStats, ...]


@dataclass(frozen=True)
class _KernelTask:
    mode: str
    t: float
    length: float
    cells: int
    features: int
    particles: int


def _seed_stats(task: _KernelTask, job: tuple[ScaledModel, int]) -> DensityStats:
    model, seed = job
    x0 = task.length / 2.0
    if task.mode == "spde":
        start = initial_point(task.cells, task.length, x0)
        kernel = spde_evolve(start, model, task.t, field_seed=seed, features=task.features)
    else:
        kernel = filter_kernel(
            model,
            x0,
            task.t,
            task.particles,
            features=task.features,
            seed=seed,
            field_seed=seed,
            domain_length=task.length,
            cells=task.cells,
        )
    return density_stats(kernel)


def concentration_comparison(
    param_sets,
    seeds,
    t: float = 1.0,
    n: int = 1,
    mode: str = "spde",
    cells: int = 512,
    features: int = DEFAULT_FEATURES,
    particles: int = 10_000,
    domain_length: float | None = None,
    workers: int = 1,
) -> list[ConcentrationSummary]:
    """Median density_stats of K_{0,t}(x0, .) over field seeds, per (a, b).

    Every parameter set is evaluated on the same field seeds and on one
    common grid, so cell masses are comparable across sets. The common
    domain is the largest default domain of the sets. Field seeds run in
    parallel on up to ``workers`` processes.
    """
    models = [(a, b, scaled(gaussian(a), n, b)) for a, b in param_sets]
    length = domain_length or max(default_domain_length(m) for _, _, m in models)
    seeds = list(seeds)
    task = _KernelTask(mode, t, length, cells, features, particles)
    jobs = [(model, seed) for _, _, model in models for seed in seeds]
    logger.info(
        "concentration over %d parameter sets and %d field seeds (L=%.3e)",
        len(models),
        len(seeds),
        length,
    )
    results = map_blocks(functools.partial(_seed_stats, task), jobs, workers)
    out = []
    for index, (a, b, _) in enumerate(models):
        samples = results[index * len(seeds) : (index + 1) * len(seeds)]
        out.append(
            ConcentrationSummary(
                a=a,
                b=b,
                median_max_mass=float(np.median([s.max_mass for s in samples])),
                median_entropy=float(np.median([s.entropy for s in samples])),
                median_support_fraction=float(np.median([s.support_fraction for s in samples])),
                samples=tuple(samples),
            )
        )
    return out
