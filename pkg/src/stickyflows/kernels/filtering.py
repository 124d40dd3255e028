"""Empirical flow kernel by filtering on one realization of W.

K_{0,t}(x0, .) is the law of X(t) given the field W. With W fixed by a
FieldStream, independent particles dX = dW(X) + (b/n) dB started at x0
sample it, and their histogram is the empirical kernel.

Each step the field increment is evaluated once on the grid faces i dx,
exactly as spde_evolve sees it, and particles read it by periodic linear
interpolation. Positions are wrapped onto [0, L).
"""

from __future__ import annotations

import logging
import math

import numpy as np

from stickyflows.core.identity import substream
from stickyflows.covariance.field import FieldStream
from stickyflows.errors import ConfigError
from stickyflows.kernels.grid import default_domain_length, histogram
from stickyflows.models.domain import KernelField, ScaledModel

logger = logging.getLogger(__name__)

DEFAULT_CELLS = 512
DEFAULT_FEATURES = 256
DIFFUSION_NUMBER = 0.4


def field_stream(
    scaled_model: ScaledModel, features: int, field_seed: int, domain_length: float
) -> FieldStream:
    """The shared field realization used by both kernel constructions."""
    return FieldStream(
        scaled_model, features, substream(field_seed, "field"), period=domain_length
    )


def default_dt(scaled_model: ScaledModel, domain_length: float, cells: int) -> float:
    """Step with D dt / dx^2 = 0.4 for D = (1 + b^2 / n^2) / 2."""
    dx = domain_length / cells
    diffusion = 0.5 * (1.0 + scaled_model.noise_variance)
    return DIFFUSION_NUMBER * dx * dx / diffusion


def filter_kernel(
    scaled_model: ScaledModel,
    x0: float,
    t: float,
    particles: int,
    features: int = DEFAULT_FEATURES,
    seed: int = 0,
    field_seed: int = 0,
    domain_length: float | None = None,
    cells: int = DEFAULT_CELLS,
    dt: float | None = None,
) -> KernelField:
    """Histogram of particles driven by one shared field realization.

    x0 is a position in [0, domain_length). Particle noise comes from
    substream(seed, "particles"); the field from field_seed alone, so a
    spde_evolve call on the same grid and step sees the same W step by
    step.
    """
    if particles < 1:
        raise ConfigError("particles must be >= 1", key="particles")
    if t <= 0:
        raise ConfigError("t must be > 0", key="t")
    length = domain_length if domain_length is not None else default_domain_length(scaled_model)
    step = dt if dt is not None else default_dt(scaled_model, length, cells)
    steps = max(int(round(t / step)), 1)
    stream = field_stream(scaled_model, features, field_seed, length)
    faces = np.arange(cells) * (length / cells)
    rng = substream(seed, "particles")
    noise_scale = (scaled_model.b / scaled_model.n) * math.sqrt(step)
    positions = np.full(particles, float(x0) % length)
    for _ in range(steps):
        increment = stream.grid_increment(cells, step)
        positions += np.interp(positions, faces, increment, period=length)
        positions += noise_scale * rng.standard_normal(particles)
        np.mod(positions, length, out=positions)
    logger.debug("filtered %d particles over %d steps", particles, steps)
    return KernelField(
        domain_length=length,
        values=histogram(positions, cells, length),
        t=steps * step,
        metadata={
            "construction": "filter",
            "x0": float(x0),
            "particles": particles,
            "features": features,
            "seed": seed,
            "field_seed": field_seed,
            "dt": step,
            "steps": steps,
        },
    )
