"""Periodic grids and KernelField constructors."""

from __future__ import annotations

import math

import numpy as np

from stickyflows.errors import ConfigError
from stickyflows.models.domain import KernelField, ScaledModel

DOMAIN_CORRELATION_LENGTHS = 10.0


def default_domain_length(scaled_model: ScaledModel) -> float:
    """Ten correlation lengths 1 / (n a).

    Mass that spreads further wraps around the periodic domain.
    """
    return DOMAIN_CORRELATION_LENGTHS * scaled_model.correlation_length


def _check_grid(cells: int, domain_length: float) -> None:
    if cells < 3:
        raise ConfigError("grid needs at least 3 cells", key="cells")
    if domain_length <= 0:
        raise ConfigError("domain_length must be > 0", key="domain_length")


def initial_point(cells: int, domain_length: float, x0: float) -> KernelField:
    """All mass in the cell containing x0 (mod domain_length)."""
    _check_grid(cells, domain_length)
    dx = domain_length / cells
    values = np.zeros(cells)
    values[int(math.floor((x0 % domain_length) / dx)) % cells] = 1.0 / dx
    return KernelField(domain_length=domain_length, values=values, metadata={"x0": x0})


def initial_gaussian(
    cells: int, domain_length: float, center: float, variance: float
) -> KernelField:
    """Normalized Gaussian bump sampled at cell centers."""
    _check_grid(cells, domain_length)
    if variance <= 0:
        raise ConfigError("variance must be > 0", key="variance")
    dx = domain_length / cells
    centers = (np.arange(cells) + 0.5) * dx
    values = np.exp(-((centers - center) ** 2) / (2.0 * variance))
    values /= math.fsum(values) * dx
    return KernelField(
        domain_length=domain_length,
        values=values,
        metadata={"x0": center, "initial_variance": variance},
    )


def histogram(positions, cells: int, domain_length: float) -> np.ndarray:
    """Density histogram of positions wrapped onto [0, domain_length)."""
    wrapped = np.mod(np.asarray(positions, dtype=float), domain_length)
    counts, _ = np.histogram(wrapped, bins=cells, range=(0.0, domain_length))
    return counts / (counts.sum() * (domain_length / cells))


def centered_moments(field: KernelField) -> tuple[float, float]:
    """Mean and variance of the density, without periodic unwrapping."""
    p = field.probabilities
    mean = math.fsum(p * field.centers) / math.fsum(p)
    var = math.fsum(p * (field.centers - mean) ** 2) / math.fsum(p)
    return mean, var
