"""Pair difference Z = X_1 - X_2 as a time-changed Brownian motion.

For N = 2 the difference is a one-dimensional diffusion with speed
density m(z) = 1 / (1 + b^2/n^2 - psi(n z)) and quadratic variation
rate 2 away from the peak. Z(t) = B(tau_t) where tau inverts the clock
A(u) = 1/2 int_0^u m(B_s) ds.

The clock is built on a spatial lattice z0 + j h. B is observed at its
successive lattice hits (a simple random walk) and each visit to site s
advances the clock by the expected occupation 1/2 int m(s + y)(h - |y|) dy
of one excursion to a neighbour. The walk is exact at lattice hits; the
clock between hits carries only its mean, so the law converges as h -> 0.
The tent integrals resolve the narrow peak of m near 0 for any b / (a n^2).
"""

from __future__ import annotations

import logging
import math

import numpy as np
from scipy import integrate

from stickyflows.covariance.psi import speed_density
from stickyflows.errors import ConfigError, StepBudgetExceeded
from stickyflows.models.domain import Path, ScaledModel

logger = logging.getLogger(__name__)

GAUSS_NODES = 16
NEAR_FACTOR = 6.0
DEFAULT_MAX_STEPS = 50_000_000


def default_lattice(scaled_model: ScaledModel, dt: float) -> float:
    return min(math.sqrt(dt) / 4.0, 0.25 * scaled_model.correlation_length)


class TentTable:
    """Lazily extended table of tent masses at sites z0 + j h."""

    def __init__(self, scaled_model: ScaledModel, z0: float, spacing: float):
        self.scaled = scaled_model
        self.z0 = z0
        self.h = spacing
        self.radius = -1
        self.values = np.empty(0)
        nodes, weights = np.polynomial.legendre.leggauss(GAUSS_NODES)
        # Nodes on [0, h] for each half of the tent.
        self._y = 0.5 * spacing * (nodes + 1.0)
        self._w = 0.5 * spacing * weights * (spacing - self._y)
        self.near = NEAR_FACTOR * scaled_model.correlation_length + spacing

    def _tent(self, site: float) -> float:
        h = self.h
        peak = self.scaled.b / (self.scaled.a * self.scaled.n**2)
        points = [p for p in (-site, -site - peak, -site + peak) if -h < p < h]
        value, _ = integrate.quad(
            lambda y: speed_density(self.scaled, site + y) * (h - abs(y)),
            -h,
            h,
            points=sorted(points) or None,
            limit=400,
            epsabs=1e-14,
            epsrel=1e-10,
        )
        return value

    def _compute(self, indices: np.ndarray) -> np.ndarray:
        sites = self.z0 + indices * self.h
        out = np.empty(sites.shape[0])
        near = np.abs(sites) < self.near
        for i in np.flatnonzero(near):
            out[i] = self._tent(float(sites[i]))
        far = sites[~near]
        if far.size:
            right = speed_density(self.scaled, far[:, None] + self._y[None, :]) @ self._w
            left = speed_density(self.scaled, far[:, None] - self._y[None, :]) @ self._w
            out[~near] = right + left
        return out

    def ensure(self, radius: int) -> None:
        if radius <= self.radius:
            return
        new_radius = max(radius, 2 * self.radius + 1, 64)
        values = np.empty(2 * new_radius + 1)
        if self.radius >= 0:
            values[new_radius - self.radius : new_radius + self.radius + 1] = self.values
            lower = np.arange(-new_radius, -self.radius)
            upper = np.arange(self.radius + 1, new_radius + 1)
            values[: new_radius - self.radius] = self._compute(lower)
            values[new_radius + self.radius + 1 :] = self._compute(upper)
        else:
            values[:] = self._compute(np.arange(-new_radius, new_radius + 1))
        self.values = values
        self.radius = new_radius

    def lookup(self, indices: np.ndarray) -> np.ndarray:
        self.ensure(int(np.max(np.abs(indices))))
        return self.values[indices + self.radius]


def _single_replica(
    table: TentTable,
    horizon: float,
    times: np.ndarray,
    rng: np.random.Generator,
    max_steps: int,
) -> tuple[np.ndarray, int]:
    h = table.h
    chunk = int(min(max_steps, max(1024, 4.0 * horizon / h**2)))
    position = 0
    clock = 0.0
    indices_parts = []
    clock_parts = []
    steps = 0
    while clock < horizon:
        if steps >= max_steps:
            raise StepBudgetExceeded(
                f"pair difference needed more than {max_steps} lattice steps"
            )
        size = min(chunk, max_steps - steps)
        moves = rng.integers(0, 2, size=size) * 2 - 1
        visited = position + np.concatenate(([0], np.cumsum(moves[:-1])))
        ends = clock + 0.5 * np.cumsum(table.lookup(visited))
        indices_parts.append(visited)
        clock_parts.append(ends)
        position = int(visited[-1] + moves[-1])
        clock = float(ends[-1])
        steps += size
    visited = np.concatenate(indices_parts)
    ends = np.concatenate(clock_parts)
    # The visit in progress at time t is the first one ending after t.
    slot = np.minimum(np.searchsorted(ends, times, side="right"), ends.shape[0] - 1)
    return table.z0 + visited[slot] * h, steps


def two_point_difference_timechange(
    scaled_model: ScaledModel,
    z0: float,
    horizon: float,
    dt: float,
    rng: np.random.Generator,
    replicas: int = 1,
    lattice: float | None = None,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> Path:
    """Lattice time-change construction of X_1 - X_2 on a uniform time grid.

    Args:
        scaled_model: Scaled covariance and diffusivity.
        z0: Starting difference.
        horizon: Final time.
        dt: Output grid spacing.
        rng: Random stream.
        replicas: Number of independent replicas.
        lattice: Spatial lattice spacing h (default min(sqrt(dt)/4,
            correlation_length/4)).
        max_steps: Lattice step budget per replica.

    Raises:
        StepBudgetExceeded: If a replica needs more than max_steps steps.
    """
    if dt <= 0 or horizon <= 0:
        raise ConfigError("dt and horizon must be > 0", key="dt")
    spacing = lattice if lattice is not None else default_lattice(scaled_model, dt)
    if spacing <= 0:
        raise ConfigError("lattice spacing must be > 0", key="lattice")
    steps = int(round(horizon / dt))
    times = np.arange(steps + 1) * dt
    table = TentTable(scaled_model, z0, spacing)
    out = np.zeros((replicas, steps + 1, 1))
    walked = 0
    for r in range(replicas):
        values, used = _single_replica(table, horizon, times, rng, max_steps)
        out[r, :, 0] = values - z0
        walked += used
    logger.debug("time-change construction used %d lattice steps", walked)
    return Path(
        times=times,
        origin=np.array([z0]),
        displacement=out,
        metadata={"construction": "timechange", "lattice": spacing, "lattice_steps": walked},
    )
