"""Batched Euler-Maruyama simulation of the prelimit N-point motion.

    dX_i = W(X_i, dt) + (b / n) dB_i

The increments have covariance Sigma_ij dt with
Sigma_ij = psi(n (x_i - x_j)) + (b^2 / n^2) 1(i = j). Two drivers:

- "dense": Cholesky factor of Sigma at the current state, taken in
  sorted coordinate order so that relabeling the points and their
  noises relabels the output exactly.
- "fourier": one random-Fourier field draw per replica and step,
  shared by the N points of that replica, plus independent noise.

States are kept as a fixed anchor plus a displacement, and psi only
sees anchor-relative positions. A common shift of x0 therefore moves
every path by exactly that shift.
"""

from __future__ import annotations

import functools
import logging
import math

import numpy as np

from stickyflows.core.identity import block_sizes, substream
from stickyflows.covariance.field import field_values, sample_field
from stickyflows.errors import ConfigError, NonFiniteStateError, UnsupportedKindError
from stickyflows.models.domain import Path, ScaledModel, SimConfig
from stickyflows.npoint.dynamics import batch_factor, step_covariance
from stickyflows.worker.pool import map_blocks

logger = logging.getLogger(__name__)

DEFAULT_BLOCK_SIZE = 256
STEP_SIZE_WARNING = 0.1


def check_step_size(scaled_model: ScaledModel, dt: float) -> bool:
    """Warn when dt n^2 a^2 is too coarse to resolve the correlation length."""
    resolution = dt * (scaled_model.n * scaled_model.a) ** 2
    if resolution > STEP_SIZE_WARNING:
        logger.warning(
            "dt=%.3e is coarse for correlation length %.3e (dt n^2 a^2 = %.3f)",
            dt,
            scaled_model.correlation_length,
            resolution,
        )
        return False
    return True


def validate_config(config: SimConfig) -> None:
    if config.n_points < 1:
        raise ConfigError("n_points must be >= 1", key="n_points")
    if len(config.x0) != config.n_points:
        raise ConfigError(
            f"x0 has {len(config.x0)} entries, expected {config.n_points}", key="x0"
        )
    if config.dt <= 0 or config.horizon <= 0:
        raise ConfigError("dt and horizon must be > 0", key="dt")
    if config.driver not in ("dense", "fourier"):
        raise ConfigError(f"unknown driver: {config.driver}", key="driver")
    if config.driver == "fourier" and config.scaled.base.kind != "gaussian":
        raise UnsupportedKindError("fourier driver needs kind=gaussian")


class NPointStepper:
    """Advances a batch of replicas one Euler-Maruyama step at a time.

    Exit and ball experiments drive this directly so they can stop
    replicas individually; simulate() uses it for fixed horizons.
    """

    def __init__(self, config: SimConfig, replicas: int, rng: np.random.Generator):
        validate_config(config)
        self.config = config
        self.scaled = config.scaled
        self.rng = rng
        x0 = np.asarray(config.x0, dtype=float)
        self.anchor = float(x0[0])
        self.offsets = x0 - self.anchor
        self.displacement = np.zeros((replicas, config.n_points))
        self.sqrt_dt = math.sqrt(config.dt)
        self.max_jitter = 0.0
        self.steps_taken = 0

    @property
    def states(self) -> np.ndarray:
        return self.anchor + self.offsets + self.displacement

    def relative(self, rows=None) -> np.ndarray:
        disp = self.displacement if rows is None else self.displacement[rows]
        return self.offsets + disp

    def increments(self, relative: np.ndarray, normals: np.ndarray | None = None) -> np.ndarray:
        """Increments for states given in anchor-relative coordinates.

        With the dense driver, ``normals`` of shape (R, N) may be
        supplied; they are mapped through the factor of Sigma.
        """
        replicas, n_points = relative.shape
        if self.config.driver == "dense":
            if normals is None:
                normals = self.rng.standard_normal((replicas, n_points))
            return self.sqrt_dt * self._dense_increment(relative, normals)
        correlated = self._fourier_increment(relative)
        independent = self.rng.standard_normal((replicas, n_points))
        return self.sqrt_dt * (correlated + (self.scaled.b / self.scaled.n) * independent)

    def _dense_increment(self, relative: np.ndarray, xi: np.ndarray) -> np.ndarray:
        order = np.argsort(relative, axis=1, kind="stable")
        ordered = np.take_along_axis(relative, order, axis=1)
        factors, jitter = batch_factor(step_covariance(self.scaled, ordered))
        self.max_jitter = max(self.max_jitter, jitter)
        xi_ordered = np.take_along_axis(xi, order, axis=1)
        out_ordered = np.einsum("rij,rj->ri", factors, xi_ordered)
        out = np.empty_like(out_ordered)
        np.put_along_axis(out, order, out_ordered, axis=1)
        return out

    def _fourier_increment(self, relative: np.ndarray) -> np.ndarray:
        fields = sample_field(
            self.scaled, self.config.fourier_features, self.rng, size=relative.shape[0]
        )
        return field_values(fields, relative)

    def advance(self, rows=None) -> None:
        """One step for all replicas, or only for the given row indices."""
        if rows is None:
            self.displacement += self.increments(self.relative())
        else:
            self.displacement[rows] += self.increments(self.relative(rows))
        self.steps_taken += 1
        if not np.all(np.isfinite(self.displacement)):
            raise NonFiniteStateError("non-finite state", step=self.steps_taken)


def euler_maruyama(config: SimConfig, normals: np.ndarray) -> np.ndarray:
    """Dense-driver trajectory of one replica from explicit normals.

    Args:
        config: Simulation parameters; driver must be "dense".
        normals: Array of shape (steps, N).

    Returns:
        Displacements of shape (steps + 1, N).
    """
    if config.driver != "dense":
        raise ConfigError("explicit normals require driver=dense", key="driver")
    normals = np.asarray(normals, dtype=float)
    stepper = NPointStepper(config, 1, np.random.default_rng(0))
    out = np.zeros((normals.shape[0] + 1, config.n_points))
    for step in range(normals.shape[0]):
        stepper.displacement += stepper.increments(stepper.relative(), normals[step][None])
        out[step + 1] = stepper.displacement[0]
    return out


def simulate_block(
    config: SimConfig, replicas: int, rng: np.random.Generator, record_every: int = 1
) -> Path:
    """Simulate ``replicas`` independent replicas on one stream."""
    check_step_size(config.scaled, config.dt)
    stepper = NPointStepper(config, replicas, rng)
    steps = config.steps
    recorded = list(range(0, steps + 1, record_every))
    if recorded[-1] != steps:
        recorded.append(steps)
    keep = set(recorded)
    out = np.zeros((replicas, len(recorded), config.n_points))
    slot = 1
    for step in range(1, steps + 1):
        stepper.advance()
        if step in keep:
            out[:, slot, :] = stepper.displacement
            slot += 1
    origin = np.asarray(config.x0, dtype=float)
    return Path(
        times=np.asarray(recorded, dtype=float) * config.dt,
        origin=origin,
        displacement=out,
        metadata={"driver": config.driver, "max_jitter": stepper.max_jitter},
    )


def simulate(config: SimConfig, rng: np.random.Generator, replicas: int = 1) -> Path:
    """Simulate the N-point motion up to config.horizon.

    Raises:
        ConfigError: On inconsistent parameters.
        NonFiniteStateError: If a state becomes NaN or infinite.
    """
    return simulate_block(config, replicas, rng)


def _block_task(config: SimConfig, tag: str, record_every: int, task: tuple[int, int]) -> Path:
    index, size = task
    return simulate_block(config, size, substream(config.seed, tag, index), record_every)


def concatenate_paths(paths: list[Path]) -> Path:
    first = paths[0]
    metadata = dict(first.metadata)
    metadata["max_jitter"] = max(p.metadata.get("max_jitter", 0.0) for p in paths)
    at_zero = None
    if first.at_zero is not None:
        at_zero = np.concatenate([p.at_zero for p in paths], axis=0)
    return Path(
        times=first.times,
        origin=first.origin,
        displacement=np.concatenate([p.displacement for p in paths], axis=0),
        metadata=metadata,
        at_zero=at_zero,
    )


def simulate_ensemble(
    config: SimConfig,
    replicas: int,
    workers: int = 1,
    block_size: int = DEFAULT_BLOCK_SIZE,
    record_every: int = 1,
    tag: str = "npoint",
) -> Path:
    """Simulate many replicas in independent blocks.

    Block i draws from substream(config.seed, tag, i), so the result is
    the same for any worker count.
    """
    validate_config(config)
    tasks = list(enumerate(block_sizes(replicas, block_size)))
    logger.info(
        "simulating %d replicas of N=%d in %d blocks (driver=%s)",
        replicas,
        config.n_points,
        len(tasks),
        config.driver,
    )
    fn = functools.partial(_block_task, config, tag, record_every)
    return concatenate_paths(map_blocks(fn, tasks, workers))
