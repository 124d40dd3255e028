"""Coalescing Brownian motions on a time grid.

Paths are kept in their starting order B_1 >= ... >= B_N. Adjacent
clusters merge when they cross within a step, or when the Brownian
bridge between the two grid values touches zero; for independent paths
with gaps g0, g1 at the ends of a step that happens with probability
exp(-g0 g1 / dt). A merged cluster moves with the noise of its top
member, so merges are absorbing and order is never violated.
"""

from __future__ import annotations

import math

import numpy as np

from stickyflows.errors import ConfigError
from stickyflows.models.domain import CoalescingSystem, MergeEvent, Path


def validate_system(system: CoalescingSystem) -> None:
    starts = np.asarray(system.starts, dtype=float)
    if starts.size < 1:
        raise ConfigError("need at least one path", key="starts")
    if np.any(np.diff(starts) > 0):
        raise ConfigError("starts must be ordered B_1 >= ... >= B_N", key="starts")
    if system.dt <= 0:
        raise ConfigError("dt must be > 0", key="dt")


class CoalescingBatch:
    """Independent replicas of one coalescing system, stepped together.

    joined[r, k] says paths k and k + 1 of replica r have merged.
    """

    def __init__(self, starts, dt: float, replicas: int, rng: np.random.Generator):
        starts = np.asarray(starts, dtype=float)
        self.dt = dt
        self.rng = rng
        self.positions = np.tile(starts, (replicas, 1))
        self.joined = np.zeros((replicas, max(starts.size - 1, 0)), dtype=bool)
        self.time = 0.0
        self._merge_equal()

    @property
    def replicas(self) -> int:
        return self.positions.shape[0]

    def heads(self) -> np.ndarray:
        """Index of the top member of each path's cluster."""
        replicas, n_paths = self.positions.shape
        index = np.broadcast_to(np.arange(n_paths), (replicas, n_paths))
        starts_run = np.ones((replicas, n_paths), dtype=bool)
        starts_run[:, 1:] = ~self.joined
        return np.maximum.accumulate(np.where(starts_run, index, 0), axis=1)

    def _collapse(self) -> None:
        """Give every cluster the mean position of its members."""
        heads = self.heads()
        for r in np.flatnonzero(self.joined.any(axis=1)):
            sums = np.bincount(heads[r], weights=self.positions[r], minlength=heads.shape[1])
            counts = np.bincount(heads[r], minlength=heads.shape[1])
            self.positions[r] = (sums / np.maximum(counts, 1))[heads[r]]

    def _merge_equal(self) -> None:
        if self.joined.size:
            self.joined |= self.positions[:, :-1] <= self.positions[:, 1:]
            self._collapse()

    def step(self) -> list[list[MergeEvent]]:
        """Advance one step; returns the new merges of each replica."""
        before = self.positions.copy()
        was_joined = self.joined.copy()
        noise = self.rng.standard_normal(self.positions.shape) * math.sqrt(self.dt)
        self.positions = self.positions + np.take_along_axis(noise, self.heads(), axis=1)
        self.time += self.dt
        if self.joined.size:
            g0 = before[:, :-1] - before[:, 1:]
            g1 = self.positions[:, :-1] - self.positions[:, 1:]
            touch = np.exp(-np.maximum(g0, 0.0) * np.maximum(g1, 0.0) / self.dt)
            bridge = self.rng.random(g1.shape) < touch
            self.joined |= (g1 <= 0) | bridge
            self._collapse()
            # A collapsed cluster may now overlap the next one.
            while True:
                crossed = ~self.joined & (self.positions[:, :-1] <= self.positions[:, 1:])
                if not crossed.any():
                    break
                self.joined |= crossed
                self._collapse()
        new = self.joined & ~was_joined
        return [
            [MergeEvent(time=self.time, upper=int(k), lower=int(k) + 1) for k in np.flatnonzero(r)]
            for r in new
        ]


def simulate_coalescing(
    system: CoalescingSystem, horizon: float, rng: np.random.Generator
) -> tuple[Path, list[MergeEvent]]:
    """Simulate one coalescing system up to the horizon.

    Returns the path (one replica, coordinates in the starting order)
    and the merge log in time order.
    """
    validate_system(system)
    if horizon <= 0:
        raise ConfigError("horizon must be > 0", key="horizon")
    steps = int(round(horizon / system.dt))
    batch = CoalescingBatch(system.starts, system.dt, 1, rng)
    starts = np.asarray(system.starts, dtype=float)
    # One common anchor keeps merged paths exactly equal after origin + displacement.
    origin = np.full(starts.size, starts[0])
    states = np.empty((1, steps + 1, origin.size))
    states[0, 0] = batch.positions[0]
    log: list[MergeEvent] = [
        MergeEvent(time=0.0, upper=int(k), lower=int(k) + 1)
        for k in np.flatnonzero(batch.joined[0])
    ]
    for step in range(1, steps + 1):
        log.extend(batch.step()[0])
        states[0, step] = batch.positions[0]
    path = Path(
        times=np.arange(steps + 1) * system.dt,
        origin=origin,
        displacement=states - origin,
        metadata={"construction": "coalescing", "seed": system.seed},
    )
    return path, log
