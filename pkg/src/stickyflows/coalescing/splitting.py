"""Probability that a middle path survives until the outer two spread to R.

Three coalescing paths start at (r, r/2, 0). With gaps u = B_1 - B_2 and
w = B_2 - B_3, the coordinates

    y1 = (u + w) / sqrt(2),   y2 = (u - w) / sqrt(6)

form a standard planar Brownian motion killed on the sides of the wedge
|y2| < y1 / sqrt(3) (interior angle pi / 3), and the event is reaching
the line y1 = R / sqrt(2) first. The harmonic function rho^3 cos(3 phi)
of that wedge makes the probability scale like (r / R)^3.
"""

from __future__ import annotations

import math

import numpy as np

from stickyflows.aggregation.estimates import Estimate, LineFit, proportion, weighted_line_fit
from stickyflows.coalescing.system import CoalescingBatch
from stickyflows.errors import ConfigError, StepBudgetExceeded

SQRT3 = math.sqrt(3.0)
DEFAULT_TOLERANCE = 1e-4
TRIAL_CHUNK = 100_000
EULER_STEPS_PER_R2 = 4000
MAX_WALK_STEPS = 10_000


def _walk_chunk(r: float, spread: float, size: int, tol: float, rng: np.random.Generator) -> int:
    outer = spread / math.sqrt(2.0)
    y1 = np.full(size, r / math.sqrt(2.0))
    y2 = np.zeros(size)
    hits = 0
    for _ in range(MAX_WALK_STEPS):
        side = np.minimum(np.abs(y1 - SQRT3 * y2), np.abs(y1 + SQRT3 * y2)) / 2.0
        top = outer - y1
        radius = np.minimum(side, top)
        stop = radius < tol
        hits += int(np.count_nonzero(stop & (top < side)))
        keep = ~stop
        y1, y2, radius = y1[keep], y2[keep], radius[keep]
        if y1.size == 0:
            return hits
        angle = rng.uniform(0.0, 2.0 * math.pi, size=y1.size)
        y1 = y1 + radius * np.cos(angle)
        y2 = y2 + radius * np.sin(angle)
    raise StepBudgetExceeded(f"walk on spheres did not stop within {MAX_WALK_STEPS} jumps")


def _euler_chunk(r: float, spread: float, size: int, dt: float, rng: np.random.Generator) -> int:
    batch = CoalescingBatch((r, r / 2.0, 0.0), dt, size, rng)
    alive = np.ones(size, dtype=bool)
    hits = 0
    budget = int(EULER_STEPS_PER_R2 * 100)
    for _ in range(budget):
        batch.step()
        gap = batch.positions[:, 0] - batch.positions[:, 2]
        dead = batch.joined.any(axis=1)
        reached = alive & ~dead & (gap >= spread)
        hits += int(np.count_nonzero(reached))
        alive &= ~dead & ~reached
        if not alive.any():
            return hits
    raise StepBudgetExceeded("coalescing system did not resolve within the step budget")


def splitting_probability(
    r: float,
    R: float,  # noqa: N803
    trials: int,
    rng: np.random.Generator,
    method: str = "walk",
    tolerance: float | None = None,
    dt: float | None = None,
) -> Estimate:
    """P(T_R < infinity and the middle path is still distinct at T_R).

    Args:
        r: Initial spread of the outer paths; the middle one starts halfway.
        R: Target spread.
        trials: Number of Monte-Carlo trials.
        rng: Random stream.
        method: "walk" (walk on spheres in the wedge) or "euler" (direct
            simulation of the coalescing system).
        tolerance: Walk-on-spheres stopping distance (default 1e-4 r).
        dt: Euler step (default R^2 / 4000).

    Raises:
        ConfigError: Unless 0 <= r <= R / 2 and method is known.
    """
    if R <= 0 or not 0 <= r <= R / 2:
        raise ConfigError("need 0 <= r <= R/2", key="r")
    if trials < 1:
        raise ConfigError("trials must be >= 1", key="trials")
    if r == 0:
        return Estimate(value=0.0, stderr=0.0)
    hits = 0
    for start in range(0, trials, TRIAL_CHUNK):
        size = min(TRIAL_CHUNK, trials - start)
        if method == "walk":
            tol = tolerance if tolerance is not None else DEFAULT_TOLERANCE * r
            hits += _walk_chunk(r, R, size, tol, rng)
        elif method == "euler":
            step = dt if dt is not None else R * R / EULER_STEPS_PER_R2
            hits += _euler_chunk(r, R, size, step, rng)
        else:
            raise ConfigError(f"unknown method: {method}", key="method")
    return proportion(hits, trials)


def fit_exponent(ratios, estimates, stderrs) -> LineFit:
    """Weighted least-squares slope of log(estimate) against log(r / R)."""
    ratios = np.asarray(ratios, dtype=float)
    estimates = np.asarray(estimates, dtype=float)
    stderrs = np.asarray(stderrs, dtype=float)
    usable = estimates > 0
    if np.count_nonzero(usable) < 2:
        raise ConfigError("need at least two positive estimates to fit", key="estimates")
    return weighted_line_fit(
        np.log(ratios[usable]),
        np.log(estimates[usable]),
        stderrs[usable] / estimates[usable],
    )
