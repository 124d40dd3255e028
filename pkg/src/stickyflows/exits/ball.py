"""Exit of the projected motion from the small ball B(epsilon/n).

Started on the diagonal, the projection of X onto R^N_0 leaves
B(epsilon/n) after a mean time n^-2 f0(n epsilon), which grows like
epsilon / (n gamma a b), and the exit direction is uniform on the
sphere. For N = 3 the sphere is a circle and uniformity is checked with
Kuiper's test.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from stickyflows.aggregation.estimates import Estimate, mean_stderr
from stickyflows.covariance.psi import gaussian, scaled
from stickyflows.exits.radial import asymptotic_prediction, f0_at
from stickyflows.models.domain import SimConfig
from stickyflows.npoint.simulate import NPointStepper

logger = logging.getLogger(__name__)

STEPS_PER_MEAN_TIME = 1000
MAX_STEP_FACTOR = 50
KUIPER_TERMS = 100


@dataclass(frozen=True)
class BallExitCheck:
    n_points: int
    epsilon: float
    status: str
    reason: str
    mean_exit_time: Estimate | None = None
    predicted: float = math.nan
    predicted_exact: float = math.nan
    kuiper_statistic: float = math.nan
    kuiper_pvalue: float = math.nan
    overflow: int = 0
    max_jitter: float = 0.0


def kuiper_pvalue(statistic: float, count: int) -> float:
    """Asymptotic tail probability of Kuiper's V for `count` samples."""
    root = math.sqrt(count)
    lam = (root + 0.155 + 0.24 / root) * statistic
    if lam < 0.4:
        return 1.0
    j = np.arange(1, KUIPER_TERMS + 1)
    terms = (4.0 * j**2 * lam**2 - 1.0) * np.exp(-2.0 * j**2 * lam**2)
    return float(min(max(2.0 * terms.sum(), 0.0), 1.0))


def kuiper_uniform(fractions) -> tuple[float, float]:
    """Kuiper's V = D+ + D- against Uniform[0, 1) and its p-value."""
    u = np.sort(np.asarray(fractions, dtype=float))
    count = u.shape[0]
    ecdf_hi = np.arange(1, count + 1) / count
    ecdf_lo = np.arange(count) / count
    statistic = float(np.max(ecdf_hi - u) + np.max(u - ecdf_lo))
    return statistic, kuiper_pvalue(statistic, count)


def circle_angles(states: np.ndarray) -> np.ndarray:
    """Polar angle of the R^3_0 projection, as a fraction of a turn."""
    e1 = np.array([1.0, -1.0, 0.0]) / math.sqrt(2.0)
    e2 = np.array([1.0, 1.0, -2.0]) / math.sqrt(6.0)
    centered = states - states.mean(axis=1, keepdims=True)
    angle = np.arctan2(centered @ e2, centered @ e1)
    return np.mod(angle / (2.0 * math.pi), 1.0)


def ball_exit_time_check(
    n_points: int,
    a: float,
    b: float,
    n: int,
    epsilon: float,
    replicas: int,
    rng: np.random.Generator,
    x0=None,
    dt: float | None = None,
) -> BallExitCheck:
    """Compare simulated exits from B(epsilon/n) with the radial prediction.

    The check needs a diagonal start. Any other start is reported with
    status "skipped" instead of being simulated.
    """
    x0 = np.zeros(n_points) if x0 is None else np.asarray(x0, dtype=float)
    if np.ptp(x0) != 0:
        return BallExitCheck(
            n_points=n_points,
            epsilon=epsilon,
            status="skipped",
            reason="start is off the diagonal; the ball prediction assumes x0 on it",
        )
    radius = epsilon / n
    exact = f0_at(n_points, a, b, n * epsilon) / n**2
    asymptotic = epsilon / n * asymptotic_prediction(n_points, a, b)
    step = dt if dt is not None else exact / STEPS_PER_MEAN_TIME
    sim = SimConfig(
        n_points=n_points,
        scaled=scaled(gaussian(a), n, b),
        x0=tuple(x0),
        dt=step,
        horizon=step,
        seed=0,
    )
    stepper = NPointStepper(sim, replicas, rng)
    times = np.full(replicas, math.nan)
    exit_states = np.zeros((replicas, n_points))
    active = np.arange(replicas)
    budget = MAX_STEP_FACTOR * max(exact / step, 1.0)
    count = 0
    while active.size and count < budget:
        stepper.advance(active)
        count += 1
        rel = stepper.relative(active)
        centered = rel - rel.mean(axis=1, keepdims=True)
        out = np.linalg.norm(centered, axis=1) >= radius
        times[active[out]] = count * step
        exit_states[active[out]] = rel[out]
        active = active[~out]
    if active.size:
        logger.warning("%d replicas did not leave the ball", active.size)
    done = np.isfinite(times)
    estimate = mean_stderr(times[done])
    statistic = pvalue = math.nan
    reason = "mean exit time compared with n^-2 f0(n epsilon) and epsilon / (n gamma a b)"
    if n_points == 3:
        statistic, pvalue = kuiper_uniform(circle_angles(exit_states[done]))
        reason += "; exit angles tested with Kuiper"
    return BallExitCheck(
        n_points=n_points,
        epsilon=epsilon,
        status="ok",
        reason=reason,
        mean_exit_time=estimate,
        predicted=asymptotic,
        predicted_exact=exact,
        kuiper_statistic=statistic,
        kuiper_pvalue=pvalue,
        overflow=int(active.size),
        max_jitter=stepper.max_jitter,
    )
