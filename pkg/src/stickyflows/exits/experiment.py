"""Exit of the N-point motion from D(epsilon) and theta estimates from it.

D(epsilon) is the set where max_ij (x_i - x_j) < epsilon. Started on the
diagonal, the mean exit time and the exit cell are governed by the
total split rate S = sum_k C(N, k) theta(k : N - k):

    E[T] / epsilon -> 1 / (2 S),    P(cell) -> theta(k : l) / S.
"""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from stickyflows.aggregation.estimates import Estimate, jackknife_mean, ratio_estimate
from stickyflows.cells.combinatorics import cluster_ranks
from stickyflows.core.identity import block_sizes, substream
from stickyflows.covariance.psi import peak_breakpoints, psi, speed_density
from stickyflows.errors import ConfigError, DegenerateHistogramError, QuadratureError
from stickyflows.models.domain import ExitExperiment, ExitStats, ScaledModel
from stickyflows.npoint.simulate import NPointStepper, check_step_size
from stickyflows.theta.montecarlo import gamma_const
from stickyflows.worker.pool import map_blocks

logger = logging.getLogger(__name__)

DEFAULT_GAP_FRACTION = 1.0 / 50.0
DEFAULT_BLOCK_SIZE = 256
PLATEAU_SIGMAS = 3.0


@dataclass(frozen=True)
class ThetaSlice:
    """theta(k : N - k) estimates from one exit experiment.

    entries is keyed by (k, l) with l the size of the upper cluster.
    """

    n_points: int
    total_rate: Estimate
    entries: dict[tuple[int, int], Estimate]


@dataclass(frozen=True)
class PlateauFit:
    value: float
    stderr: float
    used: int


@dataclass(frozen=True)
class OuterExit:
    """Heuristic exit law of D(epsilon) from a point inside it.

    probability is (x_max - x_min) / epsilon; split_probabilities[k] is
    the chance that the ordered gap between positions k and k + 1
    (from the top) is the one that opens.
    """

    probability: float
    split_probabilities: np.ndarray


def default_cluster_gap(epsilon: float) -> float:
    return epsilon * DEFAULT_GAP_FRACTION


def _classify(states: np.ndarray, gap: float) -> list[tuple[int, ...]]:
    ranks = cluster_ranks(states, gap)
    labels = []
    for row in ranks:
        if row.max() == 1:
            labels.append(tuple(int(i) for i in np.flatnonzero(row == 1)))
        else:
            labels.append(())
    return labels


def _bridge_crossed(
    scaled_model: ScaledModel,
    before: np.ndarray,
    after: np.ndarray,
    epsilon: float,
    dt: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Bridge correction: did the spread cross epsilon inside the step?"""
    s0 = before.max(axis=1) - before.min(axis=1)
    s1 = after.max(axis=1) - after.min(axis=1)
    rate = 2.0 * (1.0 + scaled_model.noise_variance - psi(scaled_model.base, scaled_model.n * s1))
    rate = np.maximum(rate, 2.0 * scaled_model.noise_variance)
    prob = np.exp(-2.0 * (epsilon - s0) * (epsilon - s1) / (rate * dt))
    return rng.random(s1.shape[0]) < prob


def _exit_block(experiment: ExitExperiment, gap: float, task: tuple[int, int]):
    index, size = task
    sim = experiment.sim
    rng = substream(sim.seed, "exits", index)
    stepper = NPointStepper(sim, size, rng)
    epsilon = experiment.epsilon
    times = np.full(size, math.nan)
    final = np.zeros((size, sim.n_points))
    active = np.arange(size)
    step = 0
    while active.size and step < experiment.max_steps:
        before = stepper.relative(active)
        stepper.advance(active)
        step += 1
        after = stepper.relative(active)
        spread = after.max(axis=1) - after.min(axis=1)
        done = spread >= epsilon
        pending = ~done
        if pending.any():
            done[pending] = _bridge_crossed(
                sim.scaled, before[pending], after[pending], epsilon, sim.dt, rng
            )
        rows = active[done]
        times[rows] = step * sim.dt
        final[rows] = after[done]
        active = active[~done]
    completed = np.flatnonzero(np.isfinite(times))
    labels = _classify(final[completed], gap)
    return times[completed], labels, int(active.size), stepper.max_jitter


def run_exits(
    experiment: ExitExperiment, workers: int = 1, block_size: int = DEFAULT_BLOCK_SIZE
) -> ExitStats:
    """Simulate exits from D(epsilon) and classify the exit cells.

    Replicas that exceed experiment.max_steps are counted in
    ExitStats.overflow and left out of the statistics.

    Raises:
        ConfigError: If the start is not on the diagonal or epsilon <= 0.
    """
    sim = experiment.sim
    if experiment.epsilon <= 0:
        raise ConfigError("epsilon must be > 0", key="epsilon")
    if max(sim.x0) - min(sim.x0) != 0:
        raise ConfigError("exit experiments start on the diagonal", key="x0")
    gap = experiment.cluster_gap
    if gap > experiment.epsilon / 10.0:
        logger.warning(
            "cluster_gap=%.3e is not small against epsilon=%.3e", gap, experiment.epsilon
        )
    check_step_size(sim.scaled, sim.dt)
    tasks = list(enumerate(block_sizes(experiment.replicas, block_size)))
    fn = functools.partial(_exit_block, experiment, gap)
    results = map_blocks(fn, tasks, workers)
    exit_times = np.concatenate([r[0] for r in results])
    labels = tuple(label for r in results for label in r[1])
    overflow = sum(r[2] for r in results)
    if overflow:
        logger.warning("%d of %d replicas exceeded the step budget", overflow, experiment.replicas)
    return ExitStats(
        n_points=sim.n_points,
        epsilon=experiment.epsilon,
        exit_times=exit_times,
        cell_labels=labels,
        overflow=overflow,
        max_jitter=max(r[3] for r in results),
    )


def estimate_theta(stats: ExitStats, epsilon: float | None = None) -> ThetaSlice:
    """Invert the exit asymptotics into theta(k : N - k) estimates.

    S = epsilon / (2 E[T]) and theta(k:l) = P(size-l upper cluster) S / C(N, l),
    each as a ratio of per-replica means with a delta-method stderr.

    Raises:
        DegenerateHistogramError: If two-cluster exits are not dominant.
    """
    epsilon = stats.epsilon if epsilon is None else epsilon
    n_points = stats.n_points
    if stats.completed == 0:
        raise DegenerateHistogramError("no completed replicas")
    two_cluster = np.array([len(label) > 0 for label in stats.cell_labels])
    if two_cluster.mean() <= 0.5:
        raise DegenerateHistogramError(
            f"two-cluster exits are only {two_cluster.mean():.1%} of the histogram"
        )
    times = stats.exit_times
    ones = np.ones_like(times)
    total = ratio_estimate(ones, times, scale=epsilon / 2.0)
    upper_sizes = np.array([len(label) for label in stats.cell_labels])
    entries = {}
    for upper in range(1, n_points):
        lower = n_points - upper
        hits = (upper_sizes == upper).astype(float)
        entries[(lower, upper)] = ratio_estimate(
            hits, times, scale=epsilon / (2.0 * math.comb(n_points, upper))
        )
    return ThetaSlice(n_points=n_points, total_rate=total, entries=entries)


def two_point_mean_exit_time(
    scaled_model: ScaledModel, epsilon: float, tol: float = 1e-12
) -> float:
    """Exact E_0[T] for |X_1 - X_2| to reach epsilon, started coincident.

    E_0[T] = 1/2 int_{-eps}^{eps} (eps - |z|) m(z) dz with the speed
    density m; tends to epsilon^2 / 2 + epsilon pi / (2 a b) as n grows.
    """
    if epsilon <= 0:
        raise ConfigError("epsilon must be > 0", key="epsilon")
    edges = peak_breakpoints(scaled_model, epsilon)
    pieces = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        value, err = integrate.quad(
            lambda z: (epsilon - z) * speed_density(scaled_model, z),
            lo,
            hi,
            epsabs=tol,
            epsrel=1e-12,
            limit=200,
        )
        if not math.isfinite(value):
            raise QuadratureError("exit-time integral diverged", err)
        pieces.append(value)
    return math.fsum(pieces)


def fit_plateau(estimates, stderrs) -> PlateauFit:
    """Weighted mean over the converged tail of an (n, epsilon) schedule.

    Entries are ordered from coarsest to finest. Starting from the finest,
    earlier entries are added while they stay within three combined
    standard errors of the running weighted mean.
    """
    values = np.asarray(estimates, dtype=float)
    errors = np.asarray(stderrs, dtype=float)
    if values.size == 0:
        raise ConfigError("empty schedule", key="estimates")
    weights = 1.0 / errors**2
    used = 1
    mean = values[-1]
    err = errors[-1]
    for i in range(values.size - 2, -1, -1):
        if abs(values[i] - mean) > PLATEAU_SIGMAS * math.hypot(errors[i], err):
            break
        used += 1
        w = weights[i:]
        mean = math.fsum(w * values[i:]) / math.fsum(w)
        err = 1.0 / math.sqrt(math.fsum(w))
    return PlateauFit(value=float(mean), stderr=float(err), used=used)


def outer_exit_probability(x, epsilon: float) -> OuterExit:
    """Optional-stopping exit law of D(epsilon) from a point inside it."""
    x = np.sort(np.asarray(x, dtype=float))[::-1]
    spread = x[0] - x[-1]
    if spread >= epsilon:
        raise ConfigError("point is outside D(epsilon)", key="x")
    gaps = x[:-1] - x[1:]
    if spread == 0:
        split = np.full(gaps.shape[0], 1.0 / max(gaps.shape[0], 1))
    else:
        split = gaps / spread
    return OuterExit(probability=spread / epsilon, split_probabilities=split)


def heuristic_theta(
    n_points: int, a: float, b: float, samples: int, rng: np.random.Generator
) -> dict[tuple[int, int], Estimate]:
    """theta(k : N - k) from the ball-exit renewal heuristic.

    Exits from the small ball are uniform on its sphere. From each exit
    point the outer exit law gives the chance of each two-cluster split,
    and one split rate is (gamma a b / 2) times the mean opening gap per
    unit radius, shared among the C(N, k) labelled cells. The unit
    sphere sits inside D(epsilon) for any epsilon > sqrt(2); the result
    does not depend on epsilon.
    """
    if n_points < 2:
        raise ConfigError("heuristic needs N >= 2", key="n_points")
    if samples < 2:
        raise ConfigError("samples must be >= 2", key="samples")
    epsilon = 2.0
    x = rng.standard_normal((samples, n_points))
    x -= x.mean(axis=1, keepdims=True)
    points = x / np.linalg.norm(x, axis=1, keepdims=True)
    splits = np.empty((samples, n_points - 1))
    for i, point in enumerate(points):
        outer = outer_exit_probability(point, epsilon)
        splits[i] = outer.probability * outer.split_probabilities
    scale = gamma_const(n_points) * a * b * epsilon / 2.0
    out = {}
    for upper in range(1, n_points):
        est = jackknife_mean(splits[:, upper - 1])
        c = scale / math.comb(n_points, upper)
        out[(n_points - upper, upper)] = Estimate(value=c * est.value, stderr=c * est.stderr)
    return out


@dataclass(frozen=True)
class ScheduleEntry:
    n: int
    epsilon: float
    stats: ExitStats
    estimates: ThetaSlice | None


@dataclass(frozen=True)
class ExitSchedule:
    """Exit estimates over an (n, epsilon) schedule and their plateau fits.

    plateau is keyed like ThetaSlice.entries; total is the fit of the
    total split rate. Entries whose histogram was degenerate carry no
    estimates and are left out of the fits.
    """

    entries: tuple[ScheduleEntry, ...]
    plateau: dict[tuple[int, int], PlateauFit]
    total: PlateauFit | None


def _fit_usable(estimates: list[Estimate]) -> PlateauFit | None:
    usable = [e for e in estimates if math.isfinite(e.value) and 0 < e.stderr < math.inf]
    if not usable:
        return None
    return fit_plateau([e.value for e in usable], [e.stderr for e in usable])


def run_exit_schedule(experiments, workers: int = 1) -> ExitSchedule:
    """Run exit experiments in the given order and fit plateaus across them.

    Raises:
        ConfigError: If the schedule is empty.
    """
    experiments = list(experiments)
    if not experiments:
        raise ConfigError("empty (n, epsilon) schedule", key="schedule_n")
    entries = []
    for experiment in experiments:
        stats = run_exits(experiment, workers=workers)
        try:
            estimates = estimate_theta(stats)
        except DegenerateHistogramError as exc:
            logger.warning(
                "no theta estimate at n=%d epsilon=%.3e: %s",
                experiment.sim.scaled.n,
                experiment.epsilon,
                exc,
            )
            estimates = None
        entries.append(
            ScheduleEntry(
                n=experiment.sim.scaled.n,
                epsilon=experiment.epsilon,
                stats=stats,
                estimates=estimates,
            )
        )
    sliced = [e.estimates for e in entries if e.estimates is not None]
    plateau = {}
    if sliced:
        for key in sliced[0].entries:
            fit = _fit_usable([s.entries[key] for s in sliced])
            if fit is not None:
                plateau[key] = fit
    total = _fit_usable([s.total_rate for s in sliced])
    logger.info("exit schedule of %d entries, %d with estimates", len(entries), len(sliced))
    return ExitSchedule(entries=tuple(entries), plateau=plateau, total=total)
