"""Domain models for stickyflows.

Immutable dataclasses shared by the numerical modules. They carry data
and a few derived quantities; the algorithms that act on them live in
the per-module subpackages.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime
from typing import Literal

import numpy as np

from stickyflows.errors import MissingThetaEntry

# ============================================================================
# Covariance Domain
# ============================================================================

CovarianceKind = Literal["gaussian", "tabulated"]


@dataclass(frozen=True)
class CovarianceModel:
    """Covariance function psi with curvature constant a.

    For kind="gaussian", psi(x) = exp(-a^2 x^2). For kind="tabulated",
    psi is linearly interpolated from (table_x, table_psi) on x >= 0 and
    extended evenly.
    """

    kind: CovarianceKind
    a: float
    table_x: np.ndarray | None = field(default=None, compare=False, repr=False)
    table_psi: np.ndarray | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ScaledModel:
    """The scaled covariance psi(n .) together with diffusivity b."""

    base: CovarianceModel
    n: int
    b: float

    @property
    def a(self) -> float:
        return self.base.a

    @property
    def noise_variance(self) -> float:
        """Independent diffusivity rate b^2 / n^2."""
        return (self.b / self.n) ** 2

    @property
    def correlation_length(self) -> float:
        """Length scale 1 / (n a) over which psi(n .) decorrelates."""
        return 1.0 / (self.n * self.a)


@dataclass(frozen=True)
class FourierField:
    """One random-Fourier-feature draw of the driving field increment.

    Evaluated at x, the field is sum_j c_j cos(k_j x) + s_j sin(k_j x).
    Amplitudes already include the 1/sqrt(J) normalization, so one draw
    has unit variance at every point in expectation over amplitudes.
    """

    wavenumbers: np.ndarray = field(compare=False)
    cos_amplitudes: np.ndarray = field(compare=False)
    sin_amplitudes: np.ndarray = field(compare=False)

    @property
    def count(self) -> int:
        return int(self.wavenumbers.shape[-1])


# ============================================================================
# Theta Domain
# ============================================================================

ThetaMethod = Literal["quadrature", "montecarlo", "nu"]


@dataclass(frozen=True)
class ThetaFamily:
    """Triangular array theta(k:l), k, l >= 1, k + l <= nmax."""

    nmax: int
    a: float
    b: float
    method: ThetaMethod
    values: dict[tuple[int, int], float]
    error_bounds: dict[tuple[int, int], float]

    def get(self, k: int, l: int) -> float:  # noqa: E741
        try:
            return self.values[(k, l)]
        except KeyError:
            raise MissingThetaEntry(
                f"theta({k}:{l}) not in family with nmax={self.nmax}"
            ) from None

    def total_split_rate(self, n_points: int) -> float:
        """Sum over k of C(N, k) theta(k : N - k)."""
        return math.fsum(
            math.comb(n_points, k) * self.get(k, n_points - k) for k in range(1, n_points)
        )

    def cell_probability(self, k: int, n_points: int) -> float:
        """Limit probability of exiting into one given (k, N - k) cell."""
        return self.get(k, n_points - k) / self.total_split_rate(n_points)


# ============================================================================
# Cells Domain
# ============================================================================


@dataclass(frozen=True)
class Cell:
    """A cell of R^N given by a weak ordering of coordinates.

    ranks[i] is the 0-based block index of coordinate i; blocks are
    ordered from smallest coordinate value to largest.
    """

    ranks: tuple[int, ...]

    @property
    def dimension(self) -> int:
        return len(self.ranks)

    @property
    def block_count(self) -> int:
        return max(self.ranks) + 1 if self.ranks else 0

    @property
    def blocks(self) -> tuple[frozenset[int], ...]:
        out: list[set[int]] = [set() for _ in range(self.block_count)]
        for i, r in enumerate(self.ranks):
            out[r].add(i)
        return tuple(frozenset(b) for b in out)

    def describe(self) -> str:
        """Human readable form such as 'x1<x2=x3' (1-based labels)."""
        parts = []
        for block in self.blocks:
            parts.append("=".join(f"x{i + 1}" for i in sorted(block)))
        return "<".join(parts)


@dataclass(frozen=True)
class DirectionVector:
    """The vector v_{I,J}: +1 on I, -1 on J, 0 elsewhere."""

    upper: frozenset[int]
    lower: frozenset[int]
    dimension: int

    @property
    def k(self) -> int:
        return len(self.upper)

    @property
    def l(self) -> int:  # noqa: E743
        return len(self.lower)

    @property
    def vector(self) -> np.ndarray:
        v = np.zeros(self.dimension)
        v[list(self.upper)] = 1.0
        v[list(self.lower)] = -1.0
        return v


# ============================================================================
# Simulation Domain
# ============================================================================

Driver = Literal["dense", "fourier"]


@dataclass(frozen=True)
class SimConfig:
    """Parameters of a prelimit N-point simulation."""

    n_points: int
    scaled: ScaledModel
    x0: tuple[float, ...]
    dt: float
    horizon: float
    seed: int
    driver: Driver = "dense"
    fourier_features: int = 1024

    @property
    def steps(self) -> int:
        return int(round(self.horizon / self.dt))


@dataclass(frozen=True)
class Path:
    """Discretized trajectories of one or more replicas.

    displacement has shape (replicas, steps + 1, N) and states = origin +
    displacement. Simulators put a fixed anchor in origin so that shifting
    the start moves every state by exactly the shift.
    """

    times: np.ndarray = field(compare=False)
    origin: np.ndarray = field(compare=False)
    displacement: np.ndarray = field(compare=False)
    metadata: dict = field(default_factory=dict, compare=False)
    at_zero: np.ndarray | None = field(default=None, compare=False)

    @property
    def states(self) -> np.ndarray:
        return self.origin + self.displacement

    @property
    def replicas(self) -> int:
        return int(self.displacement.shape[0])

    @property
    def dimension(self) -> int:
        return int(self.displacement.shape[2])

    @property
    def steps(self) -> int:
        return int(self.times.shape[0]) - 1

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if self.steps > 0 else 0.0


@dataclass(frozen=True)
class StickyParams:
    """Parameters of the reference sticky Brownian motion.

    variance_rate is the quadratic variation rate away from 0. The default
    2 matches a pair difference X1 - X2, for which |Z| - 2 theta (time at
    0) is a martingale; 1 gives the standard sticky Brownian motion.
    """

    theta: float
    z0: float
    horizon: float
    dt: float
    seed: int
    variance_rate: float = 2.0
    substeps: int = 16


# ============================================================================
# Exit Domain
# ============================================================================


@dataclass(frozen=True)
class ExitExperiment:
    """Exit of the projected process from D(epsilon), started on the diagonal."""

    sim: SimConfig
    epsilon: float
    cluster_gap: float
    replicas: int
    max_steps: int = 1_000_000


@dataclass(frozen=True)
class ExitStats:
    """Exit times and exit-cell classification for an exit experiment.

    cell_labels[r] is the sorted tuple of indices in the upper cluster,
    () for "more than two clusters", or None for an overflowed replica.
    """

    n_points: int
    epsilon: float
    exit_times: np.ndarray = field(compare=False)
    cell_labels: tuple = field(compare=False)
    overflow: int = 0
    max_jitter: float = 0.0

    @property
    def completed(self) -> int:
        return int(self.exit_times.shape[0])

    @property
    def mean_exit_time(self) -> float:
        return float(np.mean(self.exit_times))

    @property
    def exit_time_stderr(self) -> float:
        if self.completed < 2:
            return float("inf")
        return float(np.std(self.exit_times, ddof=1) / math.sqrt(self.completed))

    @property
    def histogram(self) -> dict[tuple[int, ...], float]:
        """Mass per ordered bipartition; key () is the multi-cluster bucket."""
        counts: dict[tuple[int, ...], int] = {}
        for label in self.cell_labels:
            counts[label] = counts.get(label, 0) + 1
        total = max(self.completed, 1)
        return {key: c / total for key, c in sorted(counts.items())}

    @property
    def multi_cluster_fraction(self) -> float:
        return self.histogram.get((), 0.0)


# ============================================================================
# Coalescing Domain
# ============================================================================


@dataclass(frozen=True)
class CoalescingSystem:
    """Ordered starting points B_1(0) >= ... >= B_N(0) of coalescing paths."""

    starts: tuple[float, ...]
    dt: float
    seed: int


@dataclass(frozen=True)
class MergeEvent:
    """Two adjacent clusters merged at the given time."""

    time: float
    upper: int
    lower: int


# ============================================================================
# Kernel Domain
# ============================================================================


@dataclass(frozen=True)
class KernelField:
    """Density on a uniform periodic grid of [0, domain_length)."""

    domain_length: float
    values: np.ndarray = field(compare=False)
    t: float = 0.0
    metadata: dict = field(default_factory=dict, compare=False)

    @property
    def cells(self) -> int:
        return int(self.values.shape[0])

    @property
    def dx(self) -> float:
        return self.domain_length / self.cells

    @property
    def centers(self) -> np.ndarray:
        return (np.arange(self.cells) + 0.5) * self.dx

    @property
    def mass(self) -> float:
        return float(math.fsum(self.values) * self.dx)

    @property
    def probabilities(self) -> np.ndarray:
        return self.values * self.dx


# ============================================================================
# Run Domain
# ============================================================================

RunStatus = Literal["queued", "running", "succeeded", "failed"]


@dataclass
class RunEntity:
    """Domain model for a ledger run."""

    run_id: str
    subcommand: str
    config_hash: str
    config_json: str
    seed: int
    workers: int
    status: RunStatus
    status_badge: str | None = None
    reasons_json: str | None = None
    started_at: datetime | None = None
    ended_at: datetime | None = None
    error_code: str | None = None
    error_detail: str | None = None


@dataclass
class ArtifactEntity:
    """Domain model for a file written by a run."""

    artifact_id: str
    run_id: str
    kind: str
    path: str
    sha256: str
