"""Run orchestration for CLI invocations.

Architecture:
- RunOrchestrator: thin layer that owns the ledger row, status badge,
  summary.json and error.json of one run
- RunProcessor: pure orchestration of one subcommand; writes its tables
  and plots and returns results, diagnostics and artifacts
- RunContext: resolved config plus the identity and output directory

Outputs land in <out>/runs/<run_id>/. run_id depends only on the
subcommand, the resolved parameters and the seed, so a rerun rewrites
the same directory with the same bytes.
"""

from __future__ import annotations

import functools
import json
import logging
import math
import uuid
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from stickyflows import __version__
from stickyflows.aggregation.estimates import Estimate, combined_stderr, mean_stderr
from stickyflows.cells import (
    abs_difference,
    drift_test_ensemble,
    enumerate_cells,
    from_table,
    hinge,
    ordered_bell,
)
from stickyflows.cells.combinatorics import vectors_at_cell
from stickyflows.cells.martingale import default_diagonal_tolerance
from stickyflows.coalescing import fit_exponent, splitting_probability
from stickyflows.core.identity import compute_config_hash, compute_run_id, sha256_file, substream
from stickyflows.covariance import gaussian, scaled, tabulated
from stickyflows.db import repo
from stickyflows.db.session import get_db_session, init_db, ledger_path
from stickyflows.diagnostics.status import RunDiagnostics, compute_status_badge
from stickyflows.errors import ConfigError
from stickyflows.exits import (
    asymptotic_slope,
    ball_exit_time_check,
    estimate_theta,
    gamma_const,
    heuristic_theta,
    radial_f0,
    run_exit_schedule,
    run_exits,
    two_point_mean_exit_time,
)
from stickyflows.exits.experiment import default_cluster_gap
from stickyflows.exits.radial import asymptotic_prediction
from stickyflows.export.binary import write_kernel_binary, write_path_binary
from stickyflows.export.plots import plot_kernels, plot_radial
from stickyflows.export.tables import to_jsonable, write_csv, write_json
from stickyflows.kernels import (
    concentration_comparison,
    density_stats,
    filter_kernel,
    initial_point,
    spde_evolve,
)
from stickyflows.kernels.grid import default_domain_length
from stickyflows.models.domain import (
    ArtifactEntity,
    ExitExperiment,
    RunEntity,
    ScaledModel,
    SimConfig,
    StickyParams,
)
from stickyflows.models.types import RunConfig, RunSummary
from stickyflows.npoint import simulate_ensemble, two_point_difference_timechange
from stickyflows.sticky import occupation_statistics, simulate_sticky
from stickyflows.theta import build_family, consistency_residuals
from stickyflows.worker.pool import map_blocks

logger = logging.getLogger(__name__)

THETA_METHODS = {"quad": "quadrature", "mc": "montecarlo", "nu": "nu"}

# dt (n a)^2 used when a simulating subcommand is given no dt
STEP_RESOLUTION = 0.05
# Step budget of an exit run, in multiples of the predicted mean exit time
EXIT_BUDGET_FACTOR = 20.0
# Band half-width of the stickiness comparison, in units of 1 / n
BAND_WIDTHS = 10.0
# Radial tables reach this many b / a by default
RADIAL_REACH = 50.0
# Starting spreads r / R of the coalescing splitting experiment
SPLIT_RATIOS = (1.0 / 32.0, 1.0 / 16.0, 1.0 / 8.0, 1.0 / 4.0)
SPLIT_EXPONENT = 3.0
# (a, b) pairs of the kernel concentration comparison
CONCENTRATION_PARAMS = ((20.0, 0.375), (60.0, 0.125))

EXIT_CODE_MODULE_ERROR = 1
EXIT_CODE_CONFIG_ERROR = 2


@dataclass
class RunContext:
    """Everything a RunProcessor needs; built once per run."""

    run_id: str
    config_hash: str
    config: RunConfig
    run_output_dir: Path

    @property
    def params(self):
        return self.config.params

    @property
    def seed(self) -> int:
        return self.config.seed

    @property
    def workers(self) -> int:
        return self.config.workers


@dataclass
class RunOutput:
    """What a subcommand produced."""

    results: dict
    diagnostics: RunDiagnostics = field(default_factory=RunDiagnostics)
    artifacts: list[tuple[str, Path]] = field(default_factory=list)


def _estimate(e: Estimate) -> dict:
    return {"value": e.value, "stderr": e.stderr}


def _cell_label(upper: tuple[int, ...]) -> str:
    return " ".join(str(i + 1) for i in upper) if upper else "multi"


def build_scaled(params) -> ScaledModel:
    """psi(n .) and b from the covariance keys of a parameter model.

    Raises:
        ConfigError: If psi = tabulated comes without psi_table.
    """
    if params.psi == "tabulated":
        if not params.psi_table:
            raise ConfigError("psi = tabulated needs psi_table", key="psi_table")
        table = np.loadtxt(params.psi_table, delimiter=",", comments="#", ndmin=2)
        a = params.a if "a" in params.model_fields_set else None
        base = tabulated(table[:, 0], table[:, 1], a=a)
    else:
        base = gaussian(params.a)
    return scaled(base, params.n, params.b)


AffineTable = dict[tuple[int, ...], tuple[list[float], float]]


def read_affine_table(path: Path, n_points: int) -> AffineTable:
    """Per-cell affine pieces, one ``ranks ; gradient ; offset`` line per cell.

    Ranks and gradient are whitespace separated, e.g. ``0 1 1 ; -1 0.5 0.5 ; 0``.
    """
    table = {}
    for number, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.split() for p in line.split(";")]
        if len(parts) != 3 or len(parts[0]) != n_points or len(parts[1]) != n_points:
            raise ConfigError(f"{path}:{number}: expected 'ranks ; gradient ; offset'", "f_table")
        ranks = tuple(int(r) for r in parts[0])
        table[ranks] = ([float(g) for g in parts[1]], float(parts[2][0]))
    return table


def _splitting_task(
    big_r: float, trials: int, method: str, tolerance, dt, seed: int, task: tuple[int, float]
) -> Estimate:
    index, r = task
    rng = substream(seed, "coalesce", index)
    return splitting_probability(r, big_r, trials, rng, method=method, tolerance=tolerance, dt=dt)


class RunProcessor:
    """Runs one subcommand and writes its artifacts.

    Does not touch the ledger or the status badge; that is the
    orchestrator's job.
    """

    def __init__(self, context: RunContext):
        self.ctx = context
        self.out = context.run_output_dir
        self.out.mkdir(parents=True, exist_ok=True)

    def execute(self) -> RunOutput:
        handler = getattr(self, f"_run_{self.ctx.config.subcommand}")
        return handler(self.ctx.params)

    def _default_dt(self, scaled_model: ScaledModel, dt: float | None) -> float:
        if dt is not None:
            return dt
        return STEP_RESOLUTION / (scaled_model.n * scaled_model.a) ** 2

    def _run_theta(self, p) -> RunOutput:
        family = build_family(
            p.nmax,
            p.a,
            p.b,
            THETA_METHODS[p.method],
            tol=p.tol,
            samples=p.samples,
            seed=self.ctx.seed,
        )
        rows = [
            (k, l, value, family.method, family.error_bounds[(k, l)])
            for (k, l), value in sorted(family.values.items())  # noqa: E741
            if not (p.fold and k > l)
        ]
        table = write_csv(
            self.out / "theta.csv", "theta", ["k", "l", "theta", "method", "error_bound"], rows
        )
        residuals = [abs(r) for r in consistency_residuals(family).values()]
        results = {
            "rows": len(rows),
            "theta_1_1": family.get(1, 1),
            "closed_form_1_1": p.a * p.b / (2.0 * math.pi),
            "max_consistency_residual": max(residuals, default=0.0),
            "total_split_rate": {
                str(n_points): family.total_split_rate(n_points)
                for n_points in range(2, p.nmax + 1)
            },
        }
        return RunOutput(results=results, artifacts=[("csv", table)])

    def _run_cells(self, p) -> RunOutput:
        cells = enumerate_cells(p.n)
        rows = [
            (
                index,
                " ".join(str(r) for r in cell.ranks),
                cell.block_count,
                cell.describe(),
                len(vectors_at_cell(cell)),
            )
            for index, cell in enumerate(cells)
        ]
        table = write_csv(
            self.out / "cells.csv",
            "cells",
            ["index", "ranks", "blocks", "description", "vectors"],
            rows,
        )
        results = {"count": len(cells), "ordered_bell": ordered_bell(p.n)}
        return RunOutput(results=results, artifacts=[("csv", table)])

    def _test_function(self, p):
        if p.f == "table":
            if not p.f_table:
                raise ConfigError("f = table needs f_table", key="f_table")
            return from_table(p.n_points, read_affine_table(p.f_table, p.n_points))
        upper = [i - 1 for i in p.upper]
        lower = [i - 1 for i in p.lower]
        if min(upper + lower) < 0 or max(upper + lower) >= p.n_points:
            raise ConfigError(f"indices must lie in 1..{p.n_points}", key="upper")
        if p.f == "abs":
            return abs_difference(upper[0], lower[0], p.n_points)
        return hinge(upper, lower, p.n_points)

    def _run_marttest(self, p) -> RunOutput:
        scaled_model = build_scaled(p)
        dt = self._default_dt(scaled_model, p.dt)
        config = SimConfig(
            n_points=p.n_points,
            scaled=scaled_model,
            x0=(0.0,) * p.n_points,
            dt=dt,
            horizon=p.horizon,
            seed=self.ctx.seed,
            driver=p.driver,
            fourier_features=p.fourier_features,
        )
        f = self._test_function(p)
        family = build_family(p.n_points, scaled_model.a, scaled_model.b)
        tolerance = p.diagonal_tolerance or default_diagonal_tolerance(scaled_model)
        result = drift_test_ensemble(
            config, f, family, p.replicas, tolerance, workers=self.ctx.workers
        )
        table = write_csv(
            self.out / "marttest.csv",
            "martingale_increments",
            ["replica", "increment"],
            enumerate(result.increments),
        )
        results = {
            "function": f.name,
            "mean": result.mean,
            "stderr": result.stderr,
            "zscore": result.zscore,
            "compensator_mean": result.compensator_mean,
            "max_jitter": result.max_jitter,
            "dt": dt,
            "diagonal_tolerance": tolerance,
        }
        diag = RunDiagnostics(
            finite=bool(np.isfinite(result.increments).all()),
            step_resolution=dt * (scaled_model.n * scaled_model.a) ** 2,
            max_jitter=result.max_jitter,
        )
        return RunOutput(results=results, diagnostics=diag, artifacts=[("csv", table)])

    def _run_simulate(self, p) -> RunOutput:
        scaled_model = build_scaled(p)
        x0 = tuple(p.x0) if p.x0 is not None else (0.0,) * p.n_points
        config = SimConfig(
            n_points=p.n_points,
            scaled=scaled_model,
            x0=x0,
            dt=p.dt,
            horizon=p.horizon,
            seed=self.ctx.seed,
            driver=p.driver,
            fourier_features=p.fourier_features,
        )
        path = simulate_ensemble(
            config, p.replicas, workers=self.ctx.workers, record_every=p.record_every
        )
        states = path.states
        header = ["t", *[f"x{i + 1}" for i in range(p.n_points)]]
        rows = [(t, *x) for t, x in zip(path.times, states[0])]
        table = write_csv(self.out / "path.csv", "path", header, rows)
        dump = write_path_binary(self.out / "path.bin", path, self.ctx.seed)
        jitter = float(path.metadata.get("max_jitter", 0.0))
        results = {
            "steps": path.steps,
            "replicas": path.replicas,
            "final_mean": states[:, -1].mean(axis=0),
            "max_jitter": jitter,
        }
        diag = RunDiagnostics(
            finite=bool(np.isfinite(states).all()),
            step_resolution=p.dt * (scaled_model.n * scaled_model.a) ** 2,
            max_jitter=jitter,
        )
        return RunOutput(
            results=results, diagnostics=diag, artifacts=[("csv", table), ("binary", dump)]
        )

    def _sticky_comparison(self, p) -> list[dict]:
        """Band occupation of the prelimit pair difference against sticky BM.

        The pair difference has variance rate 2, so the matching reference
        is variance_rate = 2 with theta = a b / pi.
        """
        reference = simulate_sticky(
            StickyParams(
                theta=p.a * p.b / math.pi,
                z0=0.0,
                horizon=p.horizon,
                dt=p.dt,
                seed=self.ctx.seed,
                variance_rate=2.0,
                substeps=p.substeps,
            ),
            p.replicas,
        )
        rows = []
        for index, n in enumerate(p.compare_n):
            delta = BAND_WIDTHS / n
            prelimit = two_point_difference_timechange(
                scaled(gaussian(p.a), n, p.b),
                0.0,
                p.horizon,
                p.dt,
                substream(self.ctx.seed, "sticky-prelimit", index),
                replicas=p.replicas,
            )
            ours = mean_stderr(occupation_statistics(prelimit, delta)[0])
            ref = mean_stderr(occupation_statistics(reference, delta)[0])
            spread = combined_stderr(ours.stderr, ref.stderr)
            rows.append(
                {
                    "n": n,
                    "delta": delta,
                    "prelimit": ours,
                    "reference": ref,
                    "difference": ours.value - ref.value,
                    "zscore": (ours.value - ref.value) / spread if spread > 0 else 0.0,
                }
            )
        return rows

    def _run_sticky(self, p) -> RunOutput:
        params = StickyParams(
            theta=p.theta,
            z0=p.z0,
            horizon=p.horizon,
            dt=p.dt,
            seed=self.ctx.seed,
            variance_rate=p.variance_rate,
            substeps=p.substeps,
        )
        path = simulate_sticky(params, p.replicas)
        band, zero = occupation_statistics(path, p.delta)
        rows = [
            (t, z, flag) for t, z, flag in zip(path.times, path.states[0, :, 0], path.at_zero[0])
        ]
        artifacts = [
            ("csv", write_csv(self.out / "sticky.csv", "sticky_path", ["t", "z", "at_zero"], rows))
        ]
        results = {
            "delta": p.delta,
            "band_time": _estimate(mean_stderr(band)),
            "zero_fraction": _estimate(mean_stderr(zero)),
        }
        if p.compare_n:
            comparison = self._sticky_comparison(p)
            results["comparison"] = comparison
            header = [
                "n",
                "delta",
                "prelimit",
                "prelimit_stderr",
                "reference",
                "reference_stderr",
                "zscore",
            ]
            rows = [
                (
                    c["n"],
                    c["delta"],
                    c["prelimit"].value,
                    c["prelimit"].stderr,
                    c["reference"].value,
                    c["reference"].stderr,
                    c["zscore"],
                )
                for c in comparison
            ]
            table = write_csv(self.out / "sticky_compare.csv", "sticky_compare", header, rows)
            artifacts.append(("csv", table))
        return RunOutput(results=results, artifacts=artifacts)

    def _exit_experiment(self, p, scaled_model: ScaledModel, epsilon: float, rate: float):
        dt = self._default_dt(scaled_model, p.dt)
        expected = epsilon / (2.0 * rate) + epsilon**2 / 2.0
        max_steps = p.max_steps or int(math.ceil(EXIT_BUDGET_FACTOR * expected / dt))
        return ExitExperiment(
            sim=SimConfig(
                n_points=p.n_points,
                scaled=scaled_model,
                x0=(0.0,) * p.n_points,
                dt=dt,
                horizon=dt,
                seed=self.ctx.seed,
                driver=p.driver,
                fourier_features=p.fourier_features,
            ),
            epsilon=epsilon,
            cluster_gap=p.cluster_gap or default_cluster_gap(epsilon),
            replicas=p.replicas,
            max_steps=max_steps,
        )

    def _run_exits(self, p) -> RunOutput:
        scaled_model = build_scaled(p)
        family = build_family(max(p.n_points, 2), scaled_model.a, scaled_model.b)
        rate = family.total_split_rate(p.n_points)
        experiment = self._exit_experiment(p, scaled_model, p.epsilon, rate)
        dt, max_steps = experiment.sim.dt, experiment.max_steps
        stats = run_exits(experiment, workers=self.ctx.workers)
        histogram = stats.histogram
        uppers = [
            tuple(i for i in range(p.n_points) if mask >> i & 1)
            for mask in range(1, 2**p.n_points - 1)
        ]
        hist_rows = [
            (
                _cell_label(u),
                len(u),
                histogram.get(u, 0.0),
                family.cell_probability(p.n_points - len(u), p.n_points),
            )
            for u in sorted(uppers, key=lambda u: (len(u), u))
        ]
        hist_rows.append(("multi", 0, histogram.get((), 0.0), 0.0))
        artifacts = [
            (
                "csv",
                write_csv(
                    self.out / "exits.csv",
                    "exit_cells",
                    ["upper", "upper_size", "mass", "predicted"],
                    hist_rows,
                ),
            )
        ]
        estimates = estimate_theta(stats)
        theta_rows = [
            (k, l, est.value, est.stderr, family.get(k, l))
            for (k, l), est in sorted(estimates.entries.items())  # noqa: E741
        ]
        artifacts.append(
            (
                "csv",
                write_csv(
                    self.out / "exits_theta.csv",
                    "exit_theta",
                    ["k", "l", "estimate", "stderr", "quadrature"],
                    theta_rows,
                ),
            )
        )
        mean_time = Estimate(stats.mean_exit_time, stats.exit_time_stderr)
        results = {
            "mean_exit_time": _estimate(mean_time),
            "scaled_exit_time": mean_time.value / p.epsilon,
            "predicted_scaled_exit_time": 1.0 / (2.0 * rate),
            "histogram": {_cell_label(u): m for u, m in histogram.items()},
            "multi_cluster_fraction": stats.multi_cluster_fraction,
            "total_split_rate": _estimate(estimates.total_rate),
            "theta": {
                f"{k}:{l}": _estimate(e)
                for (k, l), e in sorted(estimates.entries.items())  # noqa: E741
            },
            "overflow": stats.overflow,
            "max_jitter": stats.max_jitter,
            "completed": stats.completed,
            "dt": dt,
            "max_steps": max_steps,
            "cluster_gap": experiment.cluster_gap,
        }
        if p.n_points == 2:
            results["exact_mean_exit_time"] = two_point_mean_exit_time(scaled_model, p.epsilon)
        heuristic = heuristic_theta(
            p.n_points,
            scaled_model.a,
            scaled_model.b,
            p.heuristic_samples,
            substream(self.ctx.seed, "heuristic"),
        )
        results["heuristic_theta"] = {
            f"{k}:{l}": _estimate(e) for (k, l), e in sorted(heuristic.items())  # noqa: E741
        }
        overflow_fraction = stats.overflow / p.replicas
        max_jitter = stats.max_jitter
        if p.schedule_n or p.schedule_epsilon:
            schedule = self._exit_schedule(p, scaled_model, rate)
            results["schedule"] = [
                {
                    "n": e.n,
                    "epsilon": e.epsilon,
                    "completed": e.stats.completed,
                    "overflow": e.stats.overflow,
                    "total_split_rate": (
                        _estimate(e.estimates.total_rate) if e.estimates else None
                    ),
                    "theta": (
                        {
                            f"{k}:{l}": _estimate(v)
                            for (k, l), v in sorted(e.estimates.entries.items())  # noqa: E741
                        }
                        if e.estimates
                        else None
                    ),
                }
                for e in schedule.entries
            ]
            results["plateau"] = {
                f"{k}:{l}": {"value": f.value, "stderr": f.stderr, "used": f.used}
                for (k, l), f in sorted(schedule.plateau.items())  # noqa: E741
            }
            if schedule.total is not None:
                results["plateau_total_split_rate"] = {
                    "value": schedule.total.value,
                    "stderr": schedule.total.stderr,
                    "used": schedule.total.used,
                }
            schedule_rows = [
                (e.n, e.epsilon, k, l, v.value, v.stderr, family.get(k, l))
                for e in schedule.entries
                if e.estimates
                for (k, l), v in sorted(e.estimates.entries.items())  # noqa: E741
            ]
            artifacts.append(
                (
                    "csv",
                    write_csv(
                        self.out / "exits_schedule.csv",
                        "exit_schedule",
                        ["n", "epsilon", "k", "l", "estimate", "stderr", "quadrature"],
                        schedule_rows,
                    ),
                )
            )
            overflow_fraction = max(
                [overflow_fraction] + [e.stats.overflow / p.replicas for e in schedule.entries]
            )
            max_jitter = max([max_jitter] + [e.stats.max_jitter for e in schedule.entries])
        diag = RunDiagnostics(
            overflow_fraction=overflow_fraction,
            step_resolution=dt * (scaled_model.n * scaled_model.a) ** 2,
            multi_cluster_fraction=stats.multi_cluster_fraction,
            max_jitter=max_jitter,
        )
        return RunOutput(results=results, diagnostics=diag, artifacts=artifacts)

    def _exit_schedule(self, p, scaled_model: ScaledModel, rate: float):
        """Exit runs over the (n, epsilon) pairs of schedule_n and schedule_epsilon.

        A list given alone is paired with the fixed n or epsilon.
        """
        ns = list(p.schedule_n or [])
        epsilons = list(p.schedule_epsilon or [])
        if ns and epsilons and len(ns) != len(epsilons):
            raise ConfigError(
                f"schedule_n has {len(ns)} entries and schedule_epsilon {len(epsilons)}",
                key="schedule_epsilon",
            )
        ns = ns or [p.n] * len(epsilons)
        epsilons = epsilons or [p.epsilon] * len(ns)
        if any(n < 1 for n in ns) or any(e <= 0 for e in epsilons):
            raise ConfigError("schedule entries need n >= 1 and epsilon > 0", key="schedule_n")
        experiments = [
            self._exit_experiment(p, scaled(scaled_model.base, n, scaled_model.b), epsilon, rate)
            for n, epsilon in zip(ns, epsilons)
        ]
        return run_exit_schedule(experiments, workers=self.ctx.workers)

    def _run_radial(self, p) -> RunOutput:
        r_max = p.r_max or RADIAL_REACH * p.b / p.a
        tables, predictions, rows = [], [], []
        results: dict = {"r_max": r_max}
        for n_points in p.n_points:
            table = radial_f0(n_points, p.a, p.b, r_max, grid=p.grid)
            slope = asymptotic_slope(table)
            prediction = asymptotic_prediction(n_points, p.a, p.b)
            tables.append(table)
            predictions.append(prediction)
            rows.extend((n_points, r, f) for r, f in zip(table.r, table.f))
            results[str(n_points)] = {
                "gamma": gamma_const(n_points),
                "asymptotic_slope": slope,
                "predicted_slope": prediction,
                "relative_error": abs(slope - prediction) / prediction,
                "f0_over_r": float(table.f[-1] / table.r[-1]),
            }
        table_path = write_csv(self.out / "radial.csv", "radial", ["n_points", "r", "f0"], rows)
        plot = plot_radial(
            self.out / "radial.svg",
            tables,
            predictions,
            deterministic=self.ctx.config.deterministic,
        )
        return RunOutput(results=results, artifacts=[("csv", table_path), ("svg", plot)])

    def _run_ballcheck(self, p) -> RunOutput:
        check = ball_exit_time_check(
            p.n_points,
            p.a,
            p.b,
            p.n,
            p.epsilon,
            p.replicas,
            substream(self.ctx.seed, "ballcheck"),
            dt=p.dt,
        )
        results = to_jsonable(check)
        if check.mean_exit_time is not None:
            results["relative_error"] = (
                abs(check.mean_exit_time.value - check.predicted_exact) / check.predicted_exact
            )
        diag = RunDiagnostics(
            overflow_fraction=check.overflow / p.replicas, max_jitter=check.max_jitter
        )
        return RunOutput(results=results, diagnostics=diag)

    def _run_coalesce(self, p) -> RunOutput:
        radii = list(p.r) if p.r else [p.R * ratio for ratio in SPLIT_RATIOS]
        fn = functools.partial(
            _splitting_task, p.R, p.trials, p.method, p.tolerance, p.dt, self.ctx.seed
        )
        estimates = map_blocks(fn, list(enumerate(radii)), self.ctx.workers)
        ratios = [r / p.R for r in radii]
        rows = [(q, r, e.value, e.stderr) for q, r, e in zip(ratios, radii, estimates)]
        table = write_csv(
            self.out / "coalesce.csv", "splitting", ["ratio", "r", "estimate", "stderr"], rows
        )
        results: dict = {
            "method": p.method,
            "trials": p.trials,
            "expected_exponent": SPLIT_EXPONENT,
            "estimates": {f"{q:.17g}": _estimate(e) for q, e in zip(ratios, estimates)},
        }
        if sum(e.value > 0 for e in estimates) >= 2:
            fit = fit_exponent(ratios, [e.value for e in estimates], [e.stderr for e in estimates])
            results.update(
                slope=fit.slope, slope_stderr=fit.slope_stderr, intercept=fit.intercept
            )
        return RunOutput(results=results, artifacts=[("csv", table)])

    def _kernel(self, mode: str, p, scaled_model: ScaledModel, length: float, x0: float, seed):
        if mode == "spde":
            start = initial_point(p.cells, length, x0)
            return start, spde_evolve(
                start, scaled_model, p.t, dt=p.dt, field_seed=seed, features=p.fourier_features
            )
        kernel = filter_kernel(
            scaled_model,
            x0,
            p.t,
            p.particles,
            features=p.fourier_features,
            seed=self.ctx.seed,
            field_seed=seed,
            domain_length=length,
            cells=p.cells,
            dt=p.dt,
        )
        return None, kernel

    def _run_kernel(self, p) -> RunOutput:
        scaled_model = build_scaled(p)
        length = p.domain_length or default_domain_length(scaled_model)
        x0 = p.x0 if p.x0 is not None else length / 2.0
        field_seed = p.field_seed if p.field_seed is not None else self.ctx.seed
        start, kernel = self._kernel(p.mode, p, scaled_model, length, x0, field_seed)
        fields = {p.mode: kernel}
        stats = density_stats(kernel)
        results: dict = {
            "mode": p.mode,
            "domain_length": length,
            "x0": x0,
            "field_seed": field_seed,
            "t": kernel.t,
            "mass": kernel.mass,
            "density_stats": stats,
            "negative_fraction": kernel.metadata.get("negative_fraction", 0.0),
        }
        if p.cross_check:
            other = "filter" if p.mode == "spde" else "spde"
            _, fields[other] = self._kernel(other, p, scaled_model, length, x0, field_seed)
            results["cross_check"] = {
                "mode": other,
                "correlation": float(np.corrcoef(kernel.values, fields[other].values)[0, 1]),
            }
        if p.compare_seeds:
            summaries = concentration_comparison(
                CONCENTRATION_PARAMS,
                range(p.compare_seeds),
                t=p.t,
                n=p.n,
                mode=p.mode,
                cells=p.cells,
                features=p.fourier_features,
                particles=p.particles,
                workers=self.ctx.workers,
            )
            results["concentration"] = [
                {
                    "a": s.a,
                    "b": s.b,
                    "median_max_mass": s.median_max_mass,
                    "median_entropy": s.median_entropy,
                    "median_support_fraction": s.median_support_fraction,
                }
                for s in summaries
            ]
        labels = sorted(fields)
        rows = [
            (y, *[fields[label].values[i] for label in labels])
            for i, y in enumerate(kernel.centers)
        ]
        snapshots = [start, kernel] if start is not None else [kernel]
        artifacts = [
            ("csv", write_csv(self.out / "kernel.csv", "kernel", ["y", *labels], rows)),
            (
                "binary",
                write_kernel_binary(
                    self.out / "kernel.bin", snapshots, kernel.metadata["dt"], field_seed
                ),
            ),
            (
                "svg",
                plot_kernels(
                    self.out / "kernel.svg", fields, deterministic=self.ctx.config.deterministic
                ),
            ),
        ]
        diag = RunDiagnostics(
            finite=bool(np.isfinite(kernel.values).all()),
            negative_fraction=results["negative_fraction"],
        )
        return RunOutput(results=results, diagnostics=diag, artifacts=artifacts)


class RunOrchestrator:
    """Runs one resolved configuration and records it in the ledger.

    Thin layer that:
    - Derives run identity and output directory
    - Delegates to RunProcessor
    - Writes summary.json (or error.json) and records artifacts
    - Maps failures to exit statuses
    """

    def __init__(self, output_dir: Path):
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.db_path = ledger_path(self.output_dir)
        init_db(self.db_path)

    def build_context(self, config: RunConfig) -> RunContext:
        params = config.params.model_dump(mode="json")
        config_hash = compute_config_hash(config.subcommand, params)
        run_id = compute_run_id(config.subcommand, config_hash, config.seed)
        return RunContext(
            run_id=run_id,
            config_hash=config_hash,
            config=config,
            run_output_dir=self.output_dir / "runs" / run_id,
        )

    def _config_record(self, ctx: RunContext) -> dict:
        return {
            "subcommand": ctx.config.subcommand,
            "params": ctx.params.model_dump(mode="json"),
            "seed": ctx.seed,
        }

    def run(self, config: RunConfig) -> int:
        """Execute the run; returns the process exit status."""
        ctx = self.build_context(config)
        error_file = ctx.run_output_dir / "error.json"
        error_file.unlink(missing_ok=True)
        record = self._config_record(ctx)
        with get_db_session(self.db_path) as session:
            repo.upsert_run(
                session,
                RunEntity(
                    run_id=ctx.run_id,
                    subcommand=config.subcommand,
                    config_hash=ctx.config_hash,
                    config_json=json.dumps(record, sort_keys=True),
                    seed=config.seed,
                    workers=config.workers,
                    status="queued",
                ),
            )
            repo.set_run_started(session, ctx.run_id)
        logger.info("run %s (%s) started", ctx.run_id[:12], config.subcommand)

        try:
            output = RunProcessor(ctx).execute()
            status = compute_status_badge(output.diagnostics)
            summary = RunSummary(
                subcommand=config.subcommand,
                run_id=ctx.run_id,
                config_hash=ctx.config_hash,
                config=record,
                seed=config.seed,
                code_version=__version__,
                psi_kind=getattr(ctx.params, "psi", "gaussian"),
                status_badge=status.badge,
                reasons=status.reasons,
                results=to_jsonable(output.results),
                artifacts=sorted(path.name for _, path in output.artifacts),
            )
            summary_path = write_json(ctx.run_output_dir / "summary.json", summary.model_dump())
            with get_db_session(self.db_path) as session:
                for kind, path in [*output.artifacts, ("json", summary_path)]:
                    repo.create_artifact(
                        session,
                        ArtifactEntity(
                            artifact_id=str(uuid.uuid4()),
                            run_id=ctx.run_id,
                            kind=kind,
                            path=str(path),
                            sha256=sha256_file(path),
                        ),
                    )
                repo.update_run_status(
                    session,
                    ctx.run_id,
                    "succeeded",
                    status_badge=status.badge,
                    reasons_json=json.dumps(status.reasons),
                )
                repo.set_run_ended(session, ctx.run_id)
            logger.info("run %s succeeded (%s)", ctx.run_id[:12], status.badge)
            return 0

        except Exception as e:
            logger.error("run %s failed: %s: %s", ctx.run_id[:12], type(e).__name__, e)
            write_json(
                error_file,
                {
                    "run_id": ctx.run_id,
                    "config": record,
                    "error_code": type(e).__name__,
                    "error_detail": str(e),
                },
            )
            with get_db_session(self.db_path) as session:
                repo.update_run_status(
                    session,
                    ctx.run_id,
                    "failed",
                    error_code=type(e).__name__,
                    error_detail=str(e),
                )
                repo.set_run_ended(session, ctx.run_id)
            if isinstance(e, ConfigError):
                return EXIT_CODE_CONFIG_ERROR
            return EXIT_CODE_MODULE_ERROR
