"""Tests for exit statistics near the diagonal and the radial ODE."""

import math

import numpy as np
import pytest

from stickyflows.covariance import gaussian, scaled
from stickyflows.errors import ConfigError
from stickyflows.exits import (
    asymptotic_slope,
    ball_exit_time_check,
    estimate_theta,
    fit_plateau,
    gamma_const,
    heuristic_theta,
    outer_exit_probability,
    radial_f0,
    run_exit_schedule,
    run_exits,
    two_point_mean_exit_time,
)
from stickyflows.exits.ball import kuiper_uniform
from stickyflows.exits.radial import asymptotic_prediction, radial_slope_closed_form
from stickyflows.models.domain import ExitExperiment, SimConfig
from stickyflows.theta import build_family


def experiment(x0=(0.0, 0.0), n=10, epsilon=0.1, replicas=400, seed=0):
    sim = SimConfig(
        n_points=len(x0),
        scaled=scaled(gaussian(1.0), n, 1.0),
        x0=tuple(x0),
        dt=0.05 / n**2,
        horizon=1.0,
        seed=seed,
    )
    return ExitExperiment(
        sim=sim, epsilon=epsilon, cluster_gap=epsilon / 50, replicas=replicas, max_steps=100_000
    )


class TestTwoPointExit:
    """Pair exits against the speed-measure formula."""

    def test_large_n_limit(self):
        model = scaled(gaussian(1.0), 10_000, 1.0)
        expected = 0.1**2 / 2 + 0.1 * math.pi / 2
        assert two_point_mean_exit_time(model, 0.1) == pytest.approx(expected, rel=1e-3)

    def test_simulated_mean_matches(self):
        exp = experiment()
        stats = run_exits(exp)
        exact = two_point_mean_exit_time(exp.sim.scaled, exp.epsilon)
        assert stats.overflow == 0
        assert abs(stats.mean_exit_time - exact) <= 4 * stats.exit_time_stderr + 0.05 * exact

    def test_pair_histogram_and_theta(self):
        stats = run_exits(experiment(replicas=200))
        assert set(stats.histogram) <= {(0,), (1,)}
        slice_ = estimate_theta(stats)
        assert set(slice_.entries) == {(1, 1)}
        assert slice_.entries[(1, 1)].value == pytest.approx(slice_.total_rate.value / 2, rel=0.3)

    def test_start_must_be_diagonal(self):
        with pytest.raises(ConfigError):
            run_exits(experiment(x0=(0.0, 0.01)))


class TestThreePointExit:
    """Exit cells of three points started together."""

    @pytest.fixture(scope="class")
    def stats(self):
        return run_exits(experiment(x0=(0.0, 0.0, 0.0), n=50, replicas=800, seed=3))

    def test_six_cells_equally_likely(self, stats):
        labels = [label for label in stats.cell_labels if label]
        assert len(labels) > stats.completed / 2
        cells = {label: labels.count(label) / len(labels) for label in set(labels)}
        assert set(cells) == {(0,), (1,), (2,), (0, 1), (0, 2), (1, 2)}
        bound = 4 * math.sqrt((1 / 6) * (5 / 6) / len(labels))
        for mass in cells.values():
            assert abs(mass - 1 / 6) <= bound

    def test_theta_one_two(self, stats):
        entries = estimate_theta(stats).entries
        lower, upper = entries[(1, 2)], entries[(2, 1)]
        assert abs(lower.value - upper.value) <= 4 * math.hypot(lower.stderr, upper.stderr)
        assert lower.value == pytest.approx(build_family(3, 1.0, 1.0).get(1, 2), rel=0.3)


class TestSchedule:
    """Sweeps over (n, epsilon) reduced by a plateau fit."""

    def test_plateau_over_pair_schedule(self):
        schedule = run_exit_schedule([experiment(n=5, replicas=200), experiment(replicas=200)])
        assert [e.n for e in schedule.entries] == [5, 10]
        assert all(e.estimates is not None for e in schedule.entries)
        assert set(schedule.plateau) == {(1, 1)}
        assert 1 <= schedule.plateau[(1, 1)].used <= 2
        assert schedule.total is not None

    def test_empty_schedule(self):
        with pytest.raises(ConfigError):
            run_exit_schedule([])

    def test_heuristic_pair_is_exact(self):
        heuristic = heuristic_theta(2, 1.0, 2.0, 50, np.random.default_rng(0))
        assert heuristic[(1, 1)].value == pytest.approx(2.0 / (2 * math.pi), rel=1e-12)

    def test_heuristic_matches_quadrature(self):
        heuristic = heuristic_theta(3, 1.0, 1.0, 20_000, np.random.default_rng(1))
        family = build_family(3, 1.0, 1.0)
        for (k, l), est in heuristic.items():  # noqa: E741
            assert abs(est.value - family.get(k, l)) <= 4 * est.stderr


class TestHelpers:
    """Plateau fits and the outer exit law."""

    def test_plateau_drops_coarse_outlier(self):
        fit = fit_plateau([5.0, 1.0, 1.01, 0.99], [0.01] * 4)
        assert fit.used == 3
        assert fit.value == pytest.approx(1.0, abs=0.01)

    def test_outer_exit(self):
        result = outer_exit_probability([0.0, 0.05, 0.02], 0.1)
        assert result.probability == pytest.approx(0.5)
        np.testing.assert_allclose(result.split_probabilities, [0.6, 0.4])

    def test_outer_exit_outside(self):
        with pytest.raises(ConfigError):
            outer_exit_probability([0.0, 0.2], 0.1)


class TestRadial:
    """The radial ODE for the mean ball exit time."""

    def test_series_near_origin(self):
        table = radial_f0(3, 1.0, 1.0, 0.01, grid=11)
        assert table.f[-1] == pytest.approx(0.01**2 / 2, rel=1e-3)

    def test_matches_closed_form_slope(self):
        table = radial_f0(4, 1.0, 1.0, 5.0, grid=101)
        expected = radial_slope_closed_form(4, 1.0, 1.0, 5.0)
        assert table.slope[-1] == pytest.approx(expected, rel=1e-6)

    def test_pair_closed_form(self):
        r = 2.0
        expected = math.sqrt(2.0) * math.atan(math.sqrt(2.0) * r)
        assert radial_slope_closed_form(2, 1.0, 1.0, r) == pytest.approx(expected, rel=1e-10)

    @pytest.mark.parametrize("n_points", [2, 3, 4])
    def test_asymptotic_slope(self, n_points):
        table = radial_f0(n_points, 1.0, 1.0, 50.0)
        assert asymptotic_slope(table) == pytest.approx(
            asymptotic_prediction(n_points, 1.0, 1.0), rel=1e-2
        )

    def test_gamma_shared_with_theta(self):
        assert gamma_const(3) == pytest.approx(math.sqrt(2 / math.pi) * 0.5 * math.sqrt(math.pi))


class TestBallCheck:
    """Exit from the small ball around the diagonal."""

    def test_skipped_off_diagonal(self):
        rng = np.random.default_rng(0)
        check = ball_exit_time_check(3, 1.0, 1.0, 10, 0.05, 10, rng, x0=[0, 1, 2])
        assert check.status == "skipped"

    def test_mean_exit_time(self):
        check = ball_exit_time_check(3, 1.0, 1.0, 10, 0.05, 300, np.random.default_rng(1))
        est = check.mean_exit_time
        assert check.status == "ok"
        exact = check.predicted_exact
        assert abs(est.value - exact) <= 4 * est.stderr + 0.1 * exact
        assert 0.0 <= check.kuiper_pvalue <= 1.0

    def test_kuiper(self):
        uniform = (np.arange(200) + 0.5) / 200
        _, p_uniform = kuiper_uniform(uniform)
        _, p_point = kuiper_uniform(np.full(200, 0.1))
        assert p_uniform > 0.5
        assert p_point < 1e-6
