"""Tests for the prelimit N-point motion."""

import numpy as np
import pytest

from stickyflows.core.identity import substream
from stickyflows.covariance import gaussian, scaled
from stickyflows.errors import ConfigError
from stickyflows.models.domain import SimConfig, StickyParams
from stickyflows.npoint import (
    euler_maruyama,
    factor_covariance,
    simulate,
    simulate_ensemble,
    step_covariance,
    two_point_difference_timechange,
)
from stickyflows.npoint.simulate import NPointStepper, concatenate_paths, simulate_block
from stickyflows.sticky import occupation_statistics, simulate_sticky


def make_config(x0, n=1, b=1.0, dt=0.01, horizon=0.1, seed=0, driver="dense"):
    return SimConfig(
        n_points=len(x0),
        scaled=scaled(gaussian(1.0), n, b),
        x0=tuple(x0),
        dt=dt,
        horizon=horizon,
        seed=seed,
        driver=driver,
        fourier_features=64,
    )


class TestCovariance:
    """Tests for Sigma(x) and its factorization."""

    def test_coincident_pair(self):
        sigma = step_covariance(scaled(gaussian(1.0), 1, 1.0), [0.0, 0.0])
        np.testing.assert_allclose(sigma, [[2.0, 1.0], [1.0, 2.0]])

    def test_factor_reconstructs(self):
        sigma = step_covariance(scaled(gaussian(1.0), 3, 0.5), [0.0, 0.1, 0.4])
        factor = factor_covariance(sigma)
        assert factor.jitter == 0.0
        np.testing.assert_allclose(factor.factor @ factor.factor.T, sigma, atol=1e-14)


class TestEquivariance:
    """Shifts and permutations commute with the dense driver."""

    def test_shift(self, rng):
        normals = rng.standard_normal((20, 3))
        base = euler_maruyama(make_config([0.0, 0.25, 0.5]), normals)
        shifted = euler_maruyama(make_config([8.0, 8.25, 8.5]), normals)
        np.testing.assert_array_equal(base, shifted)

    def test_permutation(self, rng):
        normals = rng.standard_normal((20, 3))
        perm = [2, 0, 1]
        x0 = np.array([0.0, 0.2, 0.5])
        base = euler_maruyama(make_config(x0), normals)
        permuted = euler_maruyama(make_config(x0[perm]), normals[:, perm])
        np.testing.assert_allclose(permuted, base[:, perm], atol=1e-12)

    def test_normals_need_dense_driver(self):
        with pytest.raises(ConfigError):
            euler_maruyama(make_config([0.0, 1.0], driver="fourier"), np.zeros((3, 2)))


class TestSimulation:
    """Statistical and bookkeeping checks."""

    def test_single_point_variance(self):
        config = make_config([0.0], dt=0.01, horizon=1.0)
        path = simulate(config, np.random.default_rng(1), replicas=2000)
        var = float(np.var(path.states[:, -1, 0]))
        assert var == pytest.approx(2.0, abs=0.25)

    def test_fourier_driver_variance(self):
        config = make_config([0.0], dt=0.02, horizon=1.0, driver="fourier")
        path = simulate(config, np.random.default_rng(2), replicas=2000)
        assert float(np.var(path.states[:, -1, 0])) == pytest.approx(2.0, abs=0.25)

    def test_ensemble_is_blockwise(self):
        config = make_config([0.0, 0.5], seed=9)
        ensemble = simulate_ensemble(config, 5, block_size=2, tag="unit")
        blocks = [
            simulate_block(config, size, substream(9, "unit", i))
            for i, size in enumerate([2, 2, 1])
        ]
        np.testing.assert_array_equal(ensemble.states, concatenate_paths(blocks).states)

    def test_record_every_keeps_endpoint(self):
        config = make_config([0.0, 0.5], horizon=0.1, dt=0.01)
        path = simulate_ensemble(config, 2, record_every=3)
        assert path.times.tolist() == pytest.approx([0.0, 0.03, 0.06, 0.09, 0.1])

    def test_coincident_start_needs_no_jitter(self):
        config = make_config([0.0, 0.0, 0.0], n=10, dt=1e-4, horizon=0.01)
        path = simulate(config, np.random.default_rng(3), replicas=50)
        assert path.metadata["max_jitter"] == 0.0

    @pytest.mark.parametrize("driver", ["dense", "fourier"])
    def test_pair_increment_covariance(self, driver):
        """One-step increments of a pair at separation s have covariance Sigma(0, s) dt."""
        config = make_config([0.0, 0.3], n=2, b=0.5, dt=0.25, driver=driver)
        replicas = 20000
        stepper = NPointStepper(config, replicas, np.random.default_rng(5))
        dx = stepper.increments(stepper.relative())
        expected = step_covariance(config.scaled, [0.0, 0.3]) * config.dt
        np.testing.assert_allclose(np.cov(dx.T), expected, atol=0.02)

    def test_invalid_dt(self):
        with pytest.raises(ConfigError):
            simulate(make_config([0.0], dt=-1.0), np.random.default_rng(0))


class TestTimeChange:
    """The pair difference built from a time-changed random walk."""

    def test_starts_at_z0_and_is_a_martingale(self, rng):
        model = scaled(gaussian(1.0), 1, 1.0)
        path = two_point_difference_timechange(model, 0.5, 0.1, 0.01, rng, replicas=400)
        assert np.all(path.states[:, 0, 0] == 0.5)
        final = path.states[:, -1, 0] - 0.5
        stderr = float(np.std(final) / np.sqrt(final.size))
        assert abs(float(np.mean(final))) <= 4 * stderr
        assert path.metadata["construction"] == "timechange"

    def test_band_occupation_matches_sticky_limit(self, rng):
        a, b, n = 1.0, 4.0, 30
        horizon, dt, replicas = 1.0, 1e-3, 1000
        delta = 0.2
        model = scaled(gaussian(a), n, b)
        path = two_point_difference_timechange(model, 0.0, horizon, dt, rng, replicas=replicas)
        prelimit = occupation_statistics(path, delta)[0]
        params = StickyParams(theta=a * b / np.pi, z0=0.0, horizon=horizon, dt=dt, seed=7)
        limit = occupation_statistics(simulate_sticky(params, replicas), delta)[0]
        stderr = np.hypot(np.std(prelimit), np.std(limit)) / np.sqrt(replicas)
        gap = abs(float(np.mean(prelimit) - np.mean(limit)))
        assert gap <= 4 * stderr + 0.1 * float(np.mean(limit))
