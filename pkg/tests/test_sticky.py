"""Tests for the reference sticky Brownian motion."""

import math

import numpy as np
import pytest

from stickyflows.errors import ConfigError
from stickyflows.models.domain import StickyParams
from stickyflows.sticky import occupation_statistics, simulate_sticky


def params(theta=1.0, z0=0.0, horizon=1.0, dt=1e-3, seed=0, variance_rate=2.0):
    return StickyParams(
        theta=theta, z0=z0, horizon=horizon, dt=dt, seed=seed, variance_rate=variance_rate
    )


class TestReferencePath:
    """Pathwise bookkeeping of the time change."""

    def test_flags_mean_exactly_zero(self):
        path = simulate_sticky(params(), replicas=8)
        values = path.states[:, :, 0]
        assert path.at_zero.any()
        assert np.all(values[path.at_zero] == 0.0)

    def test_time_at_zero_within_horizon(self):
        path = simulate_sticky(params(), replicas=8)
        occupied = path.metadata["time_at_zero"]
        assert np.all(occupied >= 0.0)
        assert np.all(occupied <= 1.0 + 1e-12)

    def test_same_seed_same_path(self):
        first = simulate_sticky(params(seed=4), replicas=3)
        second = simulate_sticky(params(seed=4), replicas=3)
        np.testing.assert_array_equal(first.states, second.states)

    def test_invalid_theta(self):
        with pytest.raises(ConfigError):
            simulate_sticky(params(theta=0.0))


class TestLaw:
    """Martingale identities of sticky Brownian motion."""

    def test_mean_preserved(self):
        path = simulate_sticky(params(z0=0.3, horizon=0.5), replicas=2000)
        final = path.states[:, -1, 0]
        stderr = float(np.std(final) / math.sqrt(final.size))
        assert abs(float(np.mean(final)) - 0.3) <= 4 * stderr

    def test_square_compensated_by_moving_time(self):
        """E[Z_T^2] = rate * (T - E[time at zero]) from a start at 0."""
        for rate in (1.0, 2.0):
            path = simulate_sticky(params(theta=2.0, variance_rate=rate), replicas=4000)
            lhs = path.states[:, -1, 0] ** 2 - rate * (1.0 - path.metadata["time_at_zero"])
            stderr = float(np.std(lhs) / math.sqrt(lhs.size))
            assert abs(float(np.mean(lhs))) <= 4 * stderr

    def test_default_rate_is_pair_convention(self):
        assert StickyParams(theta=1.0, z0=0.0, horizon=1.0, dt=1e-3, seed=0).variance_rate == 2.0

    def test_distance_compensated_by_sticky_time(self):
        """E[|Z_T|] = 2 theta E[time at zero] from a start at 0 at rate 2."""
        sticky = StickyParams(theta=1.5, z0=0.0, horizon=1.0, dt=1e-3, seed=11)
        path = simulate_sticky(sticky, replicas=4000)
        lhs = np.abs(path.states[:, -1, 0]) - 2.0 * 1.5 * path.metadata["time_at_zero"]
        stderr = float(np.std(lhs) / math.sqrt(lhs.size))
        assert abs(float(np.mean(lhs))) <= 4 * stderr

    def test_stickier_means_more_time_at_zero(self):
        sticky = simulate_sticky(params(theta=0.5), replicas=500)
        loose = simulate_sticky(params(theta=20.0), replicas=500)
        assert np.mean(sticky.metadata["time_at_zero"]) > np.mean(loose.metadata["time_at_zero"])


class TestOccupation:
    """Tests for band occupation statistics."""

    def test_infinite_band_is_horizon(self):
        path = simulate_sticky(params(), replicas=4)
        band, _ = occupation_statistics(path, math.inf)
        np.testing.assert_allclose(band, 1.0)

    def test_zero_band_uses_exact_time(self):
        path = simulate_sticky(params(), replicas=4)
        band, zero = occupation_statistics(path, 0.0)
        np.testing.assert_array_equal(band, path.metadata["time_at_zero"])
        np.testing.assert_allclose(zero, band / 1.0)

    def test_band_grows_with_delta(self):
        path = simulate_sticky(params(), replicas=50)
        narrow, _ = occupation_statistics(path, 0.01)
        wide, _ = occupation_statistics(path, 0.5)
        assert np.all(wide >= narrow)

    def test_negative_delta(self):
        with pytest.raises(ConfigError):
            occupation_statistics(simulate_sticky(params()), -1.0)
