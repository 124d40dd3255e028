"""Tests for covariance functions, speed measures and field synthesis."""

import math

import numpy as np
import pytest

from stickyflows.covariance import (
    FieldStream,
    curvature_check,
    field_values,
    gaussian,
    grid_values,
    psi,
    sample_field,
    scaled,
    speed_density,
    speed_measure_mass,
    tabulated,
)
from stickyflows.errors import ConfigError, InvariantViolation, UnsupportedKindError
from stickyflows.models.domain import FourierField


def gaussian_table(nodes: int = 3101, end: float = 6.2):
    """exp(-x^2) on a grid whose nodes include every PSD check spacing."""
    xs = np.linspace(0.0, end, nodes)
    return xs, np.exp(-(xs**2))


class TestGaussianPsi:
    """Tests for the default covariance."""

    def test_value_at_origin(self):
        assert psi(gaussian(2.0), 0.0) == 1.0

    def test_known_value(self):
        assert psi(gaussian(2.0), 0.5) == pytest.approx(math.exp(-1.0), rel=1e-15)

    def test_even(self):
        xs = np.linspace(-3, 3, 13)
        np.testing.assert_array_equal(psi(gaussian(1.5), xs), psi(gaussian(1.5), -xs))

    def test_curvature_limit_holds(self):
        assert curvature_check(gaussian(1.0), np.linspace(1e-4, 0.1, 50)) <= 0

    def test_nonpositive_a_rejected(self):
        with pytest.raises(InvariantViolation):
            gaussian(0.0)


class TestTabulatedPsi:
    """Tests for user-tabulated covariance functions."""

    def test_matches_gaussian_on_fine_grid(self):
        model = tabulated(*gaussian_table())
        assert model.a == pytest.approx(1.0, rel=1e-5)
        assert psi(model, 0.7) == pytest.approx(math.exp(-0.49), abs=1e-5)

    def test_even_extension_and_zero_tail(self):
        model = tabulated(*gaussian_table())
        assert psi(model, -0.7) == psi(model, 0.7)
        assert psi(model, 10.0) == 0.0

    def test_psi_at_origin_must_be_one(self):
        xs, values = gaussian_table()
        with pytest.raises(InvariantViolation):
            tabulated(xs, 0.9 * values)

    def test_table_must_decay(self):
        xs = np.linspace(0.0, 1.0, 101)
        with pytest.raises(InvariantViolation):
            tabulated(xs, np.exp(-xs**2))

    def test_grid_must_start_at_zero(self):
        xs = np.linspace(0.1, 6.0, 601)
        with pytest.raises(InvariantViolation):
            tabulated(xs, np.exp(-xs**2))


class TestScaledModel:
    """Tests for the scaled covariance and the speed measure."""

    def test_n_must_be_positive(self):
        with pytest.raises(InvariantViolation, match="n must be ≥ 1"):
            scaled(gaussian(1.0), 0, 1.0)

    def test_speed_density_formula(self):
        model = scaled(gaussian(1.0), 4, 1.0)
        expected = 1.0 / (1.0 + 1.0 / 16.0 - math.exp(-1.0))
        assert speed_density(model, 0.25) == pytest.approx(expected, rel=1e-14)

    def test_speed_density_peak(self):
        model = scaled(gaussian(1.0), 10, 2.0)
        assert speed_density(model, 0.0) == pytest.approx(100.0 / 4.0)

    def test_speed_mass_limit(self):
        """Mass on [-1, 1] tends to 2 + pi / (a b)."""
        model = scaled(gaussian(1.0), 10_000, 1.0)
        assert speed_measure_mass(model, 1.0) == pytest.approx(2.0 + math.pi, rel=1e-3)

    def test_speed_mass_scales_with_ab(self):
        model = scaled(gaussian(2.0), 10_000, 0.5)
        assert speed_measure_mass(model, 1.0) == pytest.approx(2.0 + math.pi, rel=1e-3)


class TestFieldSynthesis:
    """Tests for the random-Fourier driving field."""

    def test_covariance_matches_psi(self, rng):
        model = scaled(gaussian(1.0), 2, 1.0)
        points = np.array([0.0, 0.3])
        draws = np.array(
            [field_values(sample_field(model, 16, rng), points) for _ in range(10_000)]
        )
        cov = float(np.mean(draws[:, 0] * draws[:, 1]))
        var = float(np.mean(draws[:, 0] ** 2))
        assert cov == pytest.approx(psi(gaussian(1.0), 0.6), abs=0.06)
        assert var == pytest.approx(1.0, abs=0.06)

    def test_periodic_wavenumbers(self, rng):
        model = scaled(gaussian(1.0), 3, 1.0)
        field = sample_field(model, 64, rng, period=5.0)
        x = np.linspace(0.0, 4.0, 9)
        np.testing.assert_allclose(field_values(field, x), field_values(field, x + 5.0), atol=1e-9)

    def test_tabulated_unsupported(self):
        model = scaled(tabulated(*gaussian_table()), 1, 1.0)
        with pytest.raises(UnsupportedKindError):
            sample_field(model, 8, np.random.default_rng(0))

    def test_streams_with_same_seed_agree(self):
        model = scaled(gaussian(1.0), 2, 1.0)
        x = np.linspace(-1, 1, 5)
        first = FieldStream(model, 32, np.random.default_rng(5))
        second = FieldStream(model, 32, np.random.default_rng(5))
        for _ in range(3):
            np.testing.assert_array_equal(first.increment(x, 0.01), second.increment(x, 0.01))
        assert first.steps_drawn == 3

    @pytest.mark.parametrize("cells", [16, 128])
    def test_grid_values_match_direct_evaluation(self, rng, cells):
        model = scaled(gaussian(20.0), 1, 0.375)
        field = sample_field(model, 64, rng, period=1.0)
        faces = np.arange(cells) / cells
        np.testing.assert_allclose(
            grid_values(field, cells, 1.0), field_values(field, faces), atol=1e-10
        )

    def test_batch_rows_are_fields(self, rng):
        model = scaled(gaussian(1.0), 2, 1.0)
        batch = sample_field(model, 8, rng, size=3)
        assert batch.wavenumbers.shape == (3, 8)
        assert batch.count == 8
        x = np.array([[0.0, 0.1], [0.2, 0.3], [0.4, 0.5]])
        values = field_values(batch, x)
        for r in range(3):
            row = FourierField(
                wavenumbers=batch.wavenumbers[r],
                cos_amplitudes=batch.cos_amplitudes[r],
                sin_amplitudes=batch.sin_amplitudes[r],
            )
            np.testing.assert_allclose(values[r], field_values(row, x[r]), atol=1e-12)

    def test_grid_increment_needs_period(self):
        stream = FieldStream(scaled(gaussian(1.0), 1, 1.0), 8, np.random.default_rng(0))
        with pytest.raises(ConfigError):
            stream.grid_increment(16, 0.01)
