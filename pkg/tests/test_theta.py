"""Tests for the sticky parameters theta(k:l)."""

import math

import pytest

from stickyflows.errors import MissingThetaEntry
from stickyflows.theta import (
    build_family,
    consistency_residuals,
    flow_speeds,
    gamma_const,
    splitting_density,
    theta_from_nu,
    theta_montecarlo,
    theta_quadrature,
    theta_sphere,
)


class TestQuadrature:
    """Tests for the one-dimensional reduction."""

    def test_pair_closed_form(self):
        """theta(1:1) = ab / (2 pi)."""
        assert theta_quadrature(1, 1, 1.0, 1.0) == pytest.approx(1 / (2 * math.pi), abs=1e-12)

    def test_three_point_closed_form(self):
        """theta(2:1) = theta(1:2) = theta(1:1) / 2 by consistency and symmetry."""
        assert theta_quadrature(2, 1, 1.0, 1.0) == pytest.approx(1 / (4 * math.pi), abs=1e-12)

    def test_symmetry_is_exact(self):
        assert theta_quadrature(3, 2, 1.3, 0.7) == theta_quadrature(2, 3, 1.3, 0.7)

    def test_linear_in_ab(self):
        base = theta_quadrature(2, 2, 1.0, 1.0)
        assert theta_quadrature(2, 2, 2.0, 3.0) == pytest.approx(6.0 * base, rel=1e-12)

    def test_invalid_indices(self):
        with pytest.raises(ValueError):
            theta_quadrature(0, 2, 1.0, 1.0)


class TestAlternativeRoutes:
    """Monte Carlo, sphere and nu-moment routes agree with quadrature."""

    def test_nu_moments_match(self):
        for k, l in [(1, 1), (1, 3), (2, 2), (4, 1)]:  # noqa: E741
            assert theta_from_nu(k, l, 1.0, 1.0) == pytest.approx(
                theta_quadrature(k, l, 1.0, 1.0), abs=1e-11
            )

    def test_montecarlo_within_stderr(self, rng):
        est = theta_montecarlo(2, 2, 1.0, 1.0, 200_000, rng)
        exact = theta_quadrature(2, 2, 1.0, 1.0)
        assert abs(est.value - exact) <= 4 * est.stderr

    def test_sphere_pair(self, rng):
        est = theta_sphere(1, 1, 1.0, 1.0, 20_000, rng)
        assert est.value == pytest.approx(1 / (2 * math.pi), abs=4 * est.stderr + 1e-12)

    def test_gamma_for_pair(self):
        assert gamma_const(2) == pytest.approx(math.sqrt(2) / math.pi, rel=1e-14)


class TestFamily:
    """Tests for assembled theta families."""

    def test_consistency_residuals_vanish(self):
        family = build_family(8, 1.0, 1.0)
        assert max(abs(r) for r in consistency_residuals(family).values()) <= 1e-10

    def test_entry_count(self):
        family = build_family(5, 1.0, 1.0)
        assert len(family.values) == 10

    def test_missing_entry(self):
        family = build_family(3, 1.0, 1.0)
        with pytest.raises(MissingThetaEntry):
            family.get(2, 2)

    def test_nmax_too_small(self):
        with pytest.raises(ValueError):
            build_family(1, 1.0, 1.0)

    def test_montecarlo_family_passes_checks(self):
        family = build_family(4, 1.0, 1.0, method="montecarlo", samples=20_000, seed=3)
        assert family.method == "montecarlo"
        assert all(value >= 0 for value in family.values.values())

    def test_cell_probabilities_sum_to_one(self):
        family = build_family(5, 1.0, 1.0)
        total = sum(math.comb(5, k) * family.cell_probability(k, 5) for k in range(1, 5))
        assert total == pytest.approx(1.0, rel=1e-12)


class TestSplittingMeasure:
    """Tests for nu and the flow speeds."""

    def test_density_symmetric(self):
        assert splitting_density(0.2, 1.0, 1.0) == pytest.approx(
            splitting_density(0.8, 1.0, 1.0), rel=1e-12
        )

    def test_speeds_opposite_and_growing(self):
        right, left = flow_speeds(1.0, 1.0, 1e-2)
        assert left == pytest.approx(-right, rel=1e-9)
        wider, _ = flow_speeds(1.0, 1.0, 1e-4)
        assert wider > right > 0

    def test_invalid_cutoff(self):
        with pytest.raises(ValueError):
            flow_speeds(1.0, 1.0, 0.6)
