"""Tests for status badge derivation."""

from stickyflows.diagnostics.status import (
    FLAG_MULTI_CLUSTER_CEILING,
    FLAG_NEGATIVE_FRACTION_CEILING,
    FLAG_STEP_RESOLUTION_CEILING,
    REJECT_OVERFLOW_CEILING,
    RunDiagnostics,
    StatusResult,
    compute_status_badge,
)


class TestStatusBadgeRejectConditions:
    """Test reject (hard failure) conditions."""

    def test_non_finite_returns_reject(self):
        result = compute_status_badge(RunDiagnostics(finite=False))
        assert result.badge == "reject"
        assert "non-finite state" in result.reasons

    def test_overflow_above_ceiling_returns_reject(self):
        result = compute_status_badge(
            RunDiagnostics(overflow_fraction=REJECT_OVERFLOW_CEILING + 0.01)
        )
        assert result.badge == "reject"

    def test_overflow_at_ceiling_is_not_reject(self):
        result = compute_status_badge(RunDiagnostics(overflow_fraction=REJECT_OVERFLOW_CEILING))
        assert result.badge == "pass"

    def test_reject_wins_over_flag(self):
        result = compute_status_badge(
            RunDiagnostics(finite=False, step_resolution=FLAG_STEP_RESOLUTION_CEILING * 2)
        )
        assert result.badge == "reject"
        assert len(result.reasons) == 2


class TestStatusBadgeFlagConditions:
    """Test flagged (review) conditions."""

    def test_coarse_step_is_flagged(self):
        result = compute_status_badge(
            RunDiagnostics(step_resolution=FLAG_STEP_RESOLUTION_CEILING * 1.5)
        )
        assert result.badge == "flagged"

    def test_negative_fraction_at_ceiling_is_flagged(self):
        result = compute_status_badge(
            RunDiagnostics(negative_fraction=FLAG_NEGATIVE_FRACTION_CEILING)
        )
        assert result.badge == "flagged"

    def test_multi_cluster_is_flagged(self):
        result = compute_status_badge(
            RunDiagnostics(multi_cluster_fraction=FLAG_MULTI_CLUSTER_CEILING)
        )
        assert result.badge == "flagged"

    def test_jitter_is_flagged(self):
        result = compute_status_badge(RunDiagnostics(max_jitter=1e-12))
        assert result.badge == "flagged"
        assert "jitter" in result.reasons[0]


class TestStatusBadgePass:
    """Clean diagnostics."""

    def test_defaults_pass(self):
        result = compute_status_badge(RunDiagnostics())
        assert result == StatusResult(badge="pass", reasons=[])
