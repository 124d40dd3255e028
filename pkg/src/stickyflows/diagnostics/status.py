"""Status badge derivation from run diagnostics.

- reject: the run cannot be trusted (non-finite states, step-budget
  overflow above 5% of replicas)
- flagged: review signals (coarse dt, clipped densities, multi-cluster
  exits, factorization jitter)
- pass: not reject and not flagged
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

# Reject thresholds (hard failure)
REJECT_OVERFLOW_CEILING = 0.05  # Above this fraction of replicas = reject

# Flag thresholds (review)
FLAG_STEP_RESOLUTION_CEILING = 0.1  # dt n^2 a^2 above this = flagged
FLAG_NEGATIVE_FRACTION_CEILING = 1e-3  # Clipped cell-steps at or above this = flagged
FLAG_MULTI_CLUSTER_CEILING = 0.02  # "More than two clusters" at or above this = flagged

StatusBadge = Literal["pass", "flagged", "reject"]


@dataclass
class StatusResult:
    """Result of status badge computation.

    Attributes:
        badge: One of 'pass', 'flagged', or 'reject'.
        reasons: List of human-readable reason strings.
    """

    badge: StatusBadge
    reasons: list[str] = field(default_factory=list)


@dataclass
class RunDiagnostics:
    """Soft and hard signals collected while a run executes."""

    finite: bool = True
    overflow_fraction: float = 0.0
    step_resolution: float = 0.0
    negative_fraction: float = 0.0
    multi_cluster_fraction: float = 0.0
    max_jitter: float = 0.0


def compute_status_badge(diag: RunDiagnostics) -> StatusResult:
    """Compute status badge and reasons from run diagnostics."""
    reasons: list[str] = []
    has_reject = False
    has_flag = False

    # Reject conditions (hard failure)
    if not diag.finite:
        reasons.append("non-finite state")
        has_reject = True

    if diag.overflow_fraction > REJECT_OVERFLOW_CEILING:
        reasons.append(
            f"overflow_fraction={diag.overflow_fraction:.3f} > {REJECT_OVERFLOW_CEILING}"
        )
        has_reject = True

    # Flag conditions (review)
    if diag.step_resolution > FLAG_STEP_RESOLUTION_CEILING:
        reasons.append(
            f"step_resolution={diag.step_resolution:.3f} > {FLAG_STEP_RESOLUTION_CEILING}"
        )
        has_flag = True

    if diag.negative_fraction >= FLAG_NEGATIVE_FRACTION_CEILING:
        reasons.append(
            f"negative_fraction={diag.negative_fraction:.4f} >= {FLAG_NEGATIVE_FRACTION_CEILING}"
        )
        has_flag = True

    if diag.multi_cluster_fraction >= FLAG_MULTI_CLUSTER_CEILING:
        reasons.append(
            f"multi_cluster_fraction={diag.multi_cluster_fraction:.3f} "
            f">= {FLAG_MULTI_CLUSTER_CEILING}"
        )
        has_flag = True

    if diag.max_jitter > 0:
        reasons.append(f"factorization jitter {diag.max_jitter:.3e} used")
        has_flag = True

    # Determine badge (reject > flagged > pass)
    if has_reject:
        badge: StatusBadge = "reject"
    elif has_flag:
        badge = "flagged"
    else:
        badge = "pass"

    return StatusResult(badge=badge, reasons=reasons)
