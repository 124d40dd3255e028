"""Exception types raised across stickyflows.

All errors derive from ValueError so callers that only know about
bad-input semantics keep working. The run orchestrator records
``type(e).__name__`` as the ledger error code.
"""

from __future__ import annotations


class StickyFlowsError(ValueError):
    """Base class for all stickyflows errors."""


class ConfigError(StickyFlowsError):
    """Invalid or incomplete run configuration.

    Attributes:
        key: The offending configuration key, if known.
    """

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


class QuadratureError(StickyFlowsError):
    """Quadrature did not reach the requested tolerance."""

    def __init__(self, message: str, achieved_bound: float):
        super().__init__(f"{message} (achieved bound {achieved_bound:.3e})")
        self.achieved_bound = achieved_bound


class InvariantViolation(StickyFlowsError):
    """A computed object violates one of its invariants."""

    def __init__(self, message: str, entry: object = None):
        super().__init__(message)
        self.entry = entry


class UnsupportedKindError(StickyFlowsError):
    """Operation not available for this covariance kind."""


class FactorizationError(StickyFlowsError):
    """Cholesky factorization failed even at maximum jitter."""

    def __init__(self, message: str, jitter: float):
        super().__init__(message)
        self.jitter = jitter


class NonFiniteStateError(StickyFlowsError):
    """A simulated state became NaN or infinite."""

    def __init__(self, message: str, step: int):
        super().__init__(f"{message} at step {step}")
        self.step = step


class StepBudgetExceeded(StickyFlowsError):
    """A simulation needed more steps than its budget allows."""


class CFLViolation(StickyFlowsError):
    """Explicit time step is unstable for the requested grid."""


class MissingThetaEntry(StickyFlowsError, KeyError):
    """A theta family does not contain a required (k, l) entry."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "missing theta entry"


class DegenerateHistogramError(StickyFlowsError):
    """Exit histogram has no usable two-cluster mass."""


class IntegrationError(StickyFlowsError):
    """ODE integration stopped before reaching the end of the grid."""
