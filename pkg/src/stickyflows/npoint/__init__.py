"""Prelimit N-point motion and the pair difference time change."""

from stickyflows.npoint.dynamics import factor_covariance, step_covariance
from stickyflows.npoint.simulate import (
    NPointStepper,
    euler_maruyama,
    simulate,
    simulate_ensemble,
)
from stickyflows.npoint.timechange import two_point_difference_timechange

__all__ = [
    "NPointStepper",
    "euler_maruyama",
    "factor_covariance",
    "simulate",
    "simulate_ensemble",
    "step_covariance",
    "two_point_difference_timechange",
]
