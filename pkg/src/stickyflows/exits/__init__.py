"""Exit statistics near the diagonal and the radial ODE."""

from stickyflows.exits.ball import ball_exit_time_check
from stickyflows.exits.experiment import (
    estimate_theta,
    fit_plateau,
    heuristic_theta,
    outer_exit_probability,
    run_exit_schedule,
    run_exits,
    two_point_mean_exit_time,
)
from stickyflows.exits.radial import asymptotic_slope, gamma_const, radial_f0

__all__ = [
    "asymptotic_slope",
    "ball_exit_time_check",
    "estimate_theta",
    "fit_plateau",
    "gamma_const",
    "heuristic_theta",
    "outer_exit_probability",
    "radial_f0",
    "run_exit_schedule",
    "run_exits",
    "two_point_mean_exit_time",
]
