"""Sticky parameters theta(k:l) by quadrature, Monte Carlo and nu-moments."""

from stickyflows.theta.family import build_family, check_family, consistency_residuals
from stickyflows.theta.montecarlo import gamma_const, theta_montecarlo, theta_sphere
from stickyflows.theta.quadrature import theta_quadrature
from stickyflows.theta.splitting import flow_speeds, splitting_density, theta_from_nu

__all__ = [
    "build_family",
    "check_family",
    "consistency_residuals",
    "flow_speeds",
    "gamma_const",
    "splitting_density",
    "theta_from_nu",
    "theta_montecarlo",
    "theta_quadrature",
    "theta_sphere",
]
