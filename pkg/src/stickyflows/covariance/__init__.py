"""Covariance functions psi, speed measures and the driving Gaussian field."""

from stickyflows.covariance.field import FieldStream, field_values, grid_values, sample_field
from stickyflows.covariance.psi import (
    curvature_check,
    gaussian,
    psi,
    scaled,
    speed_density,
    speed_measure_mass,
    tabulated,
    validate_model,
)

__all__ = [
    "FieldStream",
    "curvature_check",
    "field_values",
    "gaussian",
    "grid_values",
    "psi",
    "sample_field",
    "scaled",
    "speed_density",
    "speed_measure_mass",
    "tabulated",
    "validate_model",
]
