"""Radial part of the rescaled projected motion near the diagonal.

Inside B(epsilon/n) the projection onto R^N_0, sped up by n^2, behaves
like a diffusion whose radius has generator

    H_rad = (b^2/2 + a^2 r^2) d^2/dr^2 + ((N - 2) b^2 / (2 r)) d/dr.

f0 is the increasing solution of H_rad f0 = 1 with f0(0) = 0; it is the
mean time to reach radius r from 0 and grows like r / (gamma a b).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from stickyflows.errors import ConfigError, IntegrationError
from stickyflows.theta.montecarlo import gamma_const

__all__ = [
    "RadialTable",
    "asymptotic_slope",
    "gamma_const",
    "radial_f0",
    "radial_slope_closed_form",
]

SERIES_START = 1e-6


@dataclass(frozen=True)
class RadialTable:
    n_points: int
    a: float
    b: float
    r: np.ndarray
    f: np.ndarray
    slope: np.ndarray


def _check(n_points: int, a: float, b: float) -> None:
    if n_points < 2:
        raise ConfigError("N must be >= 2", key="N")
    if a <= 0 or b <= 0:
        raise ConfigError("a and b must be > 0", key="a")


def _rhs(n_points: int, a: float, b: float):
    def rhs(r, y):
        slope = y[1]
        drift = (n_points - 2) * b * b / (2.0 * r) * slope
        curvature = (1.0 - drift) / (b * b / 2.0 + a * a * r * r)
        return [slope, curvature]

    return rhs


def radial_f0(n_points: int, a: float, b: float, r_max: float, grid: int = 401) -> RadialTable:
    """Tabulate f0 on a uniform grid of [0, r_max].

    The origin is a regular singular point, so the integration starts at
    a small r0 from the series f0 = r^2 / ((N - 1) b^2) + O(r^4).

    Raises:
        IntegrationError: If the ODE solver fails before r_max.
    """
    _check(n_points, a, b)
    if r_max <= 0 or grid < 2:
        raise ConfigError("r_max must be > 0 and grid >= 2", key="r_max")
    r = np.linspace(0.0, r_max, grid)
    r0 = SERIES_START * b / a
    lead = 2.0 / ((n_points - 1) * b * b)
    sol = integrate.solve_ivp(
        _rhs(n_points, a, b),
        (r0, r_max),
        [0.5 * lead * r0 * r0, lead * r0],
        method="LSODA",
        t_eval=r[r >= r0],
        rtol=1e-11,
        atol=1e-14,
    )
    if not sol.success:
        raise IntegrationError(f"radial ODE failed: {sol.message}")
    f = np.empty(grid)
    slope = np.empty(grid)
    head = r < r0
    f[head] = 0.5 * lead * r[head] ** 2
    slope[head] = lead * r[head]
    f[~head] = sol.y[0]
    slope[~head] = sol.y[1]
    return RadialTable(n_points=n_points, a=a, b=b, r=r, f=f, slope=slope)


def radial_slope_closed_form(n_points: int, a: float, b: float, r: float) -> float:
    """f0'(r) from the integrating factor, for cross-checking the ODE.

    With mu(s) = s^(N-2) (b^2 + 2 a^2 s^2)^(-(N-2)/2),
    f0'(r) = mu(r)^-1 int_0^r 2 mu(s) / (b^2 + 2 a^2 s^2) ds.
    """
    _check(n_points, a, b)
    if r == 0:
        return 0.0
    power = n_points - 2

    def weight(s):
        return (s / r) ** power * ((b * b + 2 * a * a * r * r) / (b * b + 2 * a * a * s * s)) ** (
            power / 2.0
        )

    value, _ = integrate.quad(
        lambda s: 2.0 * weight(s) / (b * b + 2 * a * a * s * s), 0.0, r, limit=200, epsrel=1e-12
    )
    return value


def asymptotic_slope(table: RadialTable) -> float:
    """Limit of f0'(r), fitting g_inf - c / r + d / r^2 on the outer half of the grid.

    The correction to f0' decays like 1 / r, so f0(r) / r approaches its
    limit only logarithmically slowly; the extrapolated slope is what is
    compared with 1 / (gamma a b).
    """
    half = table.r.shape[0] // 2
    r = table.r[half:]
    r = r[r > 0]
    g = table.slope[-r.shape[0] :]
    design = np.column_stack([np.ones_like(r), -1.0 / r, 1.0 / r**2])
    coef, *_ = np.linalg.lstsq(design, g, rcond=None)
    return float(coef[0])


def asymptotic_prediction(n_points: int, a: float, b: float) -> float:
    """1 / (gamma a b)."""
    return 1.0 / (gamma_const(n_points) * a * b)


def f0_at(n_points: int, a: float, b: float, r: float, grid: int = 401) -> float:
    """Single value f0(r)."""
    if r == 0:
        return 0.0
    return float(radial_f0(n_points, a, b, r, grid=grid).f[-1])

