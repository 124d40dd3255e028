"""The splitting measure nu and theta as its moments.

    nu(dq) = ab / (2 sqrt(pi)) * q (1 - q) / phi(Phi^{-1}(q)) dq,
    theta(k:l) = int_0^1 q^{k-1} (1 - q)^{l-1} nu(dq).

The prefactor ab / (2 sqrt(pi)) is not part of the printed density but
is required for the moments to reproduce the Gaussian-integral theta.
Moments are integrated after the substitution q = Phi(z), which
removes both endpoint singularities.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate, special

from stickyflows.theta.quadrature import prefactor, symmetric_integral

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _phi(z):
    return np.exp(-0.5 * np.asarray(z) ** 2) / _SQRT_2PI


def _probit(q, p):
    """Phi^{-1}(q) evaluated from whichever of q, p = 1 - q is smaller."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    return np.where(q <= 0.5, special.ndtri(q), -special.ndtri(p))


def splitting_density(q, a: float, b: float):
    """Density of nu at q in (0, 1); symmetric under q -> 1 - q."""
    q = np.asarray(q, dtype=float)
    out = prefactor(a, b) * q * (1.0 - q) / _phi(_probit(q, 1.0 - q))
    return float(out) if out.ndim == 0 else out


def _moment_integrand(k: int, l: int):  # noqa: E741
    def integrand(z: np.ndarray) -> np.ndarray:
        q, p = special.ndtr(z), special.ndtr(-z)
        density = q * p / _phi(_probit(q, p))
        return q ** (k - 1) * p ** (l - 1) * density * _phi(z)

    return integrand


def theta_from_nu_with_bound(
    k: int, l: int, a: float, b: float, tol: float = 1e-12  # noqa: E741
) -> tuple[float, float]:
    if k < 1 or l < 1:
        raise ValueError(f"k and l must be >= 1, got ({k}, {l})")
    c = prefactor(a, b)
    value, bound = symmetric_integral(_moment_integrand(k, l), tol / c)
    return c * value, c * bound


def theta_from_nu(k: int, l: int, a: float, b: float, tol: float = 1e-12) -> float:  # noqa: E741
    """theta(k:l) as the (k-1, l-1) moment of the splitting measure."""
    return theta_from_nu_with_bound(k, l, a, b, tol)[0]


def flow_speeds(a: float, b: float, cutoff: float) -> tuple[float, float]:
    """Right and left speeds with nu restricted to [cutoff, 1 - cutoff].

    beta_+ = 2 int q^{-1} nu(dq) and beta_- = -2 int (1-q)^{-1} nu(dq).
    Both grow without bound as cutoff -> 0 for this nu.
    """
    if not 0.0 < cutoff < 0.5:
        raise ValueError("cutoff must lie in (0, 0.5)")
    lo = float(special.ndtri(cutoff))
    c = prefactor(a, b)
    # after q = Phi(z): q^{-1} nu(dq) = c (1 - Phi(z)) dz
    right = integrate.quad(lambda z: special.ndtr(-z), lo, -lo, limit=200)[0]
    left = integrate.quad(lambda z: special.ndtr(z), lo, -lo, limit=200)[0]
    return 2.0 * c * right, -2.0 * c * left
