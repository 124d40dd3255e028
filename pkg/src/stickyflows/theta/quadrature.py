"""theta(k:l) by one-dimensional quadrature.

Integrating the indicator in the (k+l)-dimensional Gaussian integral
over x for fixed z leaves

    theta(k:l) = ab / (2 sqrt(pi)) * int_R Phi(z)^k (1 - Phi(z))^l dz.

The integral is computed with composite Gauss-Legendre on [0, Z_MAX],
evaluating the integrand at z and -z in pairs and doubling the panel
count until successive values agree. Pairing makes theta(k:l) and
theta(l:k) bit-identical.
"""

from __future__ import annotations

import math
from collections.abc import Callable

import numpy as np
from scipy import special

from stickyflows.errors import QuadratureError

Z_MAX = 12.0
GAUSS_ORDER = 20
START_PANELS = 8
MAX_PANELS = 2**12

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(GAUSS_ORDER)


def prefactor(a: float, b: float) -> float:
    """The constant ab / (2 sqrt(pi)) in front of every theta integral."""
    return a * b / (2.0 * math.sqrt(math.pi))


def tail_bound() -> float:
    """Bound on the integrand mass beyond |z| = Z_MAX (for any k, l >= 1).

    Each side is at most int_{Z_MAX}^inf Phi(-z) dz <= phi(Z_MAX) / Z_MAX^2.
    """
    phi = math.exp(-0.5 * Z_MAX**2) / math.sqrt(2.0 * math.pi)
    return 2.0 * phi / Z_MAX**2


def split_integrand(k: int, l: int) -> Callable[[np.ndarray], np.ndarray]:  # noqa: E741
    """z -> Phi(z)^k (1 - Phi(z))^l, with 1 - Phi(z) computed as Phi(-z)."""

    def integrand(z: np.ndarray) -> np.ndarray:
        return special.ndtr(z) ** k * special.ndtr(-z) ** l

    return integrand


def _composite(integrand: Callable[[np.ndarray], np.ndarray], panels: int) -> float:
    edges = np.linspace(0.0, Z_MAX, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    t = mid[:, None] + half[:, None] * _NODES[None, :]
    paired = integrand(t) + integrand(-t)
    return float(np.sum(half[:, None] * _WEIGHTS[None, :] * paired))


def symmetric_integral(
    integrand: Callable[[np.ndarray], np.ndarray], tol: float
) -> tuple[float, float]:
    """Integral over R of integrand, truncated at |z| = Z_MAX.

    Returns:
        (value, error bound) where the bound is the last panel-doubling
        difference plus the analytic tail bound.

    Raises:
        QuadratureError: If tol is not reached by MAX_PANELS panels.
    """
    if tol <= 0:
        raise ValueError("tol must be > 0")
    panels = START_PANELS
    previous = _composite(integrand, panels)
    while True:
        panels *= 2
        current = _composite(integrand, panels)
        bound = abs(current - previous) + tail_bound()
        if bound <= tol:
            return current, bound
        if panels >= MAX_PANELS:
            raise QuadratureError("split-moment quadrature did not converge", bound)
        previous = current


def theta_quadrature_with_bound(
    k: int, l: int, a: float, b: float, tol: float = 1e-12  # noqa: E741
) -> tuple[float, float]:
    """theta(k:l) and its absolute error bound."""
    if k < 1 or l < 1:
        raise ValueError(f"k and l must be >= 1, got ({k}, {l})")
    c = prefactor(a, b)
    value, bound = symmetric_integral(split_integrand(k, l), tol / c)
    return c * value, c * bound


def theta_quadrature(k: int, l: int, a: float, b: float, tol: float = 1e-12) -> float:  # noqa: E741
    """theta(k:l) from the one-dimensional reduction of the Gaussian integral."""
    return theta_quadrature_with_bound(k, l, a, b, tol)[0]
