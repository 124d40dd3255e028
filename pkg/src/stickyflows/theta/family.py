"""Assembly and checking of consistent theta families."""

from __future__ import annotations

import logging
import math

from stickyflows.core.identity import substream
from stickyflows.errors import InvariantViolation
from stickyflows.models.domain import ThetaFamily, ThetaMethod
from stickyflows.theta.montecarlo import theta_montecarlo
from stickyflows.theta.quadrature import theta_quadrature_with_bound
from stickyflows.theta.splitting import theta_from_nu_with_bound

logger = logging.getLogger(__name__)

# Deterministic families (quadrature, nu)
CONSISTENCY_TOL = 1e-10
# Monte-Carlo families: allowed residual in combined standard errors
MC_SIGMAS = 4.0


def entries(nmax: int) -> list[tuple[int, int]]:
    """All (k, l) with k, l >= 1 and k + l <= nmax, by total then k."""
    return [(k, total - k) for total in range(2, nmax + 1) for k in range(1, total)]


def build_family(
    nmax: int,
    a: float,
    b: float,
    method: ThetaMethod = "quadrature",
    tol: float = 1e-12,
    samples: int = 1_000_000,
    seed: int = 0,
) -> ThetaFamily:
    """Fill the theta array by the chosen method and check invariants.

    For method="montecarlo" each entry uses its own sub-stream
    (seed, "theta", k, l), and error_bounds hold standard errors.

    Raises:
        InvariantViolation: Naming the first entry that breaks
            nonnegativity, symmetry or consistency.
    """
    if nmax < 2:
        raise ValueError("nmax must be >= 2")
    values: dict[tuple[int, int], float] = {}
    bounds: dict[tuple[int, int], float] = {}
    for k, l in entries(nmax):  # noqa: E741
        if method == "quadrature":
            values[(k, l)], bounds[(k, l)] = theta_quadrature_with_bound(k, l, a, b, tol)
        elif method == "nu":
            values[(k, l)], bounds[(k, l)] = theta_from_nu_with_bound(k, l, a, b, tol)
        elif method == "montecarlo":
            est = theta_montecarlo(k, l, a, b, samples, substream(seed, "theta", k, l))
            values[(k, l)], bounds[(k, l)] = est.value, est.stderr
        else:
            raise ValueError(f"unknown theta method: {method}")
    family = ThetaFamily(
        nmax=nmax, a=a, b=b, method=method, values=values, error_bounds=bounds
    )
    check_family(family)
    logger.debug("built theta family nmax=%d method=%s", nmax, method)
    return family


def consistency_residuals(family: ThetaFamily) -> dict[tuple[int, int], float]:
    """theta(k:l) - theta(k+1:l) - theta(k:l+1) wherever all three exist."""
    out = {}
    for k, l in entries(family.nmax - 1):  # noqa: E741
        out[(k, l)] = family.get(k, l) - family.get(k + 1, l) - family.get(k, l + 1)
    return out


def _allowed(family: ThetaFamily, *keys: tuple[int, int]) -> float:
    if family.method == "montecarlo":
        return MC_SIGMAS * math.sqrt(math.fsum(family.error_bounds[key] ** 2 for key in keys))
    return CONSISTENCY_TOL


def check_family(family: ThetaFamily) -> None:
    """Check nonnegativity, symmetry and consistency within tolerance."""
    for key, value in family.values.items():
        if value < 0:
            raise InvariantViolation(f"theta{key} = {value} is negative", entry=key)
    for (k, l), value in family.values.items():  # noqa: E741
        mirror = family.values[(l, k)]
        if abs(value - mirror) > _allowed(family, (k, l), (l, k)):
            raise InvariantViolation(
                f"symmetry broken: theta({k}:{l})={value} vs theta({l}:{k})={mirror}",
                entry=(k, l),
            )
    for (k, l), residual in consistency_residuals(family).items():  # noqa: E741
        if abs(residual) > _allowed(family, (k, l), (k + 1, l), (k, l + 1)):
            raise InvariantViolation(
                f"consistency broken at theta({k}:{l}): residual {residual:.3e}",
                entry=(k, l),
            )
