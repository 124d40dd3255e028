"""Covariance functions psi and the two-point speed measure.

psi must satisfy psi(0) = 1, |psi(x)| < 1 off the origin, psi -> 0 at
infinity and (1 - psi(x)) / x^2 -> a^2 as x -> 0. The gaussian kind
psi(x) = exp(-a^2 x^2) satisfies all of these exactly; tabulated
models are checked numerically on their grid.
"""

from __future__ import annotations

import logging
import math

import numpy as np
from scipy import integrate

from stickyflows.errors import InvariantViolation, QuadratureError
from stickyflows.models.domain import CovarianceModel, ScaledModel

logger = logging.getLogger(__name__)

# Grid checks for tabulated models
PSI_ORIGIN_TOL = 1e-12
TAIL_CEILING = 1e-3
PSD_CHECK_POINTS = 32
CURVATURE_FACTOR = 10.0


def gaussian(a: float) -> CovarianceModel:
    """The default covariance psi(x) = exp(-a^2 x^2)."""
    if a <= 0:
        raise InvariantViolation(f"a must be > 0, got {a}", entry="a")
    return CovarianceModel(kind="gaussian", a=float(a))


def tabulated(xs, values, a: float | None = None) -> CovarianceModel:
    """User-tabulated psi on a grid 0 = xs[0] < xs[1] < ...

    The table is extended evenly and linearly interpolated; beyond the
    last node psi is taken as 0. When a is not given it is estimated from
    the first positive node as sqrt((1 - psi(x1)) / x1^2).

    Raises:
        InvariantViolation: If the table fails the grid checks.
    """
    xs = np.asarray(xs, dtype=float)
    values = np.asarray(values, dtype=float)
    if xs.ndim != 1 or xs.shape != values.shape or xs.shape[0] < 3:
        raise InvariantViolation("tabulated psi needs matching 1-D arrays of length >= 3")
    if xs[0] != 0.0 or np.any(np.diff(xs) <= 0):
        raise InvariantViolation("tabulated psi grid must start at 0 and increase")
    if a is None:
        a = math.sqrt(max(1.0 - values[1], 0.0)) / xs[1]
    model = CovarianceModel(kind="tabulated", a=float(a), table_x=xs, table_psi=values)
    validate_model(model)
    return model


def scaled(base: CovarianceModel, n: int, b: float) -> ScaledModel:
    """Attach the scaling index n and diffusivity b to a covariance model."""
    if n < 1:
        raise InvariantViolation(f"n must be ≥ 1, got {n}", entry="n")
    if b <= 0:
        raise InvariantViolation(f"b must be > 0, got {b}", entry="b")
    return ScaledModel(base=base, n=int(n), b=float(b))


def psi(model: CovarianceModel, x):
    """Evaluate psi at x (scalar or array); even in x."""
    x = np.asarray(x, dtype=float)
    if model.kind == "gaussian":
        out = np.exp(-(model.a**2) * x * x)
    else:
        out = np.interp(np.abs(x), model.table_x, model.table_psi, right=0.0)
    return float(out) if out.ndim == 0 else out


def curvature_check(model: CovarianceModel, xs) -> float:
    """Largest amount by which |(1-psi(x))/x^2 - a^2| exceeds 10 a^4 x^2.

    Only points with 0 < |x| <= 0.1 / a are considered; a non-positive
    return value means the Taylor bound holds on the grid.
    """
    xs = np.abs(np.asarray(xs, dtype=float))
    xs = xs[(xs > 0) & (xs <= 0.1 / model.a)]
    if xs.size == 0:
        return 0.0
    ratio = (1.0 - psi(model, xs)) / xs**2
    excess = np.abs(ratio - model.a**2) - CURVATURE_FACTOR * model.a**4 * xs**2
    return float(np.max(excess))


def min_psd_eigenvalue(model: CovarianceModel, points) -> float:
    """Smallest eigenvalue of [psi(x_i - x_j)] on the given points."""
    points = np.asarray(points, dtype=float)
    gram = psi(model, points[:, None] - points[None, :])
    return float(np.linalg.eigvalsh(np.atleast_2d(gram))[0])


def validate_model(model: CovarianceModel) -> None:
    """Check the covariance assumptions, numerically for tabulated models.

    Raises:
        InvariantViolation: Naming the first failed assumption.
    """
    if model.a <= 0:
        raise InvariantViolation("a must be > 0", entry="a")
    if model.kind == "gaussian":
        return

    xs, values = model.table_x, model.table_psi
    if abs(values[0] - 1.0) > PSI_ORIGIN_TOL:
        raise InvariantViolation(f"psi(0) = {values[0]} != 1", entry="psi(0)")
    if np.any(np.abs(values[1:]) >= 1.0):
        raise InvariantViolation("|psi(x)| must be < 1 for x != 0", entry="|psi|<1")
    if abs(values[-1]) > TAIL_CEILING:
        raise InvariantViolation(
            f"psi does not decay: psi({xs[-1]}) = {values[-1]}", entry="decay"
        )
    if curvature_check(model, xs) > 0:
        raise InvariantViolation("curvature limit (1-psi)/x^2 -> a^2 not met", entry="curvature")
    nodes = np.linspace(0.0, xs[-1], PSD_CHECK_POINTS)
    lam = min_psd_eigenvalue(model, nodes)
    if lam < -1e-10 * PSD_CHECK_POINTS:
        raise InvariantViolation(f"psi not positive definite (eigenvalue {lam:.3e})", entry="psd")


def speed_density(scaled_model: ScaledModel, z):
    """Speed density 1 / (1 + b^2 n^-2 - psi(n z)) of the pair difference."""
    z = np.asarray(z, dtype=float)
    out = 1.0 / (1.0 + scaled_model.noise_variance - psi(scaled_model.base, scaled_model.n * z))
    return float(out) if np.ndim(out) == 0 else out


def peak_breakpoints(scaled_model: ScaledModel, half_width: float) -> list[float]:
    """Geometric breakpoints resolving the peak of width b / (a n^2)."""
    width = scaled_model.b / (scaled_model.a * scaled_model.n**2)
    edges = [0.0]
    edge = width
    while edge < half_width:
        edges.append(edge)
        edge *= 10.0
    edges.append(half_width)
    return edges


def speed_measure_mass(
    scaled_model: ScaledModel, half_width: float, tol: float = 1e-12
) -> float:
    """Mass of the speed measure on [-h, h] by adaptive quadrature.

    As n -> infinity this tends to 2h + pi / (a b).

    Raises:
        QuadratureError: If any panel fails to converge.
    """
    if half_width <= 0:
        raise InvariantViolation("half_width must be > 0", entry="half_width")
    edges = peak_breakpoints(scaled_model, half_width)
    pieces = []
    bound = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        value, err, info = integrate.quad(
            lambda z: speed_density(scaled_model, z),
            lo,
            hi,
            epsabs=tol,
            epsrel=1e-12,
            limit=200,
            full_output=True,
        )[:3]
        bound += err
        if not np.isfinite(value) or (err > max(tol, 1e-10 * abs(value)) and info["last"] >= 200):
            raise QuadratureError(f"speed measure panel [{lo:.3e}, {hi:.3e}] diverged", bound)
        pieces.append(value)
    return 2.0 * math.fsum(pieces)
