"""theta(k:l) by Monte Carlo on the raw Gaussian integral.

For standard normal x in R^{k+l}, the z-integral of the indicator
1(x_1..x_k < z < x_{k+1}..x_{k+l}) equals
(min_{i>k} x_i - max_{i<=k} x_i)^+, so

    theta(k:l) = ab / (2 sqrt(pi)) * E[(min_{i>k} x_i - max_{i<=k} x_i)^+].

A second independent route uses the heuristic spherical form
(gamma ab / 2) * E[(min_{i<=k} u_i - max_{i>k} u_i)^+] with u uniform
on the unit sphere of the hyperplane sum(x) = 0 in R^{k+l}.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

from stickyflows.aggregation.estimates import Estimate, jackknife_mean
from stickyflows.theta.quadrature import prefactor

CHUNK = 1 << 16


def gap_samples(k: int, l: int, samples: int, rng: np.random.Generator) -> np.ndarray:  # noqa: E741
    """(min of last l - max of first k)^+ for standard normal vectors."""
    out = np.empty(samples)
    for start in range(0, samples, CHUNK):
        size = min(CHUNK, samples - start)
        x = rng.standard_normal((size, k + l))
        gap = x[:, k:].min(axis=1) - x[:, :k].max(axis=1)
        out[start : start + size] = np.maximum(gap, 0.0)
    return out


def theta_montecarlo(
    k: int, l: int, a: float, b: float, samples: int, rng: np.random.Generator  # noqa: E741
) -> Estimate:
    """Unbiased Monte-Carlo estimate of theta(k:l) with jackknife stderr."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    est = jackknife_mean(gap_samples(k, l, samples, rng))
    c = prefactor(a, b)
    return Estimate(value=c * est.value, stderr=c * est.stderr)


def gamma_const(n_points: int) -> float:
    """gamma = sqrt(2/pi) Gamma(N/2) / Gamma((N-1)/2)."""
    if n_points < 2:
        raise ValueError("N must be >= 2")
    log_ratio = special.gammaln(n_points / 2.0) - special.gammaln((n_points - 1) / 2.0)
    return math.sqrt(2.0 / math.pi) * math.exp(log_ratio)


def theta_sphere(
    k: int, l: int, a: float, b: float, samples: int, rng: np.random.Generator  # noqa: E741
) -> Estimate:
    """theta(k:l) from the uniform law on the sphere of R^N_0, N = k + l."""
    n_points = k + l
    values = np.empty(samples)
    for start in range(0, samples, CHUNK):
        size = min(CHUNK, samples - start)
        x = rng.standard_normal((size, n_points))
        x -= x.mean(axis=1, keepdims=True)
        u = x / np.linalg.norm(x, axis=1, keepdims=True)
        gap = u[:, :k].min(axis=1) - u[:, k:].max(axis=1)
        values[start : start + size] = np.maximum(gap, 0.0)
    est = jackknife_mean(values)
    c = gamma_const(n_points) * a * b / 2.0
    return Estimate(value=c * est.value, stderr=c * est.stderr)
