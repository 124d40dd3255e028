"""Instantaneous covariance of the prelimit N-point motion.

Sigma_ij(x) = psi(n (x_i - x_j)) + (b^2 / n^2) 1(i = j), the diffusion
matrix of the generator G^{N,n}.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from stickyflows.covariance.psi import psi
from stickyflows.errors import FactorizationError
from stickyflows.models.domain import ScaledModel

logger = logging.getLogger(__name__)

MAX_JITTER_FACTOR = 1e-8


@dataclass(frozen=True)
class Factorization:
    """Lower-triangular L with L L^T = Sigma + jitter I."""

    factor: np.ndarray
    jitter: float


def step_covariance(scaled_model: ScaledModel, x) -> np.ndarray:
    """Sigma(x) for one point (shape (N,)) or a batch (shape (..., N))."""
    x = np.asarray(x, dtype=float)
    diff = x[..., :, None] - x[..., None, :]
    sigma = psi(scaled_model.base, scaled_model.n * diff)
    sigma = np.asarray(sigma, dtype=float)
    n_points = x.shape[-1]
    sigma = sigma + scaled_model.noise_variance * np.eye(n_points)
    return sigma


def factor_covariance(sigma: np.ndarray) -> Factorization:
    """Cholesky factor with jitter escalating in decades.

    Jitter starts at 0, then goes 1e-16, 1e-15, ... times trace/N up to
    MAX_JITTER_FACTOR times trace/N.

    Raises:
        FactorizationError: If even the largest jitter fails, which
            signals an invalid psi.
    """
    sigma = np.asarray(sigma, dtype=float)
    n_points = sigma.shape[0]
    scale = float(np.trace(sigma)) / n_points
    jitters = [0.0] + [scale * 10.0**e for e in range(-16, int(np.log10(MAX_JITTER_FACTOR)) + 1)]
    for jitter in jitters:
        try:
            factor = np.linalg.cholesky(sigma + jitter * np.eye(n_points))
        except np.linalg.LinAlgError:
            continue
        if jitter > 0:
            logger.warning("covariance factorization needed jitter %.3e", jitter)
        return Factorization(factor=factor, jitter=jitter)
    raise FactorizationError("covariance not positive definite at max jitter", jitter=jitters[-1])


def batch_factor(sigma: np.ndarray) -> tuple[np.ndarray, float]:
    """Cholesky factors of a stack of matrices; returns (factors, max jitter)."""
    try:
        return np.linalg.cholesky(sigma), 0.0
    except np.linalg.LinAlgError:
        factors = np.empty_like(sigma)
        worst = 0.0
        for idx in np.ndindex(sigma.shape[:-2]):
            result = factor_covariance(sigma[idx])
            factors[idx] = result.factor
            worst = max(worst, result.jitter)
        return factors, worst
