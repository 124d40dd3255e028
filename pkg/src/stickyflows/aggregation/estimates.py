"""Monte-Carlo estimators: means, standard errors, fits.

Pure functions on numpy arrays. Sums go through math.fsum so that the
result does not depend on how replicas were split across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

JACKKNIFE_BLOCKS = 100


@dataclass(frozen=True)
class Estimate:
    """A Monte-Carlo estimate with its standard error."""

    value: float
    stderr: float

    def zscore(self, reference: float) -> float:
        if self.stderr == 0:
            return 0.0 if self.value == reference else math.inf
        return (self.value - reference) / self.stderr


@dataclass(frozen=True)
class LineFit:
    """Weighted least-squares line y = intercept + slope * x."""

    slope: float
    slope_stderr: float
    intercept: float


def exact_mean(values) -> float:
    values = np.asarray(values, dtype=float).ravel()
    return math.fsum(values) / values.size


def mean_stderr(values) -> Estimate:
    """Sample mean and its standard error."""
    values = np.asarray(values, dtype=float).ravel()
    if values.size == 0:
        return Estimate(value=math.nan, stderr=math.inf)
    mean = exact_mean(values)
    if values.size < 2:
        return Estimate(value=mean, stderr=math.inf)
    var = math.fsum((values - mean) ** 2) / (values.size - 1)
    return Estimate(value=mean, stderr=math.sqrt(var / values.size))


def jackknife_mean(values, blocks: int = JACKKNIFE_BLOCKS) -> Estimate:
    """Mean with delete-one-block jackknife standard error."""
    values = np.asarray(values, dtype=float).ravel()
    m = min(blocks, values.size)
    if m < 2:
        return mean_stderr(values)
    chunks = np.array_split(values, m)
    sums = np.array([math.fsum(c) for c in chunks])
    sizes = np.array([c.size for c in chunks], dtype=float)
    total, count = math.fsum(sums), values.size
    leave_out = (total - sums) / (count - sizes)
    center = exact_mean(leave_out)
    var = (m - 1) / m * math.fsum((leave_out - center) ** 2)
    return Estimate(value=total / count, stderr=math.sqrt(var))


def combined_stderr(*stderrs: float) -> float:
    return math.sqrt(math.fsum(s * s for s in stderrs))


def proportion(count: int, total: int) -> Estimate:
    """Binomial proportion with its standard error."""
    if total <= 0:
        return Estimate(value=math.nan, stderr=math.inf)
    p = count / total
    return Estimate(value=p, stderr=math.sqrt(max(p * (1.0 - p), 0.0) / total))


def weighted_line_fit(x, y, stderr) -> LineFit:
    """Weighted least squares with weights 1 / stderr^2."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = 1.0 / np.asarray(stderr, dtype=float) ** 2
    design = np.column_stack([np.ones_like(x), x])
    normal = design.T @ (design * w[:, None])
    coef = np.linalg.solve(normal, design.T @ (w * y))
    cov = np.linalg.inv(normal)
    return LineFit(slope=float(coef[1]), slope_stderr=float(math.sqrt(cov[1, 1])),
                   intercept=float(coef[0]))


def ratio_estimate(numer, denom, scale: float = 1.0) -> Estimate:
    """scale * mean(numer) / mean(denom) with a delta-method stderr.

    numer and denom are per-replica observations; their covariance is
    taken into account.
    """
    numer = np.asarray(numer, dtype=float)
    denom = np.asarray(denom, dtype=float)
    count = numer.size
    mn, md = exact_mean(numer), exact_mean(denom)
    value = scale * mn / md
    if count < 2:
        return Estimate(value=value, stderr=math.inf)
    cov = np.cov(np.vstack([numer, denom]), ddof=1) / count
    grad = np.array([scale / md, -scale * mn / md**2])
    return Estimate(value=value, stderr=float(math.sqrt(max(grad @ cov @ grad, 0.0))))
