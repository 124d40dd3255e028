"""Random-Fourier synthesis of the driving Gaussian field W.

For the gaussian kind, psi(n x) = E[cos(w x)] with w ~ Normal(0, 2 a^2 n^2),
so a field draw
    F(x) = J^{-1/2} sum_j (xi_j cos(w_j x) + eta_j sin(w_j x))
with independent standard normal xi, eta has covariance
J^{-1} sum_j cos(w_j (x - y)), which averages to psi(n (x - y)). The
increment of W over a step of length dt is sqrt(dt) F. Fresh features
are drawn every step, making the field white in time.
"""

from __future__ import annotations

import math

import numpy as np

from stickyflows.errors import ConfigError, UnsupportedKindError
from stickyflows.models.domain import FourierField, ScaledModel


def sample_field(
    scaled_model: ScaledModel,
    features: int,
    rng: np.random.Generator,
    period: float | None = None,
    size: int | None = None,
) -> FourierField:
    """Draw one field, or ``size`` independent fields, with J features each.

    Args:
        scaled_model: Covariance psi(n .) to synthesize.
        features: Number J of random features (>= 1).
        rng: Random stream.
        period: If given, wavenumbers are rounded to multiples of
            2 pi / period so the field is periodic.
        size: If given, arrays get a leading axis of this length, one
            independent field per row.

    Raises:
        UnsupportedKindError: For tabulated covariance models.
    """
    if scaled_model.base.kind != "gaussian":
        raise UnsupportedKindError(
            f"spectral sampling needs a known spectral measure; kind={scaled_model.base.kind}"
        )
    if features < 1:
        raise ValueError("features must be >= 1")
    shape = (features,) if size is None else (size, features)
    scale = math.sqrt(2.0) * scaled_model.a * scaled_model.n
    wavenumbers = rng.normal(0.0, scale, size=shape)
    if period is not None:
        base = 2.0 * math.pi / period
        wavenumbers = np.round(wavenumbers / base) * base
    amp = 1.0 / math.sqrt(features)
    cos_amp = rng.standard_normal(shape) * amp
    sin_amp = rng.standard_normal(shape) * amp
    return FourierField(wavenumbers=wavenumbers, cos_amplitudes=cos_amp, sin_amplitudes=sin_amp)


def field_values(field: FourierField, x) -> np.ndarray:
    """Evaluate a field draw at points x (any shape).

    For a batch of fields (2-d arrays), x has shape (size, points) and
    row r is evaluated with field r.
    """
    x = np.asarray(x, dtype=float)
    if field.wavenumbers.ndim == 2:
        phase = x[:, :, None] * field.wavenumbers[:, None, :]
        return np.einsum("rpj,rj->rp", np.cos(phase), field.cos_amplitudes) + np.einsum(
            "rpj,rj->rp", np.sin(phase), field.sin_amplitudes
        )
    phase = x[..., None] * field.wavenumbers
    return np.cos(phase) @ field.cos_amplitudes + np.sin(phase) @ field.sin_amplitudes


def grid_values(field: FourierField, cells: int, period: float) -> np.ndarray:
    """Evaluate a periodic field draw at the grid points i * period / cells.

    Wavenumbers must be multiples of 2 pi / period. Features are binned
    by mode index modulo the grid size and summed with one inverse FFT,
    which gives the same values as field_values at the grid points.
    """
    base = 2.0 * math.pi / period
    modes = np.rint(field.wavenumbers / base).astype(np.int64) % cells
    real = np.bincount(modes, weights=field.cos_amplitudes, minlength=cells)
    imag = np.bincount(modes, weights=field.sin_amplitudes, minlength=cells)
    return cells * np.fft.ifft(real - 1j * imag).real


class FieldStream:
    """Deterministic sequence of per-step field draws from one field seed.

    Two consumers built with the same arguments see identical fields
    step by step; this is how a particle filter and the SPDE share one
    realization of W.
    """

    def __init__(
        self,
        scaled_model: ScaledModel,
        features: int,
        rng: np.random.Generator,
        period: float | None = None,
    ):
        self.scaled = scaled_model
        self.features = features
        self.period = period
        self._rng = rng
        self.steps_drawn = 0

    def next_field(self) -> FourierField:
        self.steps_drawn += 1
        return sample_field(self.scaled, self.features, self._rng, period=self.period)

    def increment(self, x, dt: float) -> np.ndarray:
        """Draw the next field and return its increment sqrt(dt) F(x)."""
        return math.sqrt(dt) * field_values(self.next_field(), x)

    def grid_increment(self, cells: int, dt: float) -> np.ndarray:
        """Draw the next field and return sqrt(dt) F on the periodic grid.

        Raises:
            ConfigError: If the stream was built without a period.
        """
        if self.period is None:
            raise ConfigError("grid evaluation needs a periodic field", key="period")
        return math.sqrt(dt) * grid_values(self.next_field(), cells, self.period)
