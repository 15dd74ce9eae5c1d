"""Discrete Fourier analysis and synthesis for spinor fields.

Mode coefficients are stored in natural frequency order l = -M/2 .. M/2-1
with the 1/M normalization on the forward transform, so a constant field has
its value in the l = 0 slot.  The transforms act componentwise.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .core import SpinorField

__all__ = ["ModeCoeffs", "analyze", "synthesize", "spectral_derivative",
           "to_modes", "from_modes", "analyze_direct"]

# one worker by default: sweep cells already run on a thread pool, and
# nested FFT parallelism oversubscribes small machines
_WORKERS = int(os.environ.get("DIRAC_LAB_FFT_WORKERS", "1"))


def to_modes(values: np.ndarray, grid_ndim: int) -> np.ndarray:
    """Forward transform of nodal values; leading grid_ndim axes are spatial."""
    axes = tuple(range(grid_ndim))
    n = 1
    for ax in axes:
        n *= values.shape[ax]
    return np.fft.fftshift(sfft.fftn(values, axes=axes, workers=_WORKERS), axes=axes) / n


def from_modes(coeffs: np.ndarray, grid_ndim: int) -> np.ndarray:
    """Inverse of :func:`to_modes`."""
    axes = tuple(range(grid_ndim))
    n = 1
    for ax in axes:
        n *= coeffs.shape[ax]
    return sfft.ifftn(np.fft.ifftshift(coeffs, axes=axes), axes=axes, workers=_WORKERS) * n


@dataclass
class ModeCoeffs:
    """Per-mode spinor coefficients in natural frequency order."""

    grid: object
    coeffs: np.ndarray

    @property
    def ncomp(self) -> int:
        return self.coeffs.shape[-1]


def analyze(field: SpinorField) -> ModeCoeffs:
    """Nodal field -> mode coefficients (1/M normalization, natural order)."""
    if not np.all(np.isfinite(field.values)):
        raise ValueError("cannot analyze a non-finite field")
    return ModeCoeffs(field.grid, to_modes(field.values, field.grid.ndim))


def synthesize(coeffs: ModeCoeffs) -> SpinorField:
    """Mode coefficients -> nodal field (exact inverse of :func:`analyze`)."""
    return SpinorField(coeffs.grid, from_modes(coeffs.coeffs, coeffs.grid.ndim))


def analyze_direct(field: SpinorField) -> ModeCoeffs:
    """O(M^2) direct summation of the forward transform (test oracle), 1D."""
    if field.grid.ndim != 1:
        raise ValueError("direct DFT oracle is implemented for 1D grids")
    m = field.grid.m
    j = np.arange(m)
    out = np.empty((m, field.ncomp), dtype=complex)
    for slot, l in enumerate(range(-m // 2, m // 2)):
        w = np.exp(-2j * np.pi * j * l / m)
        out[slot] = w @ field.values / m
    return ModeCoeffs(field.grid, out)


def spectral_derivative(field: SpinorField, axis: int = 0) -> SpinorField:
    """Differentiate along a grid axis by multiplying mode l with i mu_l."""
    grid = field.grid
    c = to_modes(field.values, grid.ndim)
    if grid.ndim == 1:
        mu = grid.freqs
    else:
        mu = (grid.gx, grid.gy)[axis].freqs
    shape = [1] * c.ndim
    shape[axis] = mu.size
    c = c * (1j * mu).reshape(shape)
    return SpinorField(grid, from_modes(c, grid.ndim))
