"""Discrete Fourier transforms and the compact difference operators.

The transform convention is the trigonometric-interpolation one,

    U~_l = (1/N) sum_j U_j exp(-2i*j*l*pi/N),
    U_j  = sum_l U~_l exp(2i*j*l*pi/N),

applied per spinor component and per dimension.  Coefficients are stored in
FFT order (l = 0, 1, ..., N/2-1, -N/2, ..., -1).

The compact stencil A_h averages with weights (1, 4, 1)/6; its Fourier symbol
at mode l is gamma_l = (cos(mu_l h) + 2)/3 >= 1/3, so A_h^-1 is applied by
symbol division.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import Grid, SpinorField


def _spatial_axes(dim: int) -> tuple[int, ...]:
    return tuple(range(1, dim + 1))


@dataclass
class ModeSpectrum:
    """Fourier coefficients of a SpinorField, FFT mode order, shape (2, N[, N])."""

    grid: Grid
    coefficients: np.ndarray


def dft_forward(field: SpinorField) -> ModeSpectrum:
    g = field.grid
    coef = np.fft.fftn(field.values, axes=_spatial_axes(g.dim)) / g.n ** g.dim
    return ModeSpectrum(g, coef)


def dft_inverse(spec: ModeSpectrum) -> SpinorField:
    g = spec.grid
    vals = np.fft.ifftn(spec.coefficients, axes=_spatial_axes(g.dim)) * g.n ** g.dim
    return SpinorField(g, vals)


def gamma(l: int, n: int) -> float:
    """Scalar symbol of A_h at mode l: (cos(mu_l h) + 2)/3, via mu_l*h = 2*pi*l/N."""
    return (np.cos(2.0 * np.pi * l / n) + 2.0) / 3.0


def gamma_modes(grid: Grid) -> np.ndarray:
    """gamma_l over all modes of one axis, FFT order."""
    return (np.cos(grid.mode_frequencies() * grid.h) + 2.0) / 3.0


def _axis_to_array_axis(field_dim: int, axis: int) -> int:
    if axis not in (1, 2) or axis > field_dim:
        raise ValueError(f"axis must be 1..{field_dim}, got {axis}")
    return axis  # component axis is 0, spatial axes follow in order


def apply_delta_x(field: SpinorField, axis: int = 1) -> SpinorField:
    """Centered difference (U_{j+1} - U_{j-1})/(2h) with periodic wraparound."""
    ax = _axis_to_array_axis(field.grid.dim, axis)
    v = field.values
    out = (np.roll(v, -1, axis=ax) - np.roll(v, 1, axis=ax)) / (2.0 * field.grid.h)
    return SpinorField(field.grid, out)


def apply_Ah(field: SpinorField, axis: int = 1) -> SpinorField:
    """Compact average (U_{j-1} + 4 U_j + U_{j+1})/6, periodic."""
    ax = _axis_to_array_axis(field.grid.dim, axis)
    v = field.values
    out = (np.roll(v, 1, axis=ax) + 4.0 * v + np.roll(v, -1, axis=ax)) / 6.0
    return SpinorField(field.grid, out)


def _apply_symbol(field: SpinorField, symbol: np.ndarray, axis: int) -> SpinorField:
    """Multiply the transform along one axis by a per-mode symbol and invert."""
    ax = _axis_to_array_axis(field.grid.dim, axis)
    shape = [1] * field.values.ndim
    shape[ax] = field.grid.n
    hat = np.fft.fft(field.values, axis=ax) * symbol.reshape(shape)
    return SpinorField(field.grid, np.fft.ifft(hat, axis=ax))


def apply_Ah_inv(field: SpinorField, axis: int = 1) -> SpinorField:
    """Inverse of the compact average, by Fourier symbol division (gamma_l >= 1/3)."""
    return _apply_symbol(field, 1.0 / gamma_modes(field.grid), axis)


def spectral_derivative(field: SpinorField, axis: int = 1) -> SpinorField:
    """Fourier derivative: multiply mode l by i*mu_l, Nyquist mode zeroed."""
    g = field.grid
    sym = 1j * g.mode_frequencies()
    sym[g.n // 2] = 0.0  # l = -N/2 has no symmetric partner
    return _apply_symbol(field, sym, axis)
