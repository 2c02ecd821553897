"""Unified magnitude quantizer shared by the real and complex coding modes.

Magnitudes use ``I = floor(A ** p + 0.48)`` with a per-subband power
factor ``p``; the reconstruction is ``I ** (1 / p)``. Real coefficients
then carry a sign bit and complex ones a uniform phase index. Zero
magnitudes carry nothing.
"""

from __future__ import annotations

import numpy as np

from .config import CodecConfig

ROUNDING_OFFSET = 0.48


def band_index(config: CodecConfig) -> np.ndarray:
    """Subband number of every bin."""
    edges = np.asarray(config.subband_edges)
    return np.searchsorted(edges, np.arange(config.num_bins), side="right")


def bin_powers(config: CodecConfig) -> np.ndarray:
    return np.asarray(config.power_factors, dtype=np.float64)[band_index(config)]


def quantize_mag(A, p):
    A = np.asarray(A, dtype=np.float64)
    if np.any(A < 0):
        raise ValueError("magnitudes must be non-negative")
    return np.floor(A ** np.asarray(p) + ROUNDING_OFFSET).astype(np.int64)


def dequantize_mag(index, p):
    index = np.asarray(index)
    if np.any(index < 0):
        raise ValueError("magnitude indices must be non-negative")
    return np.where(index > 0, np.maximum(index, 0) ** (1.0 / np.asarray(p)), 0.0)


def quantize_phase(theta, bits: int = 6):
    levels = 1 << bits
    step = 2 * np.pi / levels
    return np.mod(np.round(np.asarray(theta) / step).astype(np.int64), levels)


def dequantize_phase(index, bits: int = 6):
    levels = 1 << bits
    theta = np.asarray(index) * (2 * np.pi / levels)
    return np.where(theta > np.pi, theta - 2 * np.pi, theta)


def quantize_sign(x):
    return (np.asarray(x) < 0).astype(np.int64)


def quantize_coeffs(scaled, powers, complex_mode: bool, phase_bits: int = 6):
    """Quantize scaled coefficients to ``(magnitude_indices, aux)``.

    ``aux`` holds phase indices (complex mode) or sign bits (real mode)
    and is zero wherever the magnitude index is zero.
    """
    scaled = np.asarray(scaled)
    mags = quantize_mag(np.abs(scaled), powers)
    if complex_mode:
        aux = quantize_phase(np.angle(scaled), phase_bits)
    else:
        aux = quantize_sign(np.real(scaled))
    return mags, np.where(mags > 0, aux, 0)


def dequantize_coeffs(mags, aux, powers, complex_mode: bool, phase_bits: int = 6):
    amp = dequantize_mag(mags, powers)
    if complex_mode:
        return amp * np.exp(1j * dequantize_phase(aux, phase_bits))
    return np.where(np.asarray(aux) > 0, -amp, amp)
