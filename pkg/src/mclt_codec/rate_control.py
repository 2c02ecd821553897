"""Adaptive subband bit targets and the per-band scale-factor search."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import CodecConfig

SF_STEP_DB = 0.75
SF_MIN_DB = -48.0
SF_LEVELS = 128
SF_MAX_DB = SF_MIN_DB + SF_STEP_DB * (SF_LEVELS - 1)
SEARCH_ITERATIONS = 32
# the top grid point is unity gain in [-1, 1] sample units
LEVEL_REF = 10.0 ** (-SF_MAX_DB / 20.0)
_EPS = 1e-30


@dataclass
class BitPlan:
    bits: np.ndarray
    fer: np.ndarray
    gain_db: float

    @property
    def total(self) -> int:
        return int(np.sum(self.bits))


def frame_gain(H) -> float:
    """Mean envelope level in dB, ``20 log10(sum(H) / N)``."""
    H = np.asarray(H, dtype=np.float64)
    return float(20.0 * np.log10(np.sum(H) / len(H)))


def fer(H, edges) -> np.ndarray:
    """Per-band envelope maxima normalized to sum to one."""
    H = np.asarray(H, dtype=np.float64)
    starts = (0,) + tuple(edges[:-1])
    peaks = np.array([H[a:b].max() for a, b in zip(starts, edges)])
    return peaks / peaks.sum()


def target_bits(gain_db: float, fer_values, config: CodecConfig) -> BitPlan:
    fer_values = np.asarray(fer_values, dtype=np.float64)
    relax = config.gate_relax if gain_db > config.gain_gate else 0.0
    thresholds = np.asarray(config.fer_thresholds) - relax
    extra = np.where(fer_values >= thresholds, np.asarray(config.add_bits), 0)
    raw = (np.asarray(config.fixed_bits) + extra) * config.bit_budget_scale
    bits = np.floor(raw + 0.5).astype(np.int64)
    return BitPlan(bits=bits, fer=fer_values, gain_db=gain_db)


def sf_to_db(index):
    return SF_MIN_DB + SF_STEP_DB * np.asarray(index)


def sf_to_gain(index):
    """Linear gain in the codec's [-1, 1] sample units."""
    return LEVEL_REF * 10.0 ** (sf_to_db(index) / 20.0)


def quad_energies(coeffs) -> np.ndarray:
    """Energies of consecutive groups of four; a short tail group is zero padded."""
    power = np.abs(np.asarray(coeffs)) ** 2
    pad = (-len(power)) % 4
    return np.concatenate([power, np.zeros(pad)]).reshape(-1, 4).sum(axis=1)


def estimate_bits(energies, gain: float, k_fit: float = 1.0) -> float:
    """``k_fit * sum_q max(1, 0.5 log2(E_q / g^2))``.

    Depends on the energies and the gain only through ``E / g^2``.
    """
    energies = np.asarray(energies, dtype=np.float64)
    ratio = np.maximum(energies / (gain * gain), _EPS)
    return float(k_fit * np.sum(np.maximum(1.0, 0.5 * np.log2(ratio))))


def _search_band(energies: np.ndarray, target: float, k_fit: float) -> int:
    if len(energies) == 0 or not np.any(energies > 0):
        return 0
    # est(g) is non-increasing in g and bounded below by k_fit * n_quads
    goal = max(float(target), k_fit * len(energies))

    def est(g_db):
        return estimate_bits(energies, LEVEL_REF * 10.0 ** (g_db / 20.0), k_fit)

    lo, hi = SF_MIN_DB, SF_MAX_DB
    if est(lo) <= goal:
        return 0
    if est(hi) > goal:
        return SF_LEVELS - 1
    for _ in range(SEARCH_ITERATIONS):
        mid = 0.5 * (lo + hi)
        if est(mid) > goal:
            lo = mid
        else:
            hi = mid
    return int(np.clip(np.floor((hi - SF_MIN_DB) / SF_STEP_DB + 0.5), 0, SF_LEVELS - 1))


def scale_factor_search(band_energies, targets, k_fit: float = 1.0) -> np.ndarray:
    """Pick one scale-factor index per band so estimated bits meet the target.

    ``band_energies`` is a sequence of per-band quadruple energy arrays.
    Each band is searched independently by bisection over the gain in dB;
    the smallest gain whose estimate does not exceed the target wins.
    """
    return np.array([_search_band(np.asarray(e, dtype=np.float64), t, k_fit)
                     for e, t in zip(band_energies, targets)], dtype=np.int64)


def band_quad_energies(coeffs, config: CodecConfig):
    coeffs = np.asarray(coeffs)
    return [quad_energies(coeffs[s]) for s in config.band_slices()]


def apply_scaling(coeffs, sf_indices, config: CodecConfig) -> np.ndarray:
    out = np.array(coeffs, copy=True)
    for s, gain in zip(config.band_slices(), sf_to_gain(sf_indices)):
        out[s] = out[s] / gain
    return out


def remove_scaling(coeffs, sf_indices, config: CodecConfig) -> np.ndarray:
    out = np.array(coeffs, copy=True)
    for s, gain in zip(config.band_slices(), sf_to_gain(sf_indices)):
        out[s] = out[s] * gain
    return out
