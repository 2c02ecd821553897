"""Objective quality measures: segmental SNR and a pre-echo index."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SEGSNR_MIN_DB = -10.0
SEGSNR_MAX_DB = 65.0
PREECHO_FLOOR_DB = -99.0


@dataclass
class SegSnrReport:
    segments: list = field(default_factory=list)
    mean: float = float("nan")
    seg_len: int = 512

    def __float__(self) -> float:
        return float(self.mean)


def _pair(reference, test):
    ref = np.asarray(reference, dtype=np.float64).ravel()
    tst = np.asarray(test, dtype=np.float64).ravel()
    if ref.shape != tst.shape:
        raise ValueError(f"length mismatch: reference {ref.size}, test {tst.size}")
    return ref, tst


def segsnr(reference, test, seg_len: int = 512) -> SegSnrReport:
    """Mean of per-segment SNRs, each clamped to [-10, 65] dB.

    Segments are non-overlapping; a trailing partial segment counts as its
    own segment. Segments where the reference is silent are skipped.
    """
    if seg_len < 1:
        raise ValueError("seg_len must be positive")
    ref, tst = _pair(reference, test)
    n_seg = -(-ref.size // seg_len)
    pad = n_seg * seg_len - ref.size
    ref_seg = np.pad(ref, (0, pad)).reshape(n_seg, seg_len)
    err_seg = np.pad(ref - tst, (0, pad)).reshape(n_seg, seg_len)
    signal = np.sum(ref_seg ** 2, axis=1)
    noise = np.sum(err_seg ** 2, axis=1)
    keep = signal > 0
    with np.errstate(divide="ignore"):
        snr = 10.0 * np.log10(signal[keep]) - 10.0 * np.log10(noise[keep])
    snr = np.clip(snr, SEGSNR_MIN_DB, SEGSNR_MAX_DB)
    mean = float(np.mean(snr)) if snr.size else float("nan")
    return SegSnrReport([float(s) for s in snr], mean, seg_len)


def preecho_index(reference, test, onsets, window: int = 256) -> float:
    """Pre-onset error power relative to the overall error power, in dB.

    The error power in the ``window`` samples before each onset is pooled
    and compared with the mean error power of the whole signal. Lower is
    better; an error-free pre-onset region returns the -99 dB floor.
    """
    ref, tst = _pair(reference, test)
    err = (ref - tst) ** 2
    mask = np.zeros(ref.size, dtype=bool)
    for onset in np.asarray(onsets, dtype=np.int64).ravel():
        lo, hi = max(0, onset - window), min(ref.size, onset)
        mask[lo:hi] = True
    if not mask.any():
        raise ValueError("no pre-onset samples inside the signal")
    overall = float(np.mean(err))
    pre = float(np.mean(err[mask]))
    if overall <= 0.0 or pre <= 0.0:
        return PREECHO_FLOOR_DB
    return max(PREECHO_FLOOR_DB, 10.0 * np.log10(pre / overall))
