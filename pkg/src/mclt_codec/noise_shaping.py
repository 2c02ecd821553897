"""Frequency-domain noise shaping and complex temporal noise shaping (CTNS).

FDNS divides the spectrum by the envelope of the quantized LPC. CTNS runs a
complex prediction-error filter across ascending frequency bins at the
encoder and the matching all-pole recursion at the decoder; both only ever
see models rebuilt from quantized indices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .lp_analysis import (ComplexLpModel, FreqEnvelope, autocorr, is_degenerate, levinson,
                          poly_roots, stabilize_roots, weight_lpc)
from .vq import Codebook, dequantize_roots, quantize_roots

GAIN_CAP_DB = 99.0
NO_GAIN_DB = -np.inf
_BAND_ENERGY_FLOOR = 1e-20


@dataclass
class CtnsDecision:
    active: bool
    prediction_gain_db: float
    model: ComplexLpModel | None = None


def fdns_apply(X, envelope: FreqEnvelope) -> np.ndarray:
    return np.asarray(X) / envelope.H


def fdns_invert(R, envelope: FreqEnvelope) -> np.ndarray:
    return np.asarray(R) * envelope.H


def prediction_gain(band, a) -> float:
    """Input over prediction-error energy in dB.

    The first ``order`` outputs are excluded from both sums.
    """
    band = np.asarray(band)
    a = np.asarray(a)
    order = len(a) - 1
    err = lfilter(a, [1.0], band)
    num = np.sum(np.abs(band[order:]) ** 2)
    den = np.sum(np.abs(err[order:]) ** 2)
    if den <= 0.0:
        return GAIN_CAP_DB if num > 0 else 0.0
    if num <= 0.0:
        return NO_GAIN_DB
    return float(min(10.0 * np.log10(num / den), GAIN_CAP_DB))


def ctns_model(band, order: int, gamma: float):
    """Unquantized, weighted and stabilized complex LPC of a frequency band."""
    r = autocorr(np.asarray(band, dtype=np.complex128), order, taper=None)
    if is_degenerate(r):
        return None
    result = levinson(r)
    weighted = weight_lpc(result.a, gamma)
    roots = stabilize_roots(poly_roots(weighted))
    model = ComplexLpModel.from_roots(roots)
    model.prediction_error = result.error
    return model


def ctns_analyze(R, codebook: Codebook, start_bin: int = 25, order: int = 10,
                 gamma: float = 0.94, threshold_db: float = -3.0) -> CtnsDecision:
    """Decide whether CTNS is worth switching on for this residual spectrum.

    The gain is measured with the model rebuilt from the quantized root
    indices, so the decision can be mirrored exactly by the decoder side
    of the toolchain.
    """
    band = np.asarray(R, dtype=np.complex128)[start_bin:]
    if len(band) <= order or np.sum(np.abs(band) ** 2) < _BAND_ENERGY_FLOOR:
        return CtnsDecision(False, NO_GAIN_DB)
    model = ctns_model(band, order, gamma)
    if model is None:
        return CtnsDecision(False, NO_GAIN_DB)
    quantized = dequantize_roots(quantize_roots(model, codebook), codebook)
    gain = prediction_gain(band, quantized.a)
    return CtnsDecision(bool(gain > threshold_db), gain, quantized)


def ctns_filter(R, model: ComplexLpModel, start_bin: int) -> np.ndarray:
    """Prediction-error (all-zero) filtering of bins ``start_bin`` upwards."""
    out = np.array(R, dtype=np.complex128)
    out[start_bin:] = lfilter(model.a, [1.0], out[start_bin:])
    return out


def ctns_inverse(Rf, model: ComplexLpModel, start_bin: int) -> np.ndarray:
    """All-pole recursion undoing :func:`ctns_filter`."""
    if len(model.roots) and np.max(np.abs(model.roots)) >= 1.0:
        raise ValueError("refusing to run an unstable CTNS synthesis filter")
    out = np.array(Rf, dtype=np.complex128)
    out[start_bin:] = lfilter([1.0], model.a, out[start_bin:])
    return out
