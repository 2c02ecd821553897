"""Training-vector extraction from the synthetic corpus and codebook training."""

from __future__ import annotations

import logging
from itertools import count

import numpy as np

from . import corpus
from .config import CodecConfig
from .lp_analysis import analyze_real, freq_envelope, lsf_to_lpc
from .noise_shaping import ctns_model, fdns_apply
from .transforms import mclt_forward, sine_window
from .vq import (Codebook, LSF_CODEBOOK, ROOT_CODEBOOK, dequantize_lsf, lbg_train,
                 quantize_lsf, roots_to_vector)

logger = logging.getLogger(__name__)

TRAINING_KINDS = ("speechlike", "mix", "castanet", "tone", "switching")
_MIN_BUFFER_ENERGY = 1e-10


def _buffers(seed: int, config: CodecConfig, duration: float = 4.0):
    """Endless stream of analysis buffers drawn round-robin from the corpus kinds."""
    hop = config.hop_n
    for i in count():
        kind = TRAINING_KINDS[i % len(TRAINING_KINDS)]
        clip = corpus.generate(kind, seed * 100003 + i, duration)
        padded = np.concatenate([np.zeros(hop), clip.signal])
        for start in range(0, len(padded) - 2 * hop + 1, hop):
            buffer = padded[start:start + 2 * hop]
            if np.sum(buffer ** 2) > _MIN_BUFFER_ENERGY:
                yield buffer


def lsf_training_vectors(n_vectors: int, seed: int = 0,
                         config: CodecConfig | None = None) -> np.ndarray:
    config = config or CodecConfig()
    out = []
    for buffer in _buffers(seed, config):
        out.append(analyze_real(buffer, config.lpc_order_fdns).lsf)
        if len(out) >= n_vectors:
            break
    return np.array(out)


def root_training_vectors(n_vectors: int, lsf_codebook: Codebook, seed: int = 0,
                          config: CodecConfig | None = None) -> np.ndarray:
    """Phase-sorted root vectors of the CTNS model, computed as the encoder would."""
    config = config or CodecConfig()
    window = sine_window(config.window_len)
    out = []
    for buffer in _buffers(seed, config):
        lp = analyze_real(buffer, config.lpc_order_fdns)
        a_q = lsf_to_lpc(dequantize_lsf(quantize_lsf(lp.lsf, lsf_codebook), lsf_codebook))
        envelope = freq_envelope(a_q, config.weight_fdns, config.num_bins)
        R = fdns_apply(mclt_forward(window * buffer), envelope)
        model = ctns_model(R[config.ctns_start_bin:], config.lpc_order_ctns, config.weight_ctns)
        if model is None:
            continue
        out.append(roots_to_vector(model.roots))
        if len(out) >= n_vectors:
            break
    return np.array(out)


def train_codebook(kind: str, seed: int = 0, config: CodecConfig | None = None,
                   lsf_codebook: Codebook | None = None, oversample: int = 2) -> Codebook:
    """Train the ``"lsf"`` or ``"roots"`` codebook on the synthetic corpus.

    Root training needs the LSF codebook because the encoder shapes the
    spectrum with the quantized envelope before the CTNS analysis.
    """
    config = config or CodecConfig()
    if kind == "lsf":
        n = oversample * 8 * (1 << config.lsf_bits)
        data = lsf_training_vectors(n, seed, config)
        logger.info("training LSF codebook on %d vectors", len(data))
        return lbg_train(data, config.lsf_bits, config.lsf_stages, seed)
    if kind == "roots":
        if lsf_codebook is None:
            raise ValueError("root training needs an LSF codebook")
        n = oversample * 8 * (1 << config.root_bits)
        data = root_training_vectors(n, lsf_codebook, seed, config)
        logger.info("training root codebook on %d vectors", len(data))
        return lbg_train(data, config.root_bits, config.root_stages, seed)
    raise ValueError(f"unknown codebook kind {kind!r}")


CODEBOOK_FILES = {"lsf": LSF_CODEBOOK, "roots": ROOT_CODEBOOK}
