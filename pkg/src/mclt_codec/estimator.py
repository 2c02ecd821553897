"""scikit-learn style wrappers around the codec and the VQ trainer.

``MCLTCodec`` treats one row of ``X`` as one clip: ``transform`` runs the
full encode/decode chain and returns the reconstruction, ``score`` is the
mean segmental SNR. ``MultiStageVQ`` exposes LBG training and multi-stage
search as ``fit``/``transform``/``inverse_transform``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .codec import FORCE_CHOICES, decode_stream, encode_stream
from .config import CodecConfig
from .metrics import segsnr
from .vq import Codebook, default_codebooks, lbg_train, msvq_decode, nearest


def check_signals(X) -> tuple[np.ndarray, bool]:
    """Validate audio input; returns a 2-D ``(n_clips, n_samples)`` view and
    whether the input was a single 1-D clip."""
    arr = np.asarray(X)
    single = arr.ndim == 1
    arr = check_array(arr.reshape(1, -1) if single else arr, dtype=np.float64,
                      ensure_min_samples=1, ensure_min_features=1)
    return arr, single


class MCLTCodec(TransformerMixin, BaseEstimator):
    """Encode/decode round trip as a transformer.

    Parameters mirror the CLI: ``bit_budget_scale`` scales every per-band
    bit target, ``force_ctns`` overrides the per-frame decision, ``tdaa``
    toggles aliasing augmentation in the decoder.
    """

    def __init__(self, bit_budget_scale: float = 1.0, force_ctns: str = "auto",
                 tdaa: bool = True, bypass_quant: bool = False, codebook_dir=None):
        self.bit_budget_scale = bit_budget_scale
        self.force_ctns = force_ctns
        self.tdaa = tdaa
        self.bypass_quant = bypass_quant
        self.codebook_dir = codebook_dir

    def fit(self, X=None, y=None):
        if self.force_ctns not in FORCE_CHOICES:
            raise ValueError(f"force_ctns must be one of {FORCE_CHOICES}")
        if X is not None:
            check_signals(X)
        self.config_ = CodecConfig(bit_budget_scale=float(self.bit_budget_scale))
        self.codebooks_ = default_codebooks(self.codebook_dir)
        return self

    def encode(self, x) -> bytes:
        check_is_fitted(self, "config_")
        arr, single = check_signals(x)
        if not single and arr.shape[0] != 1:
            raise ValueError("encode takes one clip")
        return encode_stream(arr[0], self.config_, self.codebooks_, self.force_ctns,
                             self.bypass_quant).data

    def decode(self, data: bytes) -> np.ndarray:
        check_is_fitted(self, "config_")
        return decode_stream(data, self.config_, self.codebooks_, tdaa=self.tdaa)

    def transform(self, X):
        arr, single = check_signals(X)
        out = np.stack([self.decode(self.encode(row)) for row in arr])
        return out[0] if single else out

    def score(self, X, y=None) -> float:
        """Mean segmental SNR (dB) of the reconstruction over all clips."""
        arr, _ = check_signals(X)
        rec = np.atleast_2d(self.transform(arr))
        return float(np.mean([segsnr(a, b).mean for a, b in zip(arr, rec)]))


class MultiStageVQ(TransformerMixin, BaseEstimator):
    def __init__(self, n_bits: int = 10, n_stages: int = 2, max_iter: int = 50,
                 tol: float = 1e-6, random_state: int = 0):
        self.n_bits = n_bits
        self.n_stages = n_stages
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        self.codebook_ = lbg_train(X, self.n_bits, self.n_stages, self.random_state,
                                   self.max_iter, self.tol)
        self.n_features_in_ = X.shape[1]
        return self

    @classmethod
    def from_codebook(cls, codebook: Codebook) -> "MultiStageVQ":
        bits = set(codebook.bits)
        if len(bits) != 1:
            raise ValueError("stages of different sizes are not supported")
        vq = cls(n_bits=bits.pop(), n_stages=len(codebook.stages))
        vq.codebook_ = codebook
        vq.n_features_in_ = codebook.dim
        return vq

    def transform(self, X, weights=None) -> np.ndarray:
        """Greedy stage-by-stage indices, shape ``(n_vectors, n_stages)``."""
        check_is_fitted(self, "codebook_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        residual = X.copy()
        out = np.empty((len(X), len(self.codebook_.stages)), dtype=np.int64)
        for s, stage in enumerate(self.codebook_.stages):
            out[:, s], _ = nearest(residual, stage, weights)
            residual -= stage[out[:, s]]
        return out

    def inverse_transform(self, indices) -> np.ndarray:
        check_is_fitted(self, "codebook_")
        indices = check_array(indices, dtype=np.int64)
        return np.stack([msvq_decode(tuple(row), self.codebook_) for row in indices])

    def score(self, X, y=None) -> float:
        """Negative mean squared reconstruction error."""
        X = check_array(X, dtype=np.float64)
        rec = self.inverse_transform(self.transform(X))
        return -float(np.mean(np.sum((X - rec) ** 2, axis=1)))
