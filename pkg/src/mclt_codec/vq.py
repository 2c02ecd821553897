"""Multi-stage vector quantization of LSFs and complex LPC roots.

Codebook file layout (little endian)::

    b"MCVQ1" | u32 dim | u32 stages | u32 bits[stages] | f32 centroids...

Centroids are stored stage by stage, ``2**bits[s]`` rows of ``dim``.
"""

from __future__ import annotations

import io
import logging
import os
import struct
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .lp_analysis import ROOT_CLAMP, ComplexLpModel, LSF_HIGH, LSF_LOW, repair_lsf

logger = logging.getLogger(__name__)

MAGIC = b"MCVQ1"
CODEBOOK_DIR_ENV = "MCLT_CODEBOOK_DIR"
LSF_CODEBOOK = "lsf.mcvq"
ROOT_CODEBOOK = "roots.mcvq"
MIN_VECTORS_PER_CENTROID = 8
_CHUNK = 2048


class CodebookError(ValueError):
    pass


@dataclass
class Codebook:
    stages: list

    def __post_init__(self):
        self.stages = [np.ascontiguousarray(s, dtype=np.float32) for s in self.stages]
        dims = {s.shape[1] for s in self.stages}
        if len(dims) != 1:
            raise CodebookError("all stages must share one dimension")
        for s in self.stages:
            n = s.shape[0]
            if n & (n - 1) or n == 0:
                raise CodebookError(f"stage size {n} is not a power of two")
            if not np.all(np.isfinite(s)):
                raise CodebookError("codebook contains non-finite entries")

    @property
    def dim(self) -> int:
        return self.stages[0].shape[1]

    @property
    def bits(self) -> tuple:
        return tuple(int(s.shape[0]).bit_length() - 1 for s in self.stages)

    def to_bytes(self) -> bytes:
        head = MAGIC + struct.pack("<II", self.dim, len(self.stages))
        head += struct.pack(f"<{len(self.stages)}I", *self.bits)
        return head + b"".join(s.astype("<f4").tobytes() for s in self.stages)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Codebook":
        buf = io.BytesIO(data)
        if buf.read(len(MAGIC)) != MAGIC:
            raise CodebookError("bad codebook magic")
        try:
            dim, n_stages = struct.unpack("<II", buf.read(8))
            bits = struct.unpack(f"<{n_stages}I", buf.read(4 * n_stages))
        except struct.error as exc:
            raise CodebookError("truncated codebook header") from exc
        stages = []
        for b in bits:
            count = (1 << b) * dim
            raw = buf.read(4 * count)
            if len(raw) != 4 * count:
                raise CodebookError("truncated codebook body")
            stages.append(np.frombuffer(raw, dtype="<f4").reshape(1 << b, dim))
        if buf.read(1):
            raise CodebookError("trailing bytes after codebook")
        return cls(stages)

    def save(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path) -> "Codebook":
        return cls.from_bytes(Path(path).read_bytes())


def nearest(vectors, centroids, weights=None):
    """Index of and squared (weighted) distance to the closest centroid, per row."""
    vectors = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
    centroids = np.asarray(centroids, dtype=np.float64)
    if weights is None:
        weights = np.ones_like(vectors)
    weights = np.broadcast_to(np.asarray(weights, dtype=np.float64), vectors.shape)
    index = np.empty(len(vectors), dtype=np.int64)
    dist = np.empty(len(vectors))
    c2 = centroids ** 2
    for start in range(0, len(vectors), _CHUNK):
        v = vectors[start:start + _CHUNK]
        w = weights[start:start + _CHUNK]
        d = (np.sum(w * v * v, axis=1)[:, None] - 2.0 * (w * v) @ centroids.T + w @ c2.T)
        idx = np.argmin(d, axis=1)
        index[start:start + _CHUNK] = idx
        diff = v - centroids[idx]
        dist[start:start + _CHUNK] = np.sum(w * diff * diff, axis=1)
    return index, dist


def _lloyd(data, centroids, max_iter, tol):
    prev = np.inf
    for _ in range(max_iter):
        idx, dist = nearest(data, centroids)
        distortion = dist.mean()
        counts = np.bincount(idx, minlength=len(centroids))
        sums = np.zeros_like(centroids)
        np.add.at(sums, idx, data)
        filled = counts > 0
        centroids[filled] = sums[filled] / counts[filled, None]
        empty = np.flatnonzero(~filled)
        if len(empty):
            # reseed empty cells with the worst-represented training vectors
            worst = np.argsort(dist)[::-1][: len(empty)]
            centroids[empty] = data[worst]
        if distortion == 0.0 or (prev - distortion) <= tol * distortion:
            break
        prev = distortion
    return centroids


def _train_stage(data, bits, rng, max_iter, tol):
    centroids = data.mean(axis=0, keepdims=True)
    spread = data.std(axis=0) + 1e-9
    for _ in range(bits):
        delta = 1e-3 * spread * rng.choice([-1.0, 1.0], size=centroids.shape)
        centroids = np.concatenate([centroids + delta, centroids - delta])
        centroids = _lloyd(data, centroids, max_iter, tol)
    return centroids


def lbg_train(training_vectors, bits: int, stages: int, seed: int = 0,
              max_iter: int = 50, tol: float = 1e-6) -> Codebook:
    """Binary-split LBG training of a multi-stage codebook.

    Stage ``s`` is trained on the residuals left by stages ``< s``.
    """
    data = np.asarray(training_vectors, dtype=np.float64)
    required = MIN_VECTORS_PER_CENTROID * (1 << bits)
    if data.ndim != 2 or len(data) < required:
        raise CodebookError(
            f"need at least {required} training vectors for {bits}-bit stages, got {len(data)}")
    rng = np.random.default_rng(seed)
    residual = data.copy()
    books = []
    for stage in range(stages):
        book = _train_stage(residual, bits, rng, max_iter, tol).astype(np.float32)
        idx, _ = nearest(residual, book)
        residual = residual - book[idx].astype(np.float64)
        logger.info("stage %d: distortion %.6g", stage, np.mean(np.sum(residual ** 2, axis=1)))
        books.append(book)
    return Codebook(books)


def msvq_encode(v, codebook: Codebook, weights=None) -> tuple:
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (codebook.dim,):
        raise CodebookError(f"vector dimension {v.shape} does not match codebook {codebook.dim}")
    residual = v.copy()
    indices = []
    for stage in codebook.stages:
        idx, _ = nearest(residual, stage, None if weights is None else weights[None, :])
        indices.append(int(idx[0]))
        residual = residual - stage[idx[0]]
    return tuple(indices)


def msvq_decode(indices, codebook: Codebook) -> np.ndarray:
    if len(indices) != len(codebook.stages):
        raise CodebookError(f"expected {len(codebook.stages)} indices, got {len(indices)}")
    out = np.zeros(codebook.dim)
    for i, stage in zip(indices, codebook.stages):
        if not 0 <= i < len(stage):
            raise CodebookError(f"index {i} out of range for a {len(stage)}-entry stage")
        out += stage[i]
    return out


def lsf_weights(lsf) -> np.ndarray:
    """Inverse adjacent-gap weights; closely spaced LSFs (formants) count more."""
    ext = np.concatenate([[0.0], np.asarray(lsf, dtype=np.float64), [np.pi]])
    gaps = np.maximum(np.diff(ext), 1e-4)
    return 1.0 / gaps[:-1] + 1.0 / gaps[1:]


def quantize_lsf(lsf, codebook: Codebook) -> tuple:
    lsf = np.clip(np.asarray(lsf, dtype=np.float64), LSF_LOW, LSF_HIGH)
    return msvq_encode(lsf, codebook, lsf_weights(lsf))


def dequantize_lsf(indices, codebook: Codebook) -> np.ndarray:
    return repair_lsf(msvq_decode(indices, codebook))


def roots_to_vector(roots) -> np.ndarray:
    """Interleaved ``(magnitude, phase)`` pairs sorted by ascending phase."""
    roots = np.asarray(roots, dtype=np.complex128)
    mag = np.abs(roots)
    phase = np.angle(roots)
    phase = np.where(phase <= -np.pi, np.pi, phase)
    phase = np.where(mag == 0, 0.0, phase)
    order = np.lexsort((mag, phase))
    return np.column_stack([mag[order], phase[order]]).ravel()


def vector_to_roots(vector) -> np.ndarray:
    pairs = np.asarray(vector, dtype=np.float64).reshape(-1, 2)
    mag = np.clip(pairs[:, 0], 0.0, ROOT_CLAMP)
    return mag * np.exp(1j * pairs[:, 1])


def quantize_roots(model, codebook: Codebook) -> tuple:
    roots = model.roots if isinstance(model, ComplexLpModel) else model
    return msvq_encode(roots_to_vector(roots), codebook)


def dequantize_roots(indices, codebook: Codebook) -> ComplexLpModel:
    roots = vector_to_roots(msvq_decode(indices, codebook))
    return ComplexLpModel.from_roots(roots, indices=tuple(indices))


def codebook_dir() -> Path:
    env = os.environ.get(CODEBOOK_DIR_ENV)
    if env:
        return Path(env)
    return Path(__file__).resolve().parent / "data"


@lru_cache(maxsize=8)
def _load_cached(path: str) -> Codebook:
    return Codebook.load(path)


def load_codebook(name: str, directory=None) -> Codebook:
    path = Path(directory) if directory is not None else codebook_dir()
    path = path / name
    if not path.exists():
        raise FileNotFoundError(
            f"codebook {path} not found; run `mclt-codec train-vq` or set {CODEBOOK_DIR_ENV}")
    return _load_cached(str(path))


def default_codebooks(directory=None):
    """``(lsf_codebook, root_codebook)`` from the package data or ``MCLT_CODEBOOK_DIR``."""
    return load_codebook(LSF_CODEBOOK, directory), load_codebook(ROOT_CODEBOOK, directory)
