"""PCM WAV input/output and hop-sized framing."""

from __future__ import annotations

import wave
from dataclasses import dataclass

import numpy as np

FULL_SCALE = 32768.0
MAX_SAMPLE = 1.0 - 2.0 ** -15


class WavFormatError(ValueError):
    """The file is not 16-bit PCM WAV."""


class ChannelError(WavFormatError):
    """The file has more than one channel (no downmix is performed)."""


@dataclass(frozen=True)
class AudioFrame:
    index: int
    samples: np.ndarray


def read_wav(path):
    """Read a 16-bit mono PCM WAV file.

    Returns ``(sample_rate, samples)`` with samples scaled to [-1, 1).
    """
    try:
        with wave.open(str(path), "rb") as fh:
            channels = fh.getnchannels()
            width = fh.getsampwidth()
            rate = fh.getframerate()
            raw = fh.readframes(fh.getnframes())
    except wave.Error as exc:
        raise WavFormatError(f"{path}: {exc}") from exc
    if width != 2:
        raise WavFormatError(f"{path}: expected 16-bit PCM, got {8 * width}-bit")
    if channels != 1:
        raise ChannelError(f"{path}: expected mono, got {channels} channels")
    ints = np.frombuffer(raw, dtype="<i2")
    return rate, ints.astype(np.float64) / FULL_SCALE


def quantize16(samples) -> np.ndarray:
    """Clip to [-1, 1 - 2^-15] and round half away from zero to int16."""
    x = np.clip(np.asarray(samples, dtype=np.float64), -1.0, MAX_SAMPLE) * FULL_SCALE
    return (np.sign(x) * np.floor(np.abs(x) + 0.5)).astype(np.int16)


def write_wav(path, samples, sample_rate: int) -> None:
    samples = np.asarray(samples, dtype=np.float64)
    if not np.all(np.isfinite(samples)):
        raise ValueError("samples must be finite")
    data = quantize16(samples).astype("<i2").tobytes()
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(int(sample_rate))
        fh.writeframes(data)


def frame_stream(samples, hop_n: int) -> list[AudioFrame]:
    """Cut ``samples`` into hop-sized frames.

    The last partial frame is zero padded and one all-zero flush frame is
    appended so that overlap-add can emit the final hop.
    """
    samples = np.asarray(samples, dtype=np.float64).ravel()
    n_data = -(-len(samples) // hop_n)
    padded = np.zeros((n_data + 1) * hop_n)
    padded[: len(samples)] = samples
    return [AudioFrame(i, padded[i * hop_n:(i + 1) * hop_n]) for i in range(n_data + 1)]
