"""Seeded synthetic test material standing in for licensed test items.

Every generator returns a :class:`Clip` holding the signal, the sample
positions of its onsets (empty for stationary material) and its kind.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

SAMPLE_RATE = 12800
KINDS = ("castanet", "tone", "speechlike", "mix", "switching")


@dataclass
class Clip:
    signal: np.ndarray
    onsets: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    kind: str = ""


def _click(rng, length: int, fs: int) -> np.ndarray:
    """A castanet-like burst: instantaneous attack, damped resonances."""
    t = np.arange(length) / fs
    out = np.zeros(length)
    for _ in range(rng.integers(2, 4)):
        freq = rng.uniform(900.0, 5000.0)
        decay = rng.uniform(0.003, 0.012)
        out += rng.uniform(0.4, 1.0) * np.exp(-t / decay) * np.sin(2 * np.pi * freq * t
                                                                   + rng.uniform(0, 2 * np.pi))
    out += 0.3 * np.exp(-t / 0.0015) * rng.standard_normal(length)
    return out / np.max(np.abs(out))


def castanet(seed: int, duration: float = 2.0, fs: int = SAMPLE_RATE, hop: int = 512,
             level: float = 0.5, background: float = 1e-3) -> Clip:
    """Clicks over a faint noise floor, at least two hops apart."""
    rng = np.random.default_rng(seed)
    n = int(round(duration * fs))
    signal = background * rng.standard_normal(n)
    onsets = []
    pos = int(rng.integers(hop, 2 * hop))
    while pos < n - hop:
        onsets.append(pos)
        burst = _click(rng, min(n - pos, int(0.06 * fs)), fs)
        signal[pos:pos + len(burst)] += level * rng.uniform(0.6, 1.0) * burst
        pos += int(rng.integers(2 * hop, 4 * hop))
    return Clip(signal, np.array(onsets, dtype=np.int64), "castanet")


def tone(seed: int, duration: float = 2.0, fs: int = SAMPLE_RATE, level: float = 0.3) -> Clip:
    """One to three steady sinusoids."""
    rng = np.random.default_rng(seed)
    n = int(round(duration * fs))
    t = np.arange(n) / fs
    signal = np.zeros(n)
    for _ in range(rng.integers(1, 4)):
        freq = rng.uniform(150.0, 4000.0)
        signal += rng.uniform(0.3, 1.0) * np.sin(2 * np.pi * freq * t + rng.uniform(0, 2 * np.pi))
    signal *= level / np.max(np.abs(signal))
    return Clip(signal, kind="tone")


def _formant_filter(rng, fs: int):
    poles = []
    for f in sorted(rng.uniform([250, 900, 2000, 3000], [900, 2000, 3000, 4500])):
        bw = rng.uniform(60.0, 200.0)
        r = np.exp(-np.pi * bw / fs)
        poles.append(r * np.exp(2j * np.pi * f / fs))
    poles = np.concatenate([poles, np.conj(poles)])
    return np.real(np.poly(poles))


def speechlike(seed: int, duration: float = 2.0, fs: int = SAMPLE_RATE,
               level: float = 0.4) -> Clip:
    """Syllables of pulse-train or noise excitation through formant filters."""
    rng = np.random.default_rng(seed)
    n = int(round(duration * fs))
    signal = np.zeros(n)
    onsets = []
    pos = 0
    while pos < n:
        length = int(rng.uniform(0.12, 0.3) * fs)
        stop = min(n, pos + length)
        seg_len = stop - pos
        if rng.random() < 0.75:
            f0 = rng.uniform(90.0, 240.0)
            vibrato = 1.0 + 0.03 * np.sin(2 * np.pi * rng.uniform(3, 6) * np.arange(seg_len) / fs)
            phase = np.cumsum(f0 * vibrato / fs)
            excitation = (np.diff(np.floor(phase), prepend=0.0) > 0).astype(float)
            excitation += 0.02 * rng.standard_normal(seg_len)
        else:
            excitation = 0.3 * rng.standard_normal(seg_len)
        seg = lfilter([1.0], _formant_filter(rng, fs), excitation)
        env = np.minimum(1.0, np.arange(seg_len) / (0.01 * fs))
        env *= np.minimum(1.0, (seg_len - np.arange(seg_len)) / (0.03 * fs))
        seg = seg * env
        peak = np.max(np.abs(seg))
        if peak > 0:
            signal[pos:stop] = seg / peak * rng.uniform(0.4, 1.0)
        onsets.append(pos)
        pos = stop + int(rng.uniform(0.02, 0.1) * fs)
    signal *= level / max(np.max(np.abs(signal)), 1e-12)
    return Clip(signal, np.array(onsets, dtype=np.int64), "speechlike")


def switching(seed: int, duration: float = 2.0, fs: int = SAMPLE_RATE, hop: int = 512) -> Clip:
    """A steady tone bed with clicks on top, so coding modes alternate."""
    rng = np.random.default_rng(seed)
    bed = tone(int(rng.integers(2 ** 31)), duration, fs, level=0.15).signal
    clicks = castanet(int(rng.integers(2 ** 31)), duration, fs, hop, level=0.6, background=0.0)
    return Clip(bed + clicks.signal, clicks.onsets, "switching")


def mix(seed: int, duration: float = 2.0, fs: int = SAMPLE_RATE, hop: int = 512) -> Clip:
    rng = np.random.default_rng(seed)
    speech = speechlike(int(rng.integers(2 ** 31)), duration, fs, level=0.3)
    music = tone(int(rng.integers(2 ** 31)), duration, fs, level=0.1)
    clicks = castanet(int(rng.integers(2 ** 31)), duration, fs, hop, level=0.3, background=0.0)
    return Clip(speech.signal + music.signal + clicks.signal, clicks.onsets, "mix")


_GENERATORS = {
    "castanet": castanet,
    "tone": tone,
    "speechlike": speechlike,
    "mix": mix,
    "switching": switching,
}


def generate(kind: str, seed: int, duration: float = 2.0) -> Clip:
    try:
        return _GENERATORS[kind](seed, duration)
    except KeyError:
        raise ValueError(f"unknown corpus kind {kind!r}; choose from {KINDS}") from None


def transient_frames(onsets, hop: int, n_frames: int) -> np.ndarray:
    """Indices of frames whose buffer centre half contains an onset.

    Frame ``v`` covers samples ``[(v-1) hop, (v+1) hop)``; its centre half is
    ``[(v-1) hop + hop/2, v hop + hop/2)`` so every onset maps to one frame.
    """
    frames = (np.asarray(onsets) + hop // 2) // hop
    return np.unique(frames[(frames >= 0) & (frames < n_frames)])
