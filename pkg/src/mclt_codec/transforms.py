"""Sine window, MDCT/MCLT kernels, overlap-add and aliasing augmentation.

Conventions, with ``N = hop`` and a ``2N`` input buffer ``b``::

    C[k, n] = sqrt(1/N) cos(pi/N (n + (N+1)/2) (k + 1/2))
    S[k, n] = sqrt(1/N) sin(pi/N (n + (N+1)/2) (k + 1/2))

``C C^T = S S^T = I`` so ``C^T C`` is an orthogonal projection (the
aliasing operator) and ``C^T C + S^T S = I``. The MCLT is ``C b + i S b``
and its inverse ``C^T Re + S^T Im`` returns the windowed buffer without
aliasing. All kernels run through length-``2N`` FFTs.

Because ``C^T C = (I + A) / 2`` for the folding operator ``A``, aliased
halves enter the overlap-add with a gain of 2 (:data:`ALIAS_GAIN`); clean
MCLT halves enter as they are.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

MDCT = False
MCLT = True
ALIAS_GAIN = 2.0


def sine_window(window_len: int) -> np.ndarray:
    n = np.arange(window_len)
    return np.sin(np.pi * (n + 0.5) / window_len)


@lru_cache(maxsize=16)
def _twiddles(n_half: int):
    n = np.arange(2 * n_half)
    k = np.arange(n_half)
    n0 = (n_half + 1) / 2.0
    scale = np.sqrt(1.0 / n_half)
    pre = np.exp(1j * np.pi * n / (2 * n_half))
    post = scale * np.exp(1j * np.pi * n0 * (k + 0.5) / n_half)
    syn_pre = np.exp(1j * np.pi * n0 * k / n_half)
    syn_post = scale * np.exp(1j * np.pi * (n + n0) / (2 * n_half))
    return pre, post, syn_pre, syn_post


def _check_buffer(buffer) -> np.ndarray:
    buffer = np.asarray(buffer, dtype=np.float64)
    if buffer.ndim != 1 or len(buffer) == 0 or len(buffer) % 2:
        raise ValueError(f"buffer must be 1-D with even length, got shape {buffer.shape}")
    return buffer


def mclt_forward(buffer) -> np.ndarray:
    """Complex lapped transform of a windowed ``2N`` buffer -> ``N`` bins."""
    buffer = _check_buffer(buffer)
    n_half = len(buffer) // 2
    pre, post, _, _ = _twiddles(n_half)
    spec = np.fft.ifft(buffer * pre) * (2 * n_half)
    return post * spec[:n_half]


def mdct_forward(buffer) -> np.ndarray:
    return mclt_forward(buffer).real


def _synthesis(coeffs: np.ndarray) -> np.ndarray:
    n_half = len(coeffs)
    _, _, syn_pre, syn_post = _twiddles(n_half)
    padded = np.zeros(2 * n_half, dtype=np.complex128)
    padded[:n_half] = coeffs * syn_pre
    return syn_post * np.fft.ifft(padded) * (2 * n_half)


def imdct(coeffs):
    """``C^T coeffs`` split into the (aliased) left and right halves."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    out = _synthesis(coeffs.astype(np.complex128)).real
    n_half = len(coeffs)
    return out[:n_half], out[n_half:]


def imclt(coeffs):
    """Alias-free inverse of :func:`mclt_forward`, returned as two halves."""
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    # C^T a + S^T b == Re(synth(a - i b))
    out = _synthesis(np.conj(coeffs)).real
    n_half = len(coeffs)
    return out[:n_half], out[n_half:]


def tdaa_augment(y1, y2):
    """Inject MDCT-style aliasing into clean halves: ``C^T C [y1; y2]``."""
    y = np.concatenate([np.asarray(y1, dtype=np.float64), np.asarray(y2, dtype=np.float64)])
    return imdct(mdct_forward(y))


def ola(prev_right, next_left, window) -> np.ndarray:
    """Overlap-add of a right half of frame v and the left half of v+1."""
    prev_right = np.asarray(prev_right, dtype=np.float64)
    next_left = np.asarray(next_left, dtype=np.float64)
    n_half = len(window) // 2
    if len(prev_right) != n_half or len(next_left) != n_half:
        raise ValueError("halves must both have length len(window) // 2")
    return window[n_half:] * prev_right + window[:n_half] * next_left


class OverlapAdder:
    """Streaming overlap-add with aliasing augmentation at mode switches.

    Frames are pushed as ``(left, right, clean)`` where ``clean`` marks
    alias-free MCLT halves. Each push returns the hop completed by the
    overlap of the previous frame's right half and the new left half.
    At a mode switch the clean side is augmented with aliasing so that it
    cancels the aliasing of its neighbour.
    """

    def __init__(self, window, tdaa: bool = True):
        self.window = np.asarray(window, dtype=np.float64)
        self.tdaa = tdaa
        n_half = len(self.window) // 2
        self._prev = (np.zeros(n_half), np.zeros(n_half), None)

    def push(self, left, right, clean: bool) -> np.ndarray:
        n_half = len(self.window) // 2
        if len(left) != n_half or len(right) != n_half:
            raise ValueError("frame halves do not match the window length")
        prev_left, prev_right, prev_clean = self._prev
        cur_left = left if clean else ALIAS_GAIN * np.asarray(left)
        if prev_clean is False:
            prev_right = ALIAS_GAIN * np.asarray(prev_right)
        if self.tdaa and prev_clean is not None and prev_clean != clean:
            if clean:
                cur_left = ALIAS_GAIN * tdaa_augment(left, right)[0]
            else:
                prev_right = ALIAS_GAIN * tdaa_augment(prev_left, prev_right)[1]
        self._prev = (left, right, clean)
        return ola(prev_right, cur_left, self.window)


def reconstruct_stream(halves, modes, window, tdaa: bool = True) -> np.ndarray:
    """Overlap-add a whole sequence of synthesized frames.

    ``halves[v]`` is the ``(left, right)`` pair of frame ``v``; ``modes[v]``
    is :data:`MCLT` for clean halves and :data:`MDCT` for aliased ones.
    Frame ``v`` spans hops ``v-1`` and ``v``, so ``F`` frames yield ``F-1``
    hops.
    """
    if len(halves) != len(modes):
        raise ValueError(f"{len(halves)} frames but {len(modes)} mode flags")
    adder = OverlapAdder(window, tdaa=tdaa)
    hops = [adder.push(left, right, bool(mode)) for (left, right), mode in zip(halves, modes)]
    if len(hops) < 2:
        return np.zeros(0)
    return np.concatenate(hops[1:])
