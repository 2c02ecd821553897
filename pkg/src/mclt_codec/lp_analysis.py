"""Linear prediction: autocorrelation, Levinson-Durbin, LSFs, roots, envelopes.

Polynomials follow ``A(z) = sum_k a[k] z^-k`` with ``a[0] = 1`` throughout,
for both real and complex coefficients.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

logger = logging.getLogger(__name__)

AUTOCORR_FLOOR = 1e-12
WHITE_NOISE_FLOOR = 1.0001
# Gaussian lag window width, 60 Hz at 12.8 kHz expressed in radians
LAG_WINDOW_BW = 2 * np.pi * 60.0 / 12800.0
REFLECTION_CLAMP = 0.999
ROOT_CLAMP = 0.99
ENVELOPE_CEILING_DB = 240.0
LSF_MIN_GAP = 1e-3
LSF_LOW, LSF_HIGH = 0.01, np.pi - 0.01


@dataclass
class LpModel:
    a: np.ndarray
    lsf: np.ndarray
    prediction_error: float = 0.0
    indices: tuple | None = None

    @property
    def order(self) -> int:
        return len(self.a) - 1


@dataclass
class ComplexLpModel:
    a: np.ndarray
    roots: np.ndarray
    prediction_error: float = 0.0
    indices: tuple | None = None

    @property
    def order(self) -> int:
        return len(self.a) - 1

    @classmethod
    def from_roots(cls, roots, indices=None) -> "ComplexLpModel":
        roots = np.asarray(roots, dtype=np.complex128)
        return cls(a=poly_from_roots(roots), roots=roots, indices=indices)


@dataclass
class FreqEnvelope:
    H: np.ndarray

    @property
    def H_dB(self) -> np.ndarray:
        return 20.0 * np.log10(self.H)


class LevinsonResult(NamedTuple):
    a: np.ndarray
    error: float
    reflection: np.ndarray
    unstable: bool


def lag_window(order: int, bandwidth: float = LAG_WINDOW_BW) -> np.ndarray:
    k = np.arange(order + 1)
    return np.exp(-0.5 * (bandwidth * k) ** 2)


def autocorr(x, order: int, taper: str | None = "hamming", lag: bool = True) -> np.ndarray:
    """Biased autocorrelation ``r[k] = sum_n x[n] conj(x[n-k])``, ``k = 0..order``.

    ``taper="hamming"`` windows ``x`` first. With ``lag=True`` a Gaussian
    lag window and a +40 dB white-noise floor (``r[0] *= 1.0001``) are
    applied. An all-zero input returns ``[AUTOCORR_FLOOR, 0, ...]``; test
    for it with :func:`is_degenerate`.
    """
    x = np.asarray(x)
    if len(x) <= order:
        raise ValueError(f"need more than {order} samples, got {len(x)}")
    if taper == "hamming":
        x = x * np.hamming(len(x))
    elif taper is not None:
        raise ValueError(f"unknown taper {taper!r}")
    complex_input = np.iscomplexobj(x)
    r = np.array([np.vdot(x[: len(x) - k], x[k:]) for k in range(order + 1)])
    if not complex_input:
        r = r.real
    r[0] = r[0].real
    if r[0].real <= AUTOCORR_FLOOR:
        r = np.zeros(order + 1, dtype=r.dtype)
        r[0] = AUTOCORR_FLOOR
        return r
    if lag:
        r = r * lag_window(order)
        r[0] *= WHITE_NOISE_FLOOR
    return r


def is_degenerate(r) -> bool:
    return bool(np.real(r[0]) <= AUTOCORR_FLOOR)


def levinson(r) -> LevinsonResult:
    """Solve the (Hermitian) Toeplitz normal equations for ``a``.

    Reflection coefficients at or beyond unit magnitude are clamped to
    0.999 and reported through ``unstable``.
    """
    r = np.asarray(r)
    if np.real(r[0]) <= 0:
        raise ValueError("r[0] must be positive")
    order = len(r) - 1
    dtype = np.complex128 if np.iscomplexobj(r) else np.float64
    a = np.zeros(order + 1, dtype=dtype)
    a[0] = 1.0
    k = np.zeros(order, dtype=dtype)
    err = float(np.real(r[0]))
    unstable = False
    for m in range(1, order + 1):
        acc = np.dot(a[:m], r[m:0:-1])
        km = -acc / err
        if abs(km) >= 1.0:
            km = km / abs(km) * REFLECTION_CLAMP
            unstable = True
        k[m - 1] = km
        prev = a[: m + 1].copy()
        a[: m + 1] = prev + km * np.conj(prev[::-1])
        err *= 1.0 - abs(km) ** 2
    if unstable:
        logger.debug("levinson: reflection coefficient clamped")
    return LevinsonResult(a, err, k, unstable)


def lpc_to_reflection(a) -> np.ndarray:
    """Step-down recursion; inverse of :func:`reflection_to_lpc`."""
    a = np.array(a, dtype=np.complex128 if np.iscomplexobj(a) else np.float64)
    order = len(a) - 1
    k = np.zeros(order, dtype=a.dtype)
    for m in range(order, 0, -1):
        km = a[m]
        k[m - 1] = km
        denom = 1.0 - abs(km) ** 2
        if denom <= 0:
            raise ValueError("polynomial has a reflection coefficient of unit magnitude")
        a = (a[: m + 1] - km * np.conj(a[: m + 1][::-1])) / denom
        a = a[:m]
    return k


def reflection_to_lpc(k) -> np.ndarray:
    k = np.asarray(k)
    a = np.ones(1, dtype=k.dtype)
    for km in k:
        ext = np.concatenate([a, [0.0]])
        a = ext + km * np.conj(ext[::-1])
    return a


def stabilize_lpc(a) -> np.ndarray:
    """Clamp reflection coefficients to |k| <= 0.999 (no-op for stable ``a``)."""
    roots = np.roots(a)
    if len(roots) == 0 or np.max(np.abs(roots)) < 1.0:
        return np.asarray(a)
    stable_roots = stabilize_roots(roots, REFLECTION_CLAMP)
    out = np.poly(stable_roots)
    return out.real if not np.iscomplexobj(a) else out


def weight_lpc(a, gamma: float) -> np.ndarray:
    """Bandwidth expansion ``a'[k] = a[k] gamma^k``."""
    if not 0 < gamma <= 1:
        raise ValueError("gamma must lie in (0, 1]")
    a = np.asarray(a)
    return a * gamma ** np.arange(len(a))


def _trig_eval(c: np.ndarray, omega: np.ndarray):
    """Value and derivative of ``c[m] + 2 sum_j c[m-j] cos(j w)``."""
    m = len(c) // 2
    j = np.arange(1, m + 1)
    coef = c[m - j]
    cos = np.cos(np.outer(omega, j))
    sin = np.sin(np.outer(omega, j))
    value = c[m] + 2.0 * cos @ coef
    deriv = -2.0 * sin @ (coef * j)
    return value, deriv


def _symmetric_roots(c: np.ndarray) -> np.ndarray:
    """Angles in (0, pi) of the unit-circle roots of a palindromic polynomial."""
    roots = np.roots(c)
    omega = np.sort(np.abs(np.angle(roots[np.imag(roots) >= 0])))
    omega = omega[: len(c) // 2]
    for _ in range(4):
        value, deriv = _trig_eval(c, omega)
        step = np.where(np.abs(deriv) > 1e-300, value / np.where(deriv == 0, 1, deriv), 0.0)
        omega = omega - step
    return np.sort(omega)


def lpc_to_lsf(a) -> np.ndarray:
    """Line spectral frequencies (radians, ascending) of a real even-order LPC."""
    a = np.asarray(a, dtype=np.float64)
    order = len(a) - 1
    if order % 2:
        raise ValueError("only even LPC orders are supported")
    a = stabilize_lpc(a)
    ext = np.concatenate([a, [0.0]])
    p_poly = ext + ext[::-1]
    q_poly = ext - ext[::-1]
    # divide out the trivial roots at z = -1 and z = +1
    p_red = np.polydiv(p_poly, [1.0, 1.0])[0]
    q_red = np.polydiv(q_poly, [1.0, -1.0])[0]
    lsf = np.empty(order)
    lsf[0::2] = _symmetric_roots(p_red)
    lsf[1::2] = _symmetric_roots(q_red)
    return np.sort(lsf)


def lsf_to_lpc(lsf) -> np.ndarray:
    lsf = np.asarray(lsf, dtype=np.float64)
    p_poly = np.array([1.0, 1.0])
    q_poly = np.array([1.0, -1.0])
    for w in lsf[0::2]:
        p_poly = np.convolve(p_poly, [1.0, -2.0 * np.cos(w), 1.0])
    for w in lsf[1::2]:
        q_poly = np.convolve(q_poly, [1.0, -2.0 * np.cos(w), 1.0])
    return 0.5 * (p_poly + q_poly)[: len(lsf) + 1]


def repair_lsf(lsf, min_gap: float = LSF_MIN_GAP, low: float = LSF_LOW,
               high: float = LSF_HIGH) -> np.ndarray:
    """Clamp into (low, high) and enforce ascending order with ``min_gap``."""
    lsf = np.sort(np.clip(np.asarray(lsf, dtype=np.float64), low, high))
    for i in range(1, len(lsf)):
        lsf[i] = max(lsf[i], lsf[i - 1] + min_gap)
    lsf[-1] = min(lsf[-1], high)
    for i in range(len(lsf) - 2, -1, -1):
        lsf[i] = min(lsf[i], lsf[i + 1] - min_gap)
    return lsf


def poly_roots(a) -> np.ndarray:
    """Roots of ``z^p A(z)``."""
    a = np.asarray(a)
    if abs(a[0] - 1) > 1e-12:
        raise ValueError("a[0] must be 1")
    return np.roots(a).astype(np.complex128)


def stabilize_roots(roots, max_mag: float = ROOT_CLAMP) -> np.ndarray:
    """Reflect roots outside the unit circle inward and cap their magnitude."""
    roots = np.asarray(roots, dtype=np.complex128)
    mag = np.abs(roots)
    mag = np.where(mag >= 1.0, 1.0 / np.maximum(mag, 1e-300), mag)
    mag = np.minimum(mag, max_mag)
    return mag * np.exp(1j * np.angle(roots))


def poly_from_roots(roots) -> np.ndarray:
    roots = np.asarray(roots, dtype=np.complex128)
    if len(roots) == 0:
        return np.ones(1, dtype=np.complex128)
    return np.poly(roots).astype(np.complex128)


def bin_frequencies(num_bins: int) -> np.ndarray:
    """MDCT bin centres ``pi (f + 1/2) / num_bins``."""
    return np.pi * (np.arange(num_bins) + 0.5) / num_bins


def lpc_response(a, num_bins: int) -> np.ndarray:
    omega = bin_frequencies(num_bins)
    a = np.asarray(a)
    return np.exp(-1j * np.outer(omega, np.arange(len(a)))) @ a


def freq_envelope(a, gamma: float, num_bins: int) -> FreqEnvelope:
    """``H[f] = 1 / |A_gamma(e^{i w_f})|`` at the MDCT bin centres."""
    response = np.abs(lpc_response(weight_lpc(a, gamma), num_bins))
    ceiling = 10.0 ** (ENVELOPE_CEILING_DB / 20.0)
    H = np.where(response < 1e-12, ceiling, 1.0 / np.maximum(response, 1e-300))
    return FreqEnvelope(np.minimum(H, ceiling))


def analyze_real(block, order: int) -> LpModel:
    """Hamming-windowed autocorrelation LP analysis of a time block."""
    r = autocorr(block, order, taper="hamming")
    result = levinson(r)
    a = result.a
    return LpModel(a=a, lsf=lpc_to_lsf(a), prediction_error=result.error)
