import itertools

import numpy as np
import pytest

from conftest import dense_bases
from mclt_codec.transforms import (ALIAS_GAIN, MCLT, MDCT, imclt, imdct, mclt_forward,
                                   mdct_forward, ola, reconstruct_stream, sine_window,
                                   tdaa_augment)


def test_sine_window_princen_bradley():
    for n_half in (8, 64, 512):
        w = sine_window(2 * n_half)
        assert np.max(np.abs(w[:n_half] ** 2 + w[n_half:] ** 2 - 1)) < 1e-14
        assert w[0] == pytest.approx(np.sin(np.pi * 0.5 / (2 * n_half)))


def test_dense_basis_is_orthonormal():
    C, S = dense_bases(8)
    assert np.max(np.abs(C @ C.T - np.eye(8))) < 1e-12
    assert np.max(np.abs(S @ S.T - np.eye(8))) < 1e-12
    assert np.max(np.abs(C.T @ C + S.T @ S - np.eye(16))) < 1e-12


@pytest.mark.parametrize("n_half", [8, 64, 512])
def test_forward_matches_dense(n_half, rng):
    C, S = dense_bases(n_half)
    b = rng.standard_normal(2 * n_half)
    assert np.max(np.abs(mdct_forward(b) - C @ b)) < 1e-10
    X = mclt_forward(b)
    assert np.max(np.abs(X.real - C @ b)) < 1e-10
    assert np.max(np.abs(X.imag - S @ b)) < 1e-10


def test_zero_buffer_gives_zero():
    assert not np.any(mdct_forward(np.zeros(16)))
    assert not np.any(mclt_forward(np.zeros(16)))
    left, right = imdct(np.zeros(8))
    assert not np.any(left) and not np.any(right)
    left, right = imclt(np.zeros(8, dtype=complex))
    assert not np.any(left) and not np.any(right)


def test_length_mismatch_rejected():
    with pytest.raises(ValueError):
        mdct_forward(np.zeros(15))


def test_impulse_matches_dense():
    C, S = dense_bases(8)
    b = np.zeros(16)
    b[0] = 1.0
    X = mclt_forward(b)
    assert np.max(np.abs(X - (C[:, 0] + 1j * S[:, 0]))) < 1e-12


def test_mclt_energy(rng):
    # ||Cb||^2 + ||Sb||^2 = b^T (C^T C + S^T S) b = ||b||^2 under this scaling
    C, S = dense_bases(8)
    b = rng.standard_normal(16)
    oracle = np.sum((C @ b) ** 2) + np.sum((S @ b) ** 2)
    assert np.sum(np.abs(mclt_forward(b)) ** 2) == pytest.approx(oracle, rel=1e-12)
    assert oracle == pytest.approx(np.sum(b ** 2), rel=1e-12)


def test_imdct_is_aliasing_projection(rng):
    C, _ = dense_bases(8)
    b = rng.standard_normal(16)
    left, right = imdct(mdct_forward(b))
    assert np.max(np.abs(np.concatenate([left, right]) - C.T @ C @ b)) < 1e-12


def test_imdct_halves_symmetry(rng):
    left, right = imdct(rng.standard_normal(8))
    # left half odd about its midpoint, right half even
    assert np.max(np.abs(left + left[::-1])) < 1e-12
    assert np.max(np.abs(right - right[::-1])) < 1e-12


@pytest.mark.parametrize("n_half", [8, 512])
def test_imclt_round_trip(n_half, rng):
    w = sine_window(2 * n_half)
    wx = w * rng.standard_normal(2 * n_half)
    left, right = imclt(mclt_forward(wx))
    assert np.max(np.abs(np.concatenate([left, right]) - wx)) < 1e-10


def test_imclt_of_real_coeffs_matches_dense(rng):
    C, _ = dense_bases(8)
    a = rng.standard_normal(8)
    left, right = imclt(a.astype(complex))
    assert np.max(np.abs(np.concatenate([left, right]) - C.T @ a)) < 1e-12


def test_ola_one_half_zero(rng):
    w = sine_window(16)
    x = rng.standard_normal(8)
    assert np.allclose(ola(x, np.zeros(8), w), w[8:] * x)
    assert np.allclose(ola(np.zeros(8), x, w), w[:8] * x)


def test_ola_matches_dense(rng):
    C, _ = dense_bases(8)
    w = sine_window(16)
    W = np.diag(w)
    frames = rng.standard_normal(3 * 8)
    b0, b1 = frames[:16], frames[8:]
    y0 = C.T @ C @ W @ b0
    y1 = C.T @ C @ W @ b1
    oracle = W[8:, 8:] @ y0[8:] + W[:8, :8] @ y1[:8]
    got = ola(imdct(mdct_forward(w * b0))[1], imdct(mdct_forward(w * b1))[0], w)
    # orthonormal C: C^T C = (I + A)/2, so aliased halves carry half the signal
    got = ALIAS_GAIN * got
    oracle = ALIAS_GAIN * oracle
    assert np.max(np.abs(got - oracle)) < 1e-12
    assert np.max(np.abs(got - frames[8:16])) < 1e-12


def test_tdaa_projection_and_linearity(rng):
    y = rng.standard_normal(16)
    once = np.concatenate(tdaa_augment(y[:8], y[8:]))
    twice = np.concatenate(tdaa_augment(once[:8], once[8:]))
    assert np.max(np.abs(twice - once)) < 1e-12
    assert not np.any(np.concatenate(tdaa_augment(np.zeros(8), np.zeros(8))))
    z = rng.standard_normal(16)
    lhs = np.concatenate(tdaa_augment(*np.split(2 * y - 3 * z, 2)))
    rhs = 2 * once - 3 * np.concatenate(tdaa_augment(z[:8], z[8:]))
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_tdaa_of_clean_equals_aliased(rng):
    w = sine_window(1024)
    wx = w * rng.standard_normal(1024)
    aug = np.concatenate(tdaa_augment(*imclt(mclt_forward(wx))))
    aliased = np.concatenate(imdct(mdct_forward(wx)))
    assert np.max(np.abs(aug - aliased)) < 1e-10


def _synth_frames(x, n_half, modes):
    w = sine_window(2 * n_half)
    padded = np.concatenate([np.zeros(n_half), x, np.zeros(n_half)])
    halves = []
    for v, mode in enumerate(modes):
        buf = w * padded[v * n_half:(v + 2) * n_half]
        halves.append(imclt(mclt_forward(buf)) if mode else imdct(mdct_forward(buf)))
    return halves, w


@pytest.mark.parametrize("pattern", list(itertools.product([MDCT, MCLT], repeat=3)))
def test_mixed_mode_perfect_reconstruction(pattern, rng):
    n_half = 64
    x = rng.standard_normal(2 * n_half)
    halves, w = _synth_frames(x, n_half, pattern)
    y = reconstruct_stream(halves, pattern, w)
    assert np.sqrt(np.mean((y - x) ** 2) / np.mean(x ** 2)) < 1e-9


def test_alternating_modes_long_stream(rng):
    n_half = 512
    x = rng.standard_normal(9 * n_half)
    modes = [bool(v % 2) for v in range(10)]
    halves, w = _synth_frames(x, n_half, modes)
    y = reconstruct_stream(halves, modes, w)
    assert np.sqrt(np.mean((y - x) ** 2)) < 1e-9


def test_without_tdaa_switching_leaves_aliasing(rng):
    n_half = 64
    x = rng.standard_normal(2 * n_half)
    modes = [MDCT, MCLT, MDCT]
    halves, w = _synth_frames(x, n_half, modes)
    y = reconstruct_stream(halves, modes, w, tdaa=False)
    assert np.sqrt(np.mean((y - x) ** 2)) > 1e-3


def test_mode_count_mismatch():
    with pytest.raises(ValueError):
        reconstruct_stream([(np.zeros(8), np.zeros(8))], [MDCT, MCLT], sine_window(16))
