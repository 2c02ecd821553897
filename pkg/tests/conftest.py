import sys
import time

import numpy as np
import pytest
from scipy.linalg import solve, toeplitz

from mclt_codec import bitstream as bs
from mclt_codec.config import CodecConfig


def dense_bases(n_half):
    """Explicit MDCT (C) and MDST (S) matrices, row k = basis function k."""
    n = np.arange(2 * n_half)[None, :]
    k = np.arange(n_half)[:, None]
    phase = (2 * n + 1 + n_half) * (2 * k + 1) * np.pi / (4 * n_half)
    scale = np.sqrt(1.0 / n_half)
    return scale * np.cos(phase), scale * np.sin(phase)


SUITE_BUDGET_S = 300.0
_session = {}


def pytest_sessionstart(session):
    _session["start"] = time.perf_counter()


def pytest_sessionfinish(session, exitstatus):
    elapsed = time.perf_counter() - _session["start"]
    _session["elapsed"] = elapsed
    if elapsed >= SUITE_BUDGET_S and exitstatus == 0:
        session.exitstatus = 1


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    lines = list(getattr(acceptance, "RESULTS", []))
    if not lines:
        return
    elapsed = _session.get("elapsed", time.perf_counter() - _session["start"])
    ok = elapsed < SUITE_BUDGET_S
    lines.append(f"{'PASS' if ok else 'FAIL'} criterion 10 (runtime): full session "
                 f"{elapsed:.1f} s (< {SUITE_BUDGET_S:.0f} s)")
    terminalreporter.section("acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_autocorr(rng, order, complex_valued=False, length=None):
    """Biased autocorrelation of a random coloured signal (positive definite)."""
    length = length or 4 * (order + 1) + int(rng.integers(0, 64))
    x = rng.standard_normal(length)
    if complex_valued:
        x = x + 1j * rng.standard_normal(length)
    taps = rng.standard_normal(int(rng.integers(1, 4)))
    x = np.convolve(x, taps)[:length]
    return np.array([np.vdot(x[: length - k], x[k:]) for k in range(order + 1)])


def toeplitz_solve(r):
    """Dense oracle: solve the Hermitian Toeplitz normal equations for ``a[1:]``."""
    order = len(r) - 1
    T = toeplitz(r[:order])
    return np.concatenate([[1.0], solve(T, -r[1:])])


def random_params(rng, flag=None, cfg=None):
    """Random but well-formed frame parameters for the default layout."""
    CFG = cfg or CodecConfig()
    flag = bool(rng.integers(2)) if flag is None else flag
    n = CFG.num_bins
    scale = rng.choice([0.3, 1.0, 3.0, 30.0])
    mags = np.floor(rng.exponential(scale, n)).astype(np.int64)
    mags[rng.random(n) < 0.001] = rng.integers(0, 100_000)
    aux_max = 1 << CFG.phase_bits if flag else 2
    aux = np.where(mags > 0, rng.integers(0, aux_max, n), 0)
    roots = tuple(int(i) for i in rng.integers(0, 1 << CFG.root_bits, 3)) if flag else None
    return bs.FrameParameters(flag, tuple(int(i) for i in rng.integers(0, 1 << CFG.lsf_bits, 2)),
                              roots, rng.integers(0, 128, 8), mags, aux)
