"""Encoder and decoder pipelines.

Encoder, per hop: LP analysis of the Hamming-windowed ``2N`` buffer, LSF
quantization, sine window + MCLT, FDNS with the quantized envelope, CTNS
decision and filtering, adaptive target bits, per-band scale factors, the
unified quantizer and frame packing. The decoder mirrors it and chooses
the inverse transform from the CTNS flag; aliasing augmentation is applied
by the overlap-adder whenever neighbouring frames differ in mode.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import bitstream as bs
from .config import CodecConfig
from .entropy import entropy_estimate
from .lp_analysis import analyze_real, freq_envelope, lsf_to_lpc
from .noise_shaping import (CtnsDecision, ctns_analyze, ctns_filter, ctns_inverse, fdns_apply,
                            fdns_invert)
from .quantizer import bin_powers, dequantize_coeffs, quantize_coeffs, quantize_mag
from .rate_control import (SF_LEVELS, apply_scaling, band_quad_energies, fer, frame_gain,
                           remove_scaling, scale_factor_search, sf_to_gain, target_bits)
from .signal_io import AudioFrame, frame_stream
from .transforms import OverlapAdder, imclt, imdct, mclt_forward, sine_window
from .vq import default_codebooks, dequantize_lsf, dequantize_roots, quantize_lsf, quantize_roots

logger = logging.getLogger(__name__)

FORCE_CHOICES = ("auto", "on", "off")


class CodecError(RuntimeError):
    pass


@dataclass
class EncodedStream:
    data: bytes
    frames: list
    header: bs.StreamHeader

    @property
    def frame_bits(self) -> np.ndarray:
        return np.array([f.bits for f in self.frames], dtype=np.int64)

    @property
    def target_bits(self) -> np.ndarray:
        return np.array([f.target_bits for f in self.frames], dtype=np.int64)

    @property
    def ctns_flags(self) -> np.ndarray:
        return np.array([f.ctns_flag for f in self.frames], dtype=bool)


class Encoder:
    """Stateful single-stream encoder.

    ``force_ctns`` overrides the per-frame decision ("on"/"off"), and
    ``bypass_quant`` is a test hook that ships the shaped coefficients
    unquantized so the rest of the chain can be checked for exactness.
    """

    def __init__(self, config: CodecConfig | None = None, codebooks=None,
                 force_ctns: str = "auto", bypass_quant: bool = False):
        if force_ctns not in FORCE_CHOICES:
            raise ValueError(f"force_ctns must be one of {FORCE_CHOICES}")
        self.config = config or CodecConfig()
        self.lsf_codebook, self.root_codebook = codebooks or default_codebooks()
        self.force_ctns = force_ctns
        self.bypass_quant = bypass_quant
        self.window = sine_window(self.config.window_len)
        self._powers = bin_powers(self.config)
        self.reset()

    def reset(self) -> None:
        self._prev = np.zeros(self.config.hop_n)
        self.context = bs.EntropyContext(len(self.config.subband_edges))

    def _decide(self, R) -> CtnsDecision:
        cfg = self.config
        if self.force_ctns == "off":
            return CtnsDecision(False, float("nan"))
        decision = ctns_analyze(R, self.root_codebook, cfg.ctns_start_bin, cfg.lpc_order_ctns,
                                cfg.weight_ctns, cfg.ctns_gain_threshold_db)
        if self.force_ctns == "on":
            model = decision.model
            if model is None:
                zero = np.zeros(cfg.lpc_order_ctns, dtype=np.complex128)
                model = dequantize_roots(quantize_roots(zero, self.root_codebook),
                                         self.root_codebook)
            return CtnsDecision(True, decision.prediction_gain_db, model)
        return decision

    def analyze(self, samples):
        """Run the encoder front end on one hop; returns frame parameters and a report."""
        cfg = self.config
        samples = np.asarray(samples, dtype=np.float64)
        if samples.shape != (cfg.hop_n,):
            raise CodecError(f"expected {cfg.hop_n} samples per frame, got {samples.shape}")
        buffer = np.concatenate([self._prev, samples])
        self._prev = samples.copy()

        lp = analyze_real(buffer, cfg.lpc_order_fdns)
        lsf_idx = quantize_lsf(lp.lsf, self.lsf_codebook)
        a_q = lsf_to_lpc(dequantize_lsf(lsf_idx, self.lsf_codebook))
        envelope = freq_envelope(a_q, cfg.weight_fdns, cfg.num_bins)

        X = mclt_forward(self.window * buffer)
        R = fdns_apply(X, envelope)
        decision = self._decide(R)
        if decision.active:
            coeffs = ctns_filter(R, decision.model, cfg.ctns_start_bin)
        else:
            coeffs = R.real

        plan = target_bits(frame_gain(envelope.H), fer(envelope.H, cfg.subband_edges), cfg)
        root_idx = decision.model.indices if decision.active else None
        if self.bypass_quant:
            zeros = np.zeros(cfg.num_bins, dtype=np.int64)
            params = bs.FrameParameters(decision.active, lsf_idx, root_idx,
                                        np.zeros(len(cfg.subband_edges), np.int64),
                                        zeros, zeros.copy(), raw_coeffs=coeffs)
        else:
            sf = scale_factor_search(band_quad_energies(coeffs, cfg), plan.bits, cfg.k_fit)
            sf = self._fit_budget(coeffs, sf, plan.bits, decision.active)
            scaled = apply_scaling(coeffs, sf, cfg)
            mags, aux = quantize_coeffs(scaled, self._powers, decision.active, cfg.phase_bits)
            params = bs.FrameParameters(decision.active, lsf_idx, root_idx, sf, mags, aux)
        return params, decision, plan

    def _fit_budget(self, coeffs, sf, targets, complex_mode: bool) -> np.ndarray:
        """Coarsen bands whose actual coded size exceeds their bit target.

        The estimate from :func:`scale_factor_search` is the finest index a
        band may use; the band cost is counted exactly against the current
        entropy models and the smallest index at or above the estimate that
        fits is kept (the coarsest grid point if none does).
        """
        cfg = self.config
        out = np.array(sf, copy=True)
        mags_abs = np.abs(coeffs)
        for b, s in enumerate(cfg.band_slices()):
            band, powers = mags_abs[s], self._powers[s]
            if not np.any(band > 0):
                continue

            def fits(idx):
                mags = quantize_mag(band / sf_to_gain(idx), powers)
                return bs.band_cost(mags, b, complex_mode, self.context, cfg) <= targets[b]

            lo = int(out[b])
            if fits(lo):
                continue
            step, hi = 1, None
            while hi is None:
                cand = min(lo + step, SF_LEVELS - 1)
                if fits(cand) or cand == SF_LEVELS - 1:
                    hi = cand
                else:
                    lo, step = cand, 2 * step
            while hi - lo > 1:  # invariant: lo does not fit, hi fits or is the top
                mid = (lo + hi) // 2
                if fits(mid):
                    hi = mid
                else:
                    lo = mid
            out[b] = hi
        return out

    def encode_frame(self, frame) -> bs.CodedFrame:
        samples = frame.samples if isinstance(frame, AudioFrame) else frame
        params, decision, plan = self.analyze(samples)
        coded = bs.pack_frame(params, self.context, self.config)
        side = bs.fixed_side_bits(params.ctns_flag, self.config)
        coded.target_bits = side + plan.total
        coded.ideal_bits = ideal_frame_bits(params, self.config)
        coded.prediction_gain_db = decision.prediction_gain_db
        return coded


def ideal_frame_bits(params: bs.FrameParameters, config: CodecConfig) -> float:
    """Fixed side info plus sample-entropy estimates of the coded indices."""
    side = bs.fixed_side_bits(params.ctns_flag, config)
    if params.raw_coeffs is not None:
        return float(side)
    aux_bits = config.phase_bits if params.ctns_flag else 1
    sf = np.asarray(params.sf_indices)
    return (side + entropy_estimate(sf, 4) + entropy_estimate(params.mags, 4)
            + aux_bits * int(np.count_nonzero(params.mags)))


class Decoder:
    """Stateful single-stream decoder; only consumes bitstream-derived data."""

    def __init__(self, config: CodecConfig | None = None, codebooks=None, tdaa: bool = True,
                 bypass: bool = False):
        self.config = config or CodecConfig()
        self.lsf_codebook, self.root_codebook = codebooks or default_codebooks()
        self.tdaa = tdaa
        self.bypass = bypass
        self.window = sine_window(self.config.window_len)
        self._powers = bin_powers(self.config)
        self.reset()

    def reset(self) -> None:
        self.context = bs.EntropyContext(len(self.config.subband_edges))
        self._adder = OverlapAdder(self.window, tdaa=self.tdaa)
        self.frame_index = 0

    def synthesize(self, params: bs.FrameParameters):
        """Frame parameters -> ``(left, right, clean)`` synthesis halves."""
        cfg = self.config
        a_q = lsf_to_lpc(dequantize_lsf(params.lsf_indices, self.lsf_codebook))
        envelope = freq_envelope(a_q, cfg.weight_fdns, cfg.num_bins)
        if params.raw_coeffs is not None:
            coeffs = np.asarray(params.raw_coeffs)
        else:
            scaled = dequantize_coeffs(params.mags, params.aux, self._powers, params.ctns_flag,
                                       cfg.phase_bits)
            coeffs = remove_scaling(scaled, params.sf_indices, cfg)
        if params.ctns_flag:
            model = dequantize_roots(params.root_indices, self.root_codebook)
            R = ctns_inverse(coeffs, model, cfg.ctns_start_bin)
            left, right = imclt(fdns_invert(R, envelope))
            return left, right, True
        left, right = imdct(fdns_invert(np.real(coeffs), envelope))
        return left, right, False

    def decode_frame(self, frame) -> np.ndarray:
        """Decode one frame and return the hop it completes (one hop of latency)."""
        if isinstance(frame, bs.FrameParameters):
            params = frame
        else:
            payload = frame.payload if isinstance(frame, bs.CodedFrame) else frame
            params = bs.unpack_frame(payload, self.context, self.config, bypass=self.bypass,
                                     frame_index=self.frame_index)
        self.frame_index += 1
        left, right, clean = self.synthesize(params)
        return self._adder.push(left, right, clean)


def encode_stream(samples, config: CodecConfig | None = None, codebooks=None,
                  force_ctns: str = "auto", bypass_quant: bool = False) -> EncodedStream:
    config = config or CodecConfig()
    samples = np.asarray(samples, dtype=np.float64).ravel()
    encoder = Encoder(config, codebooks, force_ctns=force_ctns, bypass_quant=bypass_quant)
    frames = []
    if len(samples):
        for frame in frame_stream(samples, config.hop_n):
            try:
                frames.append(encoder.encode_frame(frame))
            except Exception as exc:
                raise CodecError(f"frame {frame.index}: {exc}") from exc
    header = bs.StreamHeader(config.sample_rate_hz, config.hop_n, len(frames), len(samples),
                             bypass=bypass_quant)
    return EncodedStream(bs.write_stream(frames, header), frames, header)


def decode_stream(data: bytes, config: CodecConfig | None = None, codebooks=None,
                  tdaa: bool = True) -> np.ndarray:
    header, payloads = bs.read_stream(data)
    config = config or CodecConfig()
    if header.hop != config.hop_n:
        raise CodecError(f"stream hop {header.hop} does not match config hop {config.hop_n}")
    decoder = Decoder(config, codebooks, tdaa=tdaa, bypass=header.bypass)
    hops = [decoder.decode_frame(p) for p in payloads]
    if len(hops) < 2:
        return np.zeros(header.num_samples)
    out = np.concatenate(hops[1:])
    return out[: header.num_samples]
