"""Frame packing and the ``MCLT`` stream container.

Frame payload::

    fixed side info, MSB first, zero padded to a byte boundary
        ctns_flag (1) | lsf indices (2 x 10) | root indices (3 x 11, iff flag)
    range-coded section
        scale factors: band 0 absolute, bands 1..7 as deltas
            (separate adaptive models for bands 1-3 and 4-7)
        magnitudes: per band, groups of four bins; a group whose values all
            lie in 0..2 is one base-3 symbol, otherwise an escape followed by
            four per-bin symbols 0..15 / escape + Exp-Golomb tail
        aux: for every non-zero magnitude, 1 sign bit or a 6-bit phase

Container: ``b"MCLT" | u8 version | u8 flags | u32 sample_rate | u32 hop |
u32 frame_count | u64 num_samples`` followed by ``u32 length | payload`` per
frame, all little endian. Flag bit 0 marks bypass streams whose frames
carry raw float64 coefficients instead of the range-coded section.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .config import CodecConfig
from .entropy import (AdaptiveModel, EntropyDecodeError, RangeDecoder, RangeEncoder,
                      exp_golomb_bits)
from .rate_control import SF_LEVELS

MAGIC = b"MCLT"
VERSION = 1
FLAG_BYPASS = 0x01
_HEADER = struct.Struct("<4sBBIIIQ")
_LENGTH = struct.Struct("<I")

SMALL_MAX = 2
SMALL_SYMBOLS = (SMALL_MAX + 1) ** 4
QUAD_ESCAPE = SMALL_SYMBOLS
LARGE_ESCAPE = 16


class BitstreamError(ValueError):
    pass


@dataclass
class FrameParameters:
    ctns_flag: bool
    lsf_indices: tuple
    root_indices: tuple | None
    sf_indices: np.ndarray
    mags: np.ndarray
    aux: np.ndarray
    raw_coeffs: np.ndarray | None = None

    def __eq__(self, other):
        if not isinstance(other, FrameParameters):
            return NotImplemented
        same_raw = (self.raw_coeffs is None and other.raw_coeffs is None) or (
            self.raw_coeffs is not None and other.raw_coeffs is not None
            and np.array_equal(self.raw_coeffs, other.raw_coeffs))
        return (bool(self.ctns_flag) == bool(other.ctns_flag)
                and tuple(self.lsf_indices) == tuple(other.lsf_indices)
                and (tuple(self.root_indices) if self.root_indices is not None else None)
                == (tuple(other.root_indices) if other.root_indices is not None else None)
                and np.array_equal(self.sf_indices, other.sf_indices)
                and np.array_equal(self.mags, other.mags)
                and np.array_equal(self.aux, other.aux)
                and same_raw)


@dataclass
class CodedFrame:
    payload: bytes
    side_bits: int = 0
    ideal_bits: float = 0.0
    target_bits: int = 0
    ctns_flag: bool = False
    prediction_gain_db: float = float("nan")

    @property
    def bits(self) -> int:
        return 8 * len(self.payload)


@dataclass
class StreamHeader:
    sample_rate: int
    hop: int
    frame_count: int
    num_samples: int
    bypass: bool = False
    version: int = VERSION


class EntropyContext:
    """Adaptive models of one stream; encoder and decoder each keep one."""

    def __init__(self, num_bands: int = 8):
        self.sf_first = AdaptiveModel(SF_LEVELS)
        self.sf_delta = [AdaptiveModel(2 * SF_LEVELS - 1), AdaptiveModel(2 * SF_LEVELS - 1)]
        self.quad = {(mode, b): AdaptiveModel(SMALL_SYMBOLS + 1)
                     for mode in (False, True) for b in range(num_bands)}
        self.large = [AdaptiveModel(LARGE_ESCAPE + 1) for _ in range(num_bands)]


class BitWriter:
    def __init__(self):
        self.bits = []

    def write(self, value: int, width: int) -> None:
        if not 0 <= value < (1 << width):
            raise BitstreamError(f"value {value} does not fit in {width} bits")
        self.bits.extend((value >> (width - 1 - i)) & 1 for i in range(width))

    def to_bytes(self) -> bytes:
        bits = self.bits + [0] * ((-len(self.bits)) % 8)
        return bytes(int("".join(map(str, bits[i:i + 8])), 2) for i in range(0, len(bits), 8))


class BitReader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def read(self, width: int) -> int:
        if self.pos + width > 8 * len(self.data):
            raise BitstreamError("truncated fixed side info")
        value = 0
        for _ in range(width):
            byte = self.data[self.pos >> 3]
            value = (value << 1) | ((byte >> (7 - (self.pos & 7))) & 1)
            self.pos += 1
        return value

    def align(self) -> int:
        """Skip to the next byte boundary; padding bits must be zero."""
        pad = (-self.pos) % 8
        if pad and self.read(pad) != 0:
            raise BitstreamError("reserved padding bits are not zero")
        return self.pos // 8


def fixed_side_bits(ctns_flag: bool, config: CodecConfig) -> int:
    bits = 1 + config.lsf_stages * config.lsf_bits
    if ctns_flag:
        bits += config.root_stages * config.root_bits
    return bits


def _groups(band):
    for i in range(0, len(band), 4):
        yield band[i:i + 4]


def band_cost(mags, band: int, complex_mode: bool, ctx: EntropyContext,
              config: CodecConfig) -> float:
    """Bits the range coder would spend on one band's magnitudes and aux bits.

    Works on copies of the band's adaptive models, so ``ctx`` is untouched.
    Mirrors :func:`_encode_coefficients` symbol for symbol.
    """
    quad = ctx.quad[(bool(complex_mode), band)].copy()
    large = ctx.large[band].copy()
    values = np.asarray(mags, dtype=np.int64).tolist()
    bits = 0.0
    for group in _groups(values):
        if max(group) <= SMALL_MAX:
            sym = sum(v * (SMALL_MAX + 1) ** j for j, v in enumerate(group))
            bits += quad.cost(sym)
            quad.update(sym)
            continue
        bits += quad.cost(QUAD_ESCAPE)
        quad.update(QUAD_ESCAPE)
        for v in group:
            sym = min(v, LARGE_ESCAPE)
            bits += large.cost(sym)
            large.update(sym)
            if v >= LARGE_ESCAPE:
                bits += exp_golomb_bits(v - LARGE_ESCAPE)
    aux_bits = config.phase_bits if complex_mode else 1
    return bits + aux_bits * sum(1 for v in values if v)


def _encode_coefficients(enc: RangeEncoder, params: FrameParameters, ctx: EntropyContext,
                         config: CodecConfig) -> None:
    sf = np.asarray(params.sf_indices, dtype=np.int64)
    enc.encode(ctx.sf_first, int(sf[0]))
    for b in range(1, len(sf)):
        enc.encode(ctx.sf_delta[0 if b < 4 else 1], int(sf[b] - sf[b - 1]) + SF_LEVELS - 1)
    mags = np.asarray(params.mags, dtype=np.int64)
    mode = bool(params.ctns_flag)
    for b, s in enumerate(config.band_slices()):
        for group in _groups(mags[s].tolist()):
            if max(group) <= SMALL_MAX:
                sym = sum(v * (SMALL_MAX + 1) ** j for j, v in enumerate(group))
                enc.encode(ctx.quad[(mode, b)], sym)
                continue
            enc.encode(ctx.quad[(mode, b)], QUAD_ESCAPE)
            for v in group:
                enc.encode(ctx.large[b], min(v, LARGE_ESCAPE))
                if v >= LARGE_ESCAPE:
                    enc.encode_exp_golomb(v - LARGE_ESCAPE)
    aux_bits = config.phase_bits if mode else 1
    aux = np.asarray(params.aux, dtype=np.int64)
    for v in aux[mags > 0].tolist():
        enc.encode_uniform(v, aux_bits)


def _decode_coefficients(dec: RangeDecoder, ctx: EntropyContext, ctns_flag: bool,
                         config: CodecConfig):
    sf = np.zeros(len(config.subband_edges), dtype=np.int64)
    sf[0] = dec.decode(ctx.sf_first)
    for b in range(1, len(sf)):
        sf[b] = sf[b - 1] + dec.decode(ctx.sf_delta[0 if b < 4 else 1]) - (SF_LEVELS - 1)
        if not 0 <= sf[b] < SF_LEVELS:
            raise BitstreamError("scale-factor index out of range")
    mags = np.zeros(config.num_bins, dtype=np.int64)
    mode = bool(ctns_flag)
    for b, s in enumerate(config.band_slices()):
        start, stop = s.start, s.stop
        for i in range(start, stop, 4):
            width = min(4, stop - i)
            sym = dec.decode(ctx.quad[(mode, b)])
            if sym != QUAD_ESCAPE:
                for j in range(4):
                    v = sym % (SMALL_MAX + 1)
                    sym //= SMALL_MAX + 1
                    if j < width:
                        mags[i + j] = v
                    elif v:
                        raise BitstreamError("non-zero magnitude beyond the band edge")
                continue
            for j in range(width):
                v = dec.decode(ctx.large[b])
                if v == LARGE_ESCAPE:
                    v += dec.decode_exp_golomb()
                mags[i + j] = v
    aux_bits = config.phase_bits if mode else 1
    aux = np.zeros(config.num_bins, dtype=np.int64)
    for idx in np.flatnonzero(mags):
        aux[idx] = dec.decode_uniform(aux_bits)
    return sf, mags, aux


def pack_frame(params: FrameParameters, ctx: EntropyContext | None,
               config: CodecConfig) -> CodedFrame:
    writer = BitWriter()
    writer.write(int(bool(params.ctns_flag)), 1)
    if len(params.lsf_indices) != config.lsf_stages:
        raise BitstreamError("wrong number of LSF indices")
    for i in params.lsf_indices:
        writer.write(int(i), config.lsf_bits)
    if params.ctns_flag:
        if params.root_indices is None or len(params.root_indices) != config.root_stages:
            raise BitstreamError("CTNS frames need root indices")
        for i in params.root_indices:
            writer.write(int(i), config.root_bits)
    side_bits = len(writer.bits)
    fixed = writer.to_bytes()
    if params.raw_coeffs is not None:
        dtype = "<c16" if params.ctns_flag else "<f8"
        body = np.asarray(params.raw_coeffs).astype(dtype).tobytes()
    else:
        enc = RangeEncoder()
        _encode_coefficients(enc, params, ctx, config)
        body = enc.finish()
    return CodedFrame(fixed + body, side_bits=side_bits, ctns_flag=bool(params.ctns_flag))


def unpack_frame(payload: bytes, ctx: EntropyContext | None, config: CodecConfig,
                 bypass: bool = False, frame_index: int | None = None) -> FrameParameters:
    where = "" if frame_index is None else f"frame {frame_index}: "
    try:
        reader = BitReader(payload)
        flag = bool(reader.read(1))
        lsf = tuple(reader.read(config.lsf_bits) for _ in range(config.lsf_stages))
        roots = None
        if flag:
            roots = tuple(reader.read(config.root_bits) for _ in range(config.root_stages))
        body = payload[reader.align():]
        if bypass:
            dtype = "<c16" if flag else "<f8"
            width = np.dtype(dtype).itemsize
            if len(body) != width * config.num_bins:
                raise BitstreamError("truncated bypass payload")
            raw = np.frombuffer(body, dtype=dtype).copy()
            zeros = np.zeros(config.num_bins, dtype=np.int64)
            return FrameParameters(flag, lsf, roots, np.zeros(len(config.subband_edges), np.int64),
                                   zeros, zeros.copy(), raw_coeffs=raw)
        dec = RangeDecoder(body, context=where)
        sf, mags, aux = _decode_coefficients(dec, ctx, flag, config)
    except (BitstreamError, EntropyDecodeError) as exc:
        raise BitstreamError(f"{where}{exc}") from exc
    return FrameParameters(flag, lsf, roots, sf, mags, aux)


def write_stream(frames, header: StreamHeader) -> bytes:
    payloads = [f.payload if isinstance(f, CodedFrame) else bytes(f) for f in frames]
    flags = FLAG_BYPASS if header.bypass else 0
    out = [_HEADER.pack(MAGIC, VERSION, flags, header.sample_rate, header.hop,
                        len(payloads), header.num_samples)]
    for p in payloads:
        out.append(_LENGTH.pack(len(p)))
        out.append(p)
    return b"".join(out)


def read_stream(data: bytes):
    """Parse a container into ``(StreamHeader, [payload, ...])``."""
    if len(data) < _HEADER.size:
        raise BitstreamError("stream shorter than its header")
    magic, version, flags, rate, hop, count, num_samples = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise BitstreamError(f"bad magic {magic!r}")
    if version != VERSION:
        raise BitstreamError(f"unsupported stream version {version}")
    if flags & ~FLAG_BYPASS:
        raise BitstreamError("unknown header flags set")
    pos = _HEADER.size
    payloads = []
    for i in range(count):
        if pos + _LENGTH.size > len(data):
            raise BitstreamError(f"frame {i}: truncated length prefix")
        (length,) = _LENGTH.unpack_from(data, pos)
        pos += _LENGTH.size
        if pos + length > len(data):
            raise BitstreamError(f"frame {i}: truncated payload")
        payloads.append(data[pos:pos + length])
        pos += length
    if pos != len(data):
        raise BitstreamError("trailing bytes after the last frame")
    header = StreamHeader(rate, hop, count, num_samples, bool(flags & FLAG_BYPASS), version)
    return header, payloads
