import numpy as np
import pytest

from conftest import random_params
from mclt_codec import bitstream as bs
from mclt_codec.config import CodecConfig

CFG = CodecConfig()


def test_random_frames_round_trip():
    rng = np.random.default_rng(99)
    enc_ctx, dec_ctx = bs.EntropyContext(), bs.EntropyContext()
    frames = [random_params(rng) for _ in range(300)]
    for params in frames:
        coded = bs.pack_frame(params, enc_ctx, CFG)
        assert bs.unpack_frame(coded.payload, dec_ctx, CFG) == params


def test_side_bits_and_layout():
    rng = np.random.default_rng(1)
    for flag, expected in ((False, 21), (True, 54)):
        params = random_params(rng, flag)
        assert bs.fixed_side_bits(flag, CFG) == expected
        coded = bs.pack_frame(params, bs.EntropyContext(), CFG)
        assert coded.side_bits == expected
        assert coded.bits == 8 * len(coded.payload)
        assert coded.payload[0] >> 7 == int(flag)


def test_fixed_fields_msb_first():
    params = bs.FrameParameters(False, (0x3FF, 1), None, np.zeros(8, int),
                                np.zeros(512, int), np.zeros(512, int))
    payload = bs.pack_frame(params, bs.EntropyContext(), CFG).payload
    # 0 | 1111111111 | 0000000001 | 000 (pad)
    assert payload[:3] == bytes([0b01111111, 0b11100000, 0b00001000])


def test_nonzero_padding_rejected():
    params = bs.FrameParameters(False, (5, 9), None, np.zeros(8, int),
                                np.zeros(512, int), np.zeros(512, int))
    payload = bytearray(bs.pack_frame(params, bs.EntropyContext(), CFG).payload)
    payload[2] |= 0x01
    with pytest.raises(bs.BitstreamError, match="padding"):
        bs.unpack_frame(bytes(payload), bs.EntropyContext(), CFG, frame_index=3)


def test_truncated_side_info():
    with pytest.raises(bs.BitstreamError):
        bs.unpack_frame(b"\x80\x00", bs.EntropyContext(), CFG)


def test_pack_validates_fields():
    good = bs.FrameParameters(True, (1, 2), (1, 2, 3), np.zeros(8, int), np.zeros(512, int),
                              np.zeros(512, int))
    for bad in (dict(lsf_indices=(1,)), dict(root_indices=None), dict(lsf_indices=(1024, 0))):
        params = bs.FrameParameters(**{**good.__dict__, **bad})
        with pytest.raises(bs.BitstreamError):
            bs.pack_frame(params, bs.EntropyContext(), CFG)


@pytest.mark.parametrize("flag", [False, True])
def test_bypass_frames_are_exact(flag):
    rng = np.random.default_rng(2)
    raw = rng.standard_normal(512)
    if flag:
        raw = raw + 1j * rng.standard_normal(512)
    params = bs.FrameParameters(flag, (3, 4), (5, 6, 7) if flag else None, np.zeros(8, int),
                                np.zeros(512, int), np.zeros(512, int), raw_coeffs=raw)
    payload = bs.pack_frame(params, None, CFG).payload
    out = bs.unpack_frame(payload, None, CFG, bypass=True)
    assert out == params
    with pytest.raises(bs.BitstreamError):
        bs.unpack_frame(payload[:-1], None, CFG, bypass=True)


def test_container_round_trip():
    header = bs.StreamHeader(12800, 512, 3, 1234, bypass=True)
    payloads = [b"", b"\x01\x02", bytes(range(200))]
    data = bs.write_stream(payloads, header)
    got, frames = bs.read_stream(data)
    assert frames == payloads
    assert (got.sample_rate, got.hop, got.frame_count, got.num_samples, got.bypass) == \
        (12800, 512, 3, 1234, True)
    assert data[:4] == b"MCLT"


@pytest.mark.parametrize("mutate, message", [
    (lambda d: b"XCLT" + d[4:], "magic"),
    (lambda d: d[:4] + b"\x07" + d[5:], "version"),
    (lambda d: d[:5] + b"\x80" + d[6:], "flags"),
    (lambda d: d[:-1], "truncated"),
    (lambda d: d + b"\x00", "trailing"),
    (lambda d: d[:10], "shorter"),
])
def test_container_errors(mutate, message):
    data = bs.write_stream([b"abc"], bs.StreamHeader(12800, 512, 1, 10))
    with pytest.raises(bs.BitstreamError, match=message):
        bs.read_stream(mutate(data))


def test_corrupt_body_reports_frame_index():
    rng = np.random.default_rng(4)
    payload = bs.pack_frame(random_params(rng, False), bs.EntropyContext(), CFG).payload
    corrupt = payload[:3] + bytes(b ^ 0xA5 for b in payload[3:])
    try:
        out = bs.unpack_frame(corrupt, bs.EntropyContext(), CFG, frame_index=17)
    except bs.BitstreamError as exc:
        assert "frame 17" in str(exc)
    else:
        assert isinstance(out, bs.FrameParameters)
