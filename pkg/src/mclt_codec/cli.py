"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data error (bad file, corrupt
stream, missing codebook).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import bitstream as bs
from . import corpus
from .codec import FORCE_CHOICES, CodecError, decode_stream, encode_stream
from .config import CodecConfig, ConfigError, load_config
from .entropy import EntropyDecodeError
from .metrics import segsnr
from .signal_io import WavFormatError, read_wav, write_wav
from .training import train_codebook
from .vq import Codebook, CodebookError, LSF_CODEBOOK, load_codebook

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2
DATA_ERRORS = (OSError, WavFormatError, bs.BitstreamError, CodecError, CodebookError,
               ConfigError, EntropyDecodeError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _positive(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mclt-codec", description="MCLT transform codec with complex TNS.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("encode", help="encode a 12.8 kHz mono WAV file")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--bitrate-scale", type=_positive, default=None)
    p.add_argument("--force-ctns", choices=FORCE_CHOICES, default="auto")
    p.add_argument("--bypass-quant", action="store_true")
    p.add_argument("--config", help="key=value configuration file")

    p = sub.add_parser("decode", help="decode a stream to WAV")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--no-tdaa", action="store_true", help="disable aliasing augmentation")
    p.add_argument("--config")

    p = sub.add_parser("segsnr", help="segmental SNR of test against reference")
    p.add_argument("-r", "--reference", required=True)
    p.add_argument("-t", "--test", required=True)
    p.add_argument("--seg", type=int, default=512)

    p = sub.add_parser("train-vq", help="train a codebook on the synthetic corpus")
    p.add_argument("--kind", choices=("lsf", "roots"), required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--lsf-codebook", help="LSF codebook used when training roots")

    p = sub.add_parser("gen-corpus", help="write a seeded synthetic clip")
    p.add_argument("--kind", choices=corpus.KINDS, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--duration", type=_positive, default=2.0)
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("inspect", help="print per-frame flags and sizes")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--config")
    return parser


def _config(args) -> CodecConfig:
    config = load_config(args.config) if getattr(args, "config", None) else CodecConfig()
    scale = getattr(args, "bitrate_scale", None)
    return config.replace(bit_budget_scale=scale) if scale is not None else config


def _encode(args) -> None:
    config = _config(args)
    rate, samples = read_wav(args.input)
    if rate != config.sample_rate_hz:
        raise WavFormatError(f"{args.input}: sample rate {rate} Hz, expected "
                             f"{config.sample_rate_hz} Hz")
    stream = encode_stream(samples, config, force_ctns=args.force_ctns,
                           bypass_quant=args.bypass_quant)
    with open(args.output, "wb") as fh:
        fh.write(stream.data)
    frames = max(len(stream.frames), 1)
    kbps = stream.frame_bits.sum() / frames * rate / config.hop_n / 1000
    print(f"{len(stream.frames)} frames, {len(stream.data)} bytes, {kbps:.2f} kbps payload")


def _decode(args) -> None:
    config = _config(args)
    with open(args.input, "rb") as fh:
        data = fh.read()
    samples = decode_stream(data, config, tdaa=not args.no_tdaa)
    header, _ = bs.read_stream(data)
    write_wav(args.output, samples, header.sample_rate)


def _segsnr(args) -> None:
    _, ref = read_wav(args.reference)
    _, test = read_wav(args.test)
    if ref.size != test.size:
        raise WavFormatError(f"length mismatch: {ref.size} vs {test.size} samples")
    print(f"{segsnr(ref, test, args.seg).mean:.2f}")


def _train(args) -> None:
    lsf = None
    if args.kind == "roots":
        lsf = Codebook.load(args.lsf_codebook) if args.lsf_codebook else load_codebook(LSF_CODEBOOK)
    train_codebook(args.kind, args.seed, lsf_codebook=lsf).save(args.output)


def _gen(args) -> None:
    clip = corpus.generate(args.kind, args.seed, args.duration)
    write_wav(args.output, clip.signal, corpus.SAMPLE_RATE)
    print(json.dumps({"kind": clip.kind, "samples": int(clip.signal.size),
                      "onsets": clip.onsets.tolist()}))


def _inspect(args) -> None:
    config = _config(args)
    with open(args.input, "rb") as fh:
        header, payloads = bs.read_stream(fh.read())
    print(json.dumps({"sample_rate": header.sample_rate, "hop": header.hop,
                      "frames": header.frame_count, "samples": header.num_samples,
                      "bypass": header.bypass}))
    ctx = bs.EntropyContext(len(config.subband_edges))
    for index, payload in enumerate(payloads):
        params = bs.unpack_frame(payload, ctx, config, bypass=header.bypass, frame_index=index)
        print(json.dumps({"frame": index, "ctns": bool(params.ctns_flag),
                          "bits": 8 * len(payload),
                          "nonzero": int(np.count_nonzero(params.mags))}))


COMMANDS = {"encode": _encode, "decode": _decode, "segsnr": _segsnr, "train-vq": _train,
            "gen-corpus": _gen, "inspect": _inspect}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        COMMANDS[args.command](args)
    except DATA_ERRORS as exc:
        print(f"mclt-codec {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
