"""MCLT transform codec with complex-LPC temporal noise shaping."""

from .codec import Decoder, EncodedStream, Encoder, decode_stream, encode_stream
from .config import CodecConfig, load_config
from .estimator import MCLTCodec, MultiStageVQ
from .metrics import preecho_index, segsnr

__all__ = ["CodecConfig", "Decoder", "EncodedStream", "Encoder", "MCLTCodec", "MultiStageVQ",
           "decode_stream", "encode_stream", "load_config", "preecho_index", "segsnr"]
__version__ = "0.1.0"
