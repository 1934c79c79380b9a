from .codec import (
    CHECKPOINT_FORMAT_VERSION,
    STD_FLOOR,
    Codebook,
    Codec,
    Mlp,
    MotionClip,
    NormalizationStats,
    TokenizerPair,
    decode_tokens,
    encode_clip,
    load_tokenizer,
    quantize,
    quantize_batch,
    read_clips,
    reconstruct_clip,
    reconstruction_mse,
    save_tokenizer,
    write_clips,
)
from .training import CodecConfig, train_codec, train_stream_codec

__all__ = [
    "CHECKPOINT_FORMAT_VERSION",
    "STD_FLOOR",
    "Codebook",
    "Codec",
    "CodecConfig",
    "Mlp",
    "MotionClip",
    "NormalizationStats",
    "TokenizerPair",
    "decode_tokens",
    "encode_clip",
    "load_tokenizer",
    "quantize",
    "quantize_batch",
    "read_clips",
    "reconstruct_clip",
    "reconstruction_mse",
    "save_tokenizer",
    "train_codec",
    "train_stream_codec",
    "write_clips",
]
