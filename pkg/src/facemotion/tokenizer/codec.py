"""Dual vector-quantization codecs mapping motion embeddings to discrete tokens.

A codec bundles a learned codebook, per-window encoder/decoder MLPs and the
normalization statistics of its training split.  Expression and pose streams
use two independent codecs with identical architecture.  Token values are
1-based (1..N) throughout the public API.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import RejectedInputError, StateError

CHECKPOINT_FORMAT_VERSION = 1
STD_FLOOR = 1e-6


@dataclass
class MotionClip:
    """Per-frame expression and pose embedding sequences for one clip."""

    clip_id: str
    expression: np.ndarray  # (t, d_e)
    pose: np.ndarray        # (t, d_p)
    frame_rate: float = 25.0

    def __post_init__(self):
        self.expression = np.asarray(self.expression, dtype=np.float64)
        self.pose = np.asarray(self.pose, dtype=np.float64)
        if self.expression.ndim != 2 or self.pose.ndim != 2:
            raise RejectedInputError(f"clip {self.clip_id}: embeddings must be 2-D (t, d)")
        if len(self.expression) != len(self.pose):
            raise RejectedInputError(
                f"clip {self.clip_id}: expression ({len(self.expression)}) and pose "
                f"({len(self.pose)}) sequences differ in length")
        if len(self.expression) < 1:
            raise RejectedInputError(f"clip {self.clip_id}: empty clip")
        if not (np.isfinite(self.expression).all() and np.isfinite(self.pose).all()):
            raise RejectedInputError(f"clip {self.clip_id}: non-finite embedding values")

    @property
    def n_frames(self) -> int:
        return len(self.expression)

    def to_record(self) -> dict:
        return {
            "clip_id": self.clip_id,
            "frame_rate": self.frame_rate,
            "expression": self.expression.tolist(),
            "pose": self.pose.tolist(),
        }

    @classmethod
    def from_record(cls, rec: dict) -> "MotionClip":
        return cls(
            clip_id=rec["clip_id"],
            expression=np.asarray(rec["expression"], dtype=np.float64),
            pose=np.asarray(rec["pose"], dtype=np.float64),
            frame_rate=float(rec.get("frame_rate", 25.0)),
        )


def write_clips(clips, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for clip in clips:
            fh.write(json.dumps(clip.to_record()) + "\n")


def read_clips(path) -> list[MotionClip]:
    clips = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                clips.append(MotionClip.from_record(json.loads(line)))
    return clips


@dataclass
class NormalizationStats:
    """Elementwise mean/std computed on the training split only."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=np.float64)
        self.std = np.asarray(self.std, dtype=np.float64)
        if self.mean.shape != self.std.shape:
            raise RejectedInputError("mean and std shapes differ")
        if np.any(self.std < STD_FLOOR):
            raise RejectedInputError(f"std below floor {STD_FLOOR}")

    @classmethod
    def from_data(cls, frames: np.ndarray) -> "NormalizationStats":
        frames = np.asarray(frames, dtype=np.float64)
        mean = frames.mean(axis=0)
        std = np.maximum(frames.std(axis=0), STD_FLOOR)
        return cls(mean=mean, std=std)

    def normalize(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - self.mean) / self.std

    def denormalize(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=np.float64) * self.std + self.mean


@dataclass
class Mlp:
    """Tiny fully-connected network (ReLU between layers, linear output)."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def apply(self, x: np.ndarray) -> np.ndarray:
        h = np.asarray(x, dtype=np.float64)
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if i != last:
                h = np.maximum(h, 0.0)
        return h

    @property
    def in_dim(self) -> int:
        return self.weights[0].shape[0]

    @property
    def out_dim(self) -> int:
        return self.weights[-1].shape[1]


@dataclass
class Codebook:
    """N x d_c quantization table plus the per-window encoder/decoder nets."""

    entries: np.ndarray                 # (N, d_c)
    encoder: Mlp | None = None
    decoder: Mlp | None = None

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=np.float64)
        if self.entries.ndim != 2 or len(self.entries) < 2:
            raise RejectedInputError("codebook needs at least 2 entries of equal dimension")
        if not np.isfinite(self.entries).all():
            raise RejectedInputError("codebook entries must be finite")

    @property
    def n_codes(self) -> int:
        return len(self.entries)

    @property
    def code_dim(self) -> int:
        return self.entries.shape[1]


@dataclass
class Codec:
    """Codebook + NormalizationStats for one motion stream."""

    codebook: Codebook
    stats: NormalizationStats

    @property
    def trained(self) -> bool:
        return self.codebook.encoder is not None and self.codebook.decoder is not None

    @property
    def frame_dim(self) -> int:
        return len(self.stats.mean)


@dataclass
class TokenizerPair:
    """Independent expression and pose codecs sharing one temporal stride."""

    expression_codec: Codec
    pose_codec: Codec
    temporal_stride: int = 1
    training_report: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.temporal_stride < 1:
            raise RejectedInputError("temporal_stride must be >= 1")


def quantize(z: np.ndarray, codebook: Codebook) -> int:
    """Nearest codeword index (1-based) under squared L2; ties take the lowest index."""
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (codebook.code_dim,):
        raise RejectedInputError(
            f"latent dimension {z.shape} does not match codebook dimension ({codebook.code_dim},)")
    d = np.sum((codebook.entries - z) ** 2, axis=1)
    return int(np.argmin(d)) + 1


def quantize_batch(z: np.ndarray, codebook: Codebook) -> np.ndarray:
    """Vectorized quantize over rows of z; returns 1-based indices."""
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 2 or z.shape[1] != codebook.code_dim:
        raise RejectedInputError(
            f"latent batch shape {z.shape} does not match codebook dimension {codebook.code_dim}")
    # ||z - c||^2 = ||z||^2 - 2 z.c + ||c||^2; argmin of first occurrence keeps the tie rule,
    # but the expanded form loses exact ties, so use the explicit difference per chunk.
    out = np.empty(len(z), dtype=np.int64)
    chunk = 512  # bounds the (chunk, N, d_c) distance tensor
    for start in range(0, len(z), chunk):
        block = z[start:start + chunk]
        d = np.sum((block[:, None, :] - codebook.entries[None, :, :]) ** 2, axis=2)
        out[start:start + chunk] = np.argmin(d, axis=1) + 1
    return out


def _frame_windows(frames: np.ndarray, stride: int) -> np.ndarray:
    """Stack frames into ceil(t/stride) windows; the last partial window repeats the final frame."""
    t, d = frames.shape
    n_windows = -(-t // stride)
    padded = t if t % stride == 0 else n_windows * stride
    if padded != t:
        pad = np.repeat(frames[-1:], padded - t, axis=0)
        frames = np.concatenate([frames, pad], axis=0)
    return frames.reshape(n_windows, stride * d)


def _encode_stream(frames: np.ndarray, codec: Codec, stride: int) -> list[int]:
    if not codec.trained:
        raise StateError("codec is untrained; call train_codec first")
    if frames.shape[1] != codec.frame_dim:
        raise RejectedInputError(
            f"frame dimension {frames.shape[1]} does not match codec dimension {codec.frame_dim}")
    windows = _frame_windows(codec.stats.normalize(frames), stride)
    latents = codec.codebook.encoder.apply(windows)
    return quantize_batch(latents, codec.codebook).tolist()


def encode_clip(clip: MotionClip, codecs: TokenizerPair) -> tuple[list[int], list[int]]:
    """Tokenize both streams; returns two 1-based token lists of length ceil(t/stride)."""
    stride = codecs.temporal_stride
    expr = _encode_stream(clip.expression, codecs.expression_codec, stride)
    pose = _encode_stream(clip.pose, codecs.pose_codec, stride)
    return expr, pose


def _decode_stream(tokens, codec: Codec, stride: int) -> np.ndarray:
    if not codec.trained:
        raise StateError("codec is untrained; call train_codec first")
    tokens = list(tokens)
    if not tokens:
        raise RejectedInputError("empty token sequence")
    n = codec.codebook.n_codes
    for tok in tokens:
        if not (1 <= int(tok) <= n):
            raise RejectedInputError(f"token {tok} outside codebook range 1..{n}")
    idx = np.asarray(tokens, dtype=np.int64) - 1
    latents = codec.codebook.entries[idx]
    windows = codec.codebook.decoder.apply(latents)
    frames = windows.reshape(len(tokens) * stride, codec.frame_dim)
    return codec.stats.denormalize(frames)


def decode_tokens(expr_tokens, pose_tokens, codecs: TokenizerPair,
                  clip_id: str = "decoded", frame_rate: float = 25.0) -> MotionClip:
    """Map token sequences back to embedding sequences of length tokens * stride."""
    if len(list(expr_tokens)) != len(list(pose_tokens)):
        raise RejectedInputError("expression and pose token sequences differ in length")
    stride = codecs.temporal_stride
    expr = _decode_stream(expr_tokens, codecs.expression_codec, stride)
    pose = _decode_stream(pose_tokens, codecs.pose_codec, stride)
    return MotionClip(clip_id=clip_id, expression=expr, pose=pose, frame_rate=frame_rate)


def reconstruct_clip(clip: MotionClip, codecs: TokenizerPair) -> MotionClip:
    """encode + decode, trimmed back to the original frame count."""
    expr_tokens, pose_tokens = encode_clip(clip, codecs)
    decoded = decode_tokens(expr_tokens, pose_tokens, codecs, clip_id=clip.clip_id,
                            frame_rate=clip.frame_rate)
    t = clip.n_frames
    return MotionClip(clip_id=clip.clip_id, expression=decoded.expression[:t],
                      pose=decoded.pose[:t], frame_rate=clip.frame_rate)


def reconstruction_mse(clips, codecs: TokenizerPair) -> float:
    """Mean squared reconstruction error over all frames of all clips (raw space)."""
    total, count = 0.0, 0
    for clip in clips:
        rec = reconstruct_clip(clip, codecs)
        total += float(np.sum((rec.expression - clip.expression) ** 2))
        total += float(np.sum((rec.pose - clip.pose) ** 2))
        count += clip.expression.size + clip.pose.size
    return total / count


def _pack_mlp(prefix: str, mlp: Mlp, arrays: dict) -> None:
    for i, (w, b) in enumerate(zip(mlp.weights, mlp.biases)):
        arrays[f"{prefix}_w{i}"] = w
        arrays[f"{prefix}_b{i}"] = b


def _unpack_mlp(prefix: str, arrays) -> Mlp:
    weights, biases = [], []
    i = 0
    while f"{prefix}_w{i}" in arrays:
        weights.append(np.asarray(arrays[f"{prefix}_w{i}"], dtype=np.float64))
        biases.append(np.asarray(arrays[f"{prefix}_b{i}"], dtype=np.float64))
        i += 1
    return Mlp(weights=weights, biases=biases)


def save_tokenizer(codecs: TokenizerPair, path) -> None:
    """Write a self-describing checkpoint (npz container with a JSON header)."""
    arrays: dict = {}
    meta = {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "temporal_stride": codecs.temporal_stride,
        "training_report": codecs.training_report,
    }
    for name, codec in (("expr", codecs.expression_codec), ("pose", codecs.pose_codec)):
        if not codec.trained:
            raise StateError("cannot checkpoint an untrained codec")
        arrays[f"{name}_entries"] = codec.codebook.entries
        arrays[f"{name}_mean"] = codec.stats.mean
        arrays[f"{name}_std"] = codec.stats.std
        _pack_mlp(f"{name}_enc", codec.codebook.encoder, arrays)
        _pack_mlp(f"{name}_dec", codec.codebook.decoder, arrays)
    arrays["meta"] = np.frombuffer(json.dumps(meta, sort_keys=True).encode(), dtype=np.uint8)
    buf = io.BytesIO()
    np.savez(buf, **arrays)
    with open(path, "wb") as fh:
        fh.write(buf.getvalue())


def load_tokenizer(path) -> TokenizerPair:
    with np.load(path) as arrays:
        meta = json.loads(bytes(arrays["meta"]).decode())
        if meta["format_version"] != CHECKPOINT_FORMAT_VERSION:
            raise RejectedInputError(
                f"unsupported checkpoint format version {meta['format_version']}")
        codecs = {}
        for name in ("expr", "pose"):
            codebook = Codebook(
                entries=arrays[f"{name}_entries"],
                encoder=_unpack_mlp(f"{name}_enc", arrays),
                decoder=_unpack_mlp(f"{name}_dec", arrays),
            )
            stats = NormalizationStats(mean=arrays[f"{name}_mean"], std=arrays[f"{name}_std"])
            codecs[name] = Codec(codebook=codebook, stats=stats)
    return TokenizerPair(
        expression_codec=codecs["expr"],
        pose_codec=codecs["pose"],
        temporal_stride=int(meta["temporal_stride"]),
        training_report=meta.get("training_report", {}),
    )
