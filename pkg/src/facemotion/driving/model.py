"""Toy autoregressive transformer over the extended motion vocabulary.

Decoder-only, pre-LN, learned absolute positions, hand-rolled multi-head
attention taking an explicit boolean mask per sample (additive -inf before
softmax).  The mask comes from the token protocol: causal attention plus the
rule that pose-span queries never see expression-span keys.

Depth note: with a single attention layer the pose logits are *exactly*
independent of expression-token content, because masked keys contribute
exp(-inf) = 0.  With two or more layers the separator position (which may
attend to the expression span) can carry expression information forward into
pose queries, so the exact guarantee holds only at depth 1 — the default.
``pose_logit_invariance_check`` verifies the property for any concrete model.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass

import numpy as np
import torch
from torch import nn

from ..errors import RejectedInputError, StateError
from ..protocol import Vocabulary
from .text import TextTokenizer

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class DrivingConfig:
    n_layers: int = 1
    n_heads: int = 4
    d_model: int = 128
    context_length: int = 96
    dropout: float = 0.0
    use_pose_expr_mask: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.d_model % self.n_heads != 0:
            raise RejectedInputError("d_model must be divisible by n_heads")
        if self.n_layers < 0:
            raise RejectedInputError("n_layers must be >= 0")


class _Attention(nn.Module):
    def __init__(self, d_model: int, n_heads: int):
        super().__init__()
        self.n_heads = n_heads
        self.d_head = d_model // n_heads
        self.qkv = nn.Linear(d_model, 3 * d_model)
        self.proj = nn.Linear(d_model, d_model)

    def forward(self, x: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        b, length, d = x.shape
        q, k, v = self.qkv(x).chunk(3, dim=-1)

        def heads(t):
            return t.view(b, length, self.n_heads, self.d_head).transpose(1, 2)

        q, k, v = heads(q), heads(k), heads(v)
        scores = q @ k.transpose(-2, -1) / np.sqrt(self.d_head)
        # additive mask: blocked keys get -inf, so softmax assigns them exactly 0
        scores = scores.masked_fill(~mask[:, None, :, :], float("-inf"))
        attn = torch.softmax(scores, dim=-1)
        out = (attn @ v).transpose(1, 2).reshape(b, length, d)
        return self.proj(out)


class _Block(nn.Module):
    def __init__(self, d_model: int, n_heads: int):
        super().__init__()
        self.ln1 = nn.LayerNorm(d_model)
        self.attn = _Attention(d_model, n_heads)
        self.ln2 = nn.LayerNorm(d_model)
        self.mlp = nn.Sequential(
            nn.Linear(d_model, 4 * d_model), nn.GELU(), nn.Linear(4 * d_model, d_model))

    def forward(self, x, mask):
        x = x + self.attn(self.ln1(x), mask)
        return x + self.mlp(self.ln2(x))


class DrivingModel(nn.Module):
    """Embedding table and output head are both sized to the full vocabulary."""

    def __init__(self, vocab: Vocabulary, text_tokenizer: TextTokenizer,
                 config: DrivingConfig):
        super().__init__()
        if text_tokenizer.size != vocab.text_size:
            raise RejectedInputError(
                f"text tokenizer size {text_tokenizer.size} does not match "
                f"vocabulary text range {vocab.text_size}")
        torch.manual_seed(config.seed)
        self.vocab = vocab
        self.text_tokenizer = text_tokenizer
        self.config = config
        self.token_emb = nn.Embedding(vocab.size, config.d_model)
        self.pos_emb = nn.Embedding(config.context_length, config.d_model)
        self.blocks = nn.ModuleList(
            _Block(config.d_model, config.n_heads) for _ in range(config.n_layers))
        self.ln_f = nn.LayerNorm(config.d_model)
        self.head = nn.Linear(config.d_model, vocab.size, bias=False)

    def forward(self, ids: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        """ids (B, L) int64; mask (B, L, L) bool, True where attention is allowed."""
        b, length = ids.shape
        if length > self.config.context_length:
            raise RejectedInputError(
                f"sequence length {length} exceeds context {self.config.context_length}")
        pos = torch.arange(length, device=ids.device)
        x = self.token_emb(ids) + self.pos_emb(pos)[None]
        for block in self.blocks:
            x = block(x, mask)
        return self.head(self.ln_f(x))


def mask_from_roles(roles: list[str], use_pose_expr_mask: bool = True) -> np.ndarray:
    """Attention mask for any role layout, including mid-generation prefixes.

    Same rule as the token protocol's mask builder, but accepts partial
    layouts (no trailing end yet) so the sampler can mask incrementally.
    """
    n = len(roles)
    mask = np.tril(np.ones((n, n), dtype=bool))
    if use_pose_expr_mask:
        arr = np.asarray(roles)
        pose_q = (arr == "pose") | (arr == "end")
        expr_k = arr == "expr"
        mask[np.ix_(pose_q, expr_k)] = False
    return mask


def vocabulary_hash(vocab: Vocabulary) -> str:
    payload = json.dumps({"text_size": vocab.text_size, "n_expr": vocab.n_expr,
                          "n_pose": vocab.n_pose}, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()


def save_model(model: DrivingModel, path) -> None:
    torch.save({
        "format_version": MODEL_FORMAT_VERSION,
        "config": asdict(model.config),
        "vocab": {"text_size": model.vocab.text_size, "n_expr": model.vocab.n_expr,
                  "n_pose": model.vocab.n_pose},
        "vocab_hash": vocabulary_hash(model.vocab),
        "text_vocab": model.text_tokenizer.vocab,
        "state_dict": model.state_dict(),
    }, path)


def load_model(path) -> DrivingModel:
    payload = torch.load(path, weights_only=False)
    if payload.get("format_version") != MODEL_FORMAT_VERSION:
        raise StateError(f"unsupported model format in {path}")
    vocab = Vocabulary(**payload["vocab"])
    if vocabulary_hash(vocab) != payload["vocab_hash"]:
        raise StateError("vocabulary hash mismatch in checkpoint")
    model = DrivingModel(vocab, TextTokenizer(vocab=payload["text_vocab"]),
                         DrivingConfig(**payload["config"]))
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model
