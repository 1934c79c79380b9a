"""Training loop for the driving transformer.

Cross-entropy is applied only to positions inside the motion frame: queries
whose next-token target is an expression token, the separator, a pose token
or the end marker.  Text positions receive no loss.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import asdict, dataclass, field

import numpy as np
import torch
from torch.nn import functional as F

from ..errors import RejectedInputError, TrainingDivergedError
from ..protocol import MotionTokenSequence, Vocabulary, frame
from .model import DrivingConfig, DrivingModel, mask_from_roles, save_model
from .text import TextTokenizer

logger = logging.getLogger(__name__)

_LOSS_TARGET_ROLES = frozenset({"expr", "mid", "pose", "end"})


@dataclass
class TrainingPair:
    """One supervised example: a motion description and its token streams."""

    description: str
    motion: MotionTokenSequence
    pair_id: str = ""

    def __post_init__(self):
        if not self.description.strip():
            raise RejectedInputError(f"pair {self.pair_id or '?'}: empty description")

    def to_record(self) -> dict:
        return {"pair_id": self.pair_id, "description": self.description,
                "expr_tokens": self.motion.expr_tokens,
                "pose_tokens": self.motion.pose_tokens}

    @classmethod
    def from_record(cls, record: dict) -> "TrainingPair":
        return cls(description=record["description"],
                   motion=MotionTokenSequence(expr_tokens=record["expr_tokens"],
                                              pose_tokens=record["pose_tokens"]),
                   pair_id=record.get("pair_id", ""))


def write_pairs(pairs, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(json.dumps(pair.to_record(), sort_keys=True) + "\n")


def read_pairs(path) -> list[TrainingPair]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(TrainingPair.from_record(json.loads(line)))
    return out


@dataclass(frozen=True)
class TrainerConfig:
    epochs: int = 60
    batch_size: int = 32
    learning_rate: float = 4e-4
    weight_decay: float = 1e-3
    betas: tuple[float, float] = (0.9, 0.95)
    seed: int = 0


@dataclass
class TrainingLog:
    epoch_losses: list[float] = field(default_factory=list)

    @property
    def final_loss(self) -> float:
        return self.epoch_losses[-1]


def _encode_pairs(pairs, tokenizer: TextTokenizer, vocab: Vocabulary, context: int):
    """Frame every pair; reject anything longer than the model context."""
    framed = []
    for k, pair in enumerate(pairs):
        text_ids = tokenizer.encode(pair.description)
        f = frame(text_ids, pair.motion, vocab)
        if len(f) > context:
            pid = pair.pair_id or f"index {k}"
            raise RejectedInputError(
                f"pair {pid}: framed length {len(f)} exceeds context {context}")
        framed.append(f)
    return framed


def _batch_tensors(framed_batch, use_mask: bool):
    """Pad a list of framed sequences into ids/mask/loss-mask tensors."""
    max_len = max(len(f) for f in framed_batch)
    b = len(framed_batch)
    ids = torch.zeros((b, max_len), dtype=torch.int64)
    attn = torch.zeros((b, max_len, max_len), dtype=torch.bool)
    loss_mask = torch.zeros((b, max_len), dtype=torch.bool)
    for i, f in enumerate(framed_batch):
        n = len(f)
        ids[i, :n] = torch.tensor(f.ids, dtype=torch.int64)
        attn[i, :n, :n] = torch.from_numpy(mask_from_roles(f.span_map, use_mask))
        if n < max_len:
            # padding rows attend to themselves: an all-masked softmax row is
            # NaN and poisons gradients even though the loss never reads it
            pad = torch.arange(n, max_len)
            attn[i, pad, pad] = True
        for q in range(n - 1):
            if f.span_map[q + 1] in _LOSS_TARGET_ROLES:
                loss_mask[i, q] = True
    return ids, attn, loss_mask


def _motion_loss(model: DrivingModel, ids, attn, loss_mask) -> torch.Tensor:
    logits = model(ids, attn)
    targets = ids[:, 1:]
    keep = loss_mask[:, :-1]
    flat_logits = logits[:, :-1][keep]
    flat_targets = targets[keep]
    return F.cross_entropy(flat_logits, flat_targets)


def train(pairs, vocab: Vocabulary, text_tokenizer: TextTokenizer | None = None,
          model_config: DrivingConfig | None = None,
          trainer_config: TrainerConfig | None = None,
          checkpoint_dir=None) -> tuple[DrivingModel, TrainingLog]:
    """Train from scratch; deterministic under fixed seeds.

    When ``text_tokenizer`` is omitted one is built from the pair
    descriptions, and the vocabulary's text range must match its size.
    """
    pairs = list(pairs)
    if not pairs:
        raise RejectedInputError("no training pairs")
    model_config = model_config or DrivingConfig()
    trainer_config = trainer_config or TrainerConfig()
    if text_tokenizer is None:
        text_tokenizer = TextTokenizer.from_corpus(p.description for p in pairs)
        if text_tokenizer.size != vocab.text_size:
            raise RejectedInputError(
                f"corpus-derived text vocabulary has {text_tokenizer.size} entries; "
                f"vocabulary declares {vocab.text_size}")

    framed = _encode_pairs(pairs, text_tokenizer, vocab, model_config.context_length)
    model = DrivingModel(vocab, text_tokenizer, model_config)
    opt = torch.optim.AdamW(model.parameters(), lr=trainer_config.learning_rate,
                            weight_decay=trainer_config.weight_decay,
                            betas=trainer_config.betas)
    rng = np.random.default_rng(trainer_config.seed)
    log = TrainingLog()
    model.train()
    for epoch in range(trainer_config.epochs):
        order = rng.permutation(len(framed))
        total, n_batches = 0.0, 0
        for start in range(0, len(framed), trainer_config.batch_size):
            batch = [framed[i] for i in order[start:start + trainer_config.batch_size]]
            ids, attn, loss_mask = _batch_tensors(batch, model_config.use_pose_expr_mask)
            loss = _motion_loss(model, ids, attn, loss_mask)
            if not torch.isfinite(loss):
                raise TrainingDivergedError("non-finite driving loss", epoch=epoch,
                                            step=n_batches,
                                            diagnostics={"loss": loss.item()})
            opt.zero_grad()
            loss.backward()
            opt.step()
            total += loss.item()
            n_batches += 1
        log.epoch_losses.append(total / n_batches)
        if checkpoint_dir is not None:
            os.makedirs(checkpoint_dir, exist_ok=True)
            save_model(model, os.path.join(checkpoint_dir, f"epoch_{epoch:04d}.pt"))
    model.eval()
    logger.info("driving model trained: %d pairs, final motion loss %.4f",
                len(pairs), log.final_loss)
    return model, log


def training_defaults() -> dict:
    return asdict(TrainerConfig())
