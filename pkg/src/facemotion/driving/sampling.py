"""Constrained decoding and the pose-logit invariance check.

Generation never emits a structurally invalid sequence: during the expression
span only expression ids (plus the separator, once nonempty) are candidates;
the pose span is forced to the expression span's length and then closed.
Running out of budget truncates the expression span and flags the result.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from ..errors import RejectedInputError, StateError
from ..protocol import FramedSequence, MotionTokenSequence, frame
from .model import DrivingModel, mask_from_roles


@dataclass(frozen=True)
class SamplerConfig:
    strategy: str = "greedy"  # greedy | top_k | nucleus
    temperature: float = 1.0
    top_k: int = 10
    top_p: float = 0.9
    seed: int = 0
    max_motion_length: int = 64  # per-stream token budget

    def __post_init__(self):
        if self.strategy not in ("greedy", "top_k", "nucleus"):
            raise RejectedInputError(f"unknown sampling strategy {self.strategy!r}")
        if self.temperature <= 0:
            raise RejectedInputError("temperature must be > 0")
        if self.max_motion_length < 1:
            raise RejectedInputError("max_motion_length must be >= 1")


@dataclass
class GenerationResult:
    motion: MotionTokenSequence
    framed: FramedSequence
    truncated: bool


def _pick(logits: np.ndarray, candidates: list[int], cfg: SamplerConfig,
          rng: np.random.Generator) -> int:
    """Choose one id among candidates from the restricted logits."""
    sub = logits[candidates] / cfg.temperature
    if cfg.strategy == "greedy":
        return candidates[int(np.argmax(sub))]
    probs = np.exp(sub - np.max(sub))
    if cfg.strategy == "top_k":
        k = min(cfg.top_k, len(candidates))
        keep = np.argsort(sub)[::-1][:k]
        mask = np.zeros(len(candidates), dtype=bool)
        mask[keep] = True
        probs = np.where(mask, probs, 0.0)
    elif cfg.strategy == "nucleus":
        order = np.argsort(sub)[::-1]
        norm = probs / probs.sum()
        cum = np.cumsum(norm[order])
        cut = int(np.searchsorted(cum, cfg.top_p)) + 1
        mask = np.zeros(len(candidates), dtype=bool)
        mask[order[:cut]] = True
        probs = np.where(mask, probs, 0.0)
    probs = probs / probs.sum()
    return candidates[int(rng.choice(len(candidates), p=probs))]


def _next_logits(model: DrivingModel, ids: list[int], roles: list[str]) -> np.ndarray:
    attn = torch.from_numpy(
        mask_from_roles(roles, model.config.use_pose_expr_mask))[None]
    with torch.no_grad():
        logits = model(torch.tensor([ids], dtype=torch.int64), attn)
    return logits[0, -1].numpy()


def generate(model: DrivingModel, description: str,
             sampler: SamplerConfig | None = None) -> GenerationResult:
    """Map a description to a framed motion-token sequence.

    The budget is the smaller of the sampler's per-stream cap and what fits
    in the model context once both spans and the three specials are counted.
    """
    sampler = sampler or SamplerConfig()
    if model.training:
        raise StateError("model must be in eval mode for generation")
    vocab = model.vocab
    text_ids = model.text_tokenizer.encode(description)
    room = (model.config.context_length - len(text_ids) - 3) // 2
    if room < 1:
        raise RejectedInputError("description leaves no room for motion tokens")
    budget = min(sampler.max_motion_length, room)
    rng = np.random.default_rng(sampler.seed)

    ids = list(text_ids) + [vocab.mot_start]
    roles = ["text"] * len(text_ids) + ["start"]
    expr_ids = list(range(vocab.expr_offset, vocab.expr_offset + vocab.n_expr))

    expr: list[int] = []
    truncated = False
    while True:
        if len(expr) >= budget:
            truncated = True
            break
        candidates = expr_ids + ([vocab.mot_mid] if expr else [])
        chosen = _pick(_next_logits(model, ids, roles), candidates, sampler, rng)
        if chosen == vocab.mot_mid:
            break
        expr.append(vocab.expr_token(chosen))
        ids.append(chosen)
        roles.append("expr")
    ids.append(vocab.mot_mid)
    roles.append("mid")

    pose_ids = list(range(vocab.pose_offset, vocab.pose_offset + vocab.n_pose))
    pose: list[int] = []
    for _ in range(len(expr)):  # pose span is forced to the expression span's length
        chosen = _pick(_next_logits(model, ids, roles), pose_ids, sampler, rng)
        pose.append(vocab.pose_token(chosen))
        ids.append(chosen)
        roles.append("pose")

    motion = MotionTokenSequence(expr_tokens=expr, pose_tokens=pose)
    framed = frame(text_ids, motion, vocab)
    return GenerationResult(motion=motion, framed=framed, truncated=truncated)


def pose_logit_invariance_check(model: DrivingModel, framed: FramedSequence,
                                n_trials: int = 8, seed: int = 0) -> bool:
    """True iff pose-span logits (end included) are exactly unchanged when the
    expression-span ids are replaced by arbitrary in-range ids."""
    vocab = model.vocab
    expr_positions = framed.positions("expr")
    check_positions = framed.positions("pose") + framed.positions("end")
    attn = torch.from_numpy(
        mask_from_roles(framed.span_map, model.config.use_pose_expr_mask))[None]

    def pose_logits(ids: list[int]) -> torch.Tensor:
        with torch.no_grad():
            out = model(torch.tensor([ids], dtype=torch.int64), attn)
        return out[0, check_positions]

    reference = pose_logits(framed.ids)
    rng = np.random.default_rng(seed)
    for _ in range(n_trials):
        mutated = list(framed.ids)
        for p in expr_positions:
            mutated[p] = vocab.expr_id(int(rng.integers(1, vocab.n_expr + 1)))
        if not torch.equal(pose_logits(mutated), reference):
            return False
    return True


def motion_token_accuracy(model: DrivingModel, pairs,
                          sampler: SamplerConfig | None = None) -> dict:
    """Greedy-generation accuracy against reference pairs.

    ``token_accuracy`` counts position-wise matches over both streams (length
    mismatches count every unmatched position as wrong); ``sequence_accuracy``
    requires the entire motion to match.
    """
    sampler = sampler or SamplerConfig()
    pairs = list(pairs)
    correct, total, exact = 0, 0, 0
    for pair in pairs:
        result = generate(model, pair.description, sampler)
        got, want = result.motion, pair.motion
        for g, w in zip(got.expr_tokens, want.expr_tokens):
            correct += int(g == w)
        for g, w in zip(got.pose_tokens, want.pose_tokens):
            correct += int(g == w)
        total += 2 * max(len(got), len(want))
        exact += int(got.expr_tokens == want.expr_tokens
                     and got.pose_tokens == want.pose_tokens)
    return {"token_accuracy": correct / total if total else 0.0,
            "sequence_accuracy": exact / len(pairs) if pairs else 0.0,
            "n_pairs": len(pairs)}
