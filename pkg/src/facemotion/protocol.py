"""Extended token vocabulary, special-token framing and the pose attention mask.

The model vocabulary is laid out as [text | expression | pose | specials]:
text ids occupy 0..V_text-1, expression codebook tokens the next N_e ids,
pose codebook tokens the next N_p, and the final three ids are the motion
framing specials (start, mid, end).  A framed model input is

    [text ids] MOT_START [expr ids] MOT_MID [pose ids] MOT_END

and the attention mask is the causal mask with one extra rule: queries inside
the pose span (MOT_END included) cannot attend to expression-span positions,
so pose prediction never depends on expression tokens.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import RejectedInputError

ROLE_TEXT = "text"
ROLE_START = "start"
ROLE_EXPR = "expr"
ROLE_MID = "mid"
ROLE_POSE = "pose"
ROLE_END = "end"

VOCAB_FORMAT_VERSION = 1


@dataclass(frozen=True)
class Vocabulary:
    text_size: int
    n_expr: int
    n_pose: int

    def __post_init__(self):
        if self.text_size < 1 or self.n_expr < 1 or self.n_pose < 1:
            raise RejectedInputError("vocabulary ranges must be non-empty")

    @property
    def size(self) -> int:
        return self.text_size + self.n_expr + self.n_pose + 3

    @property
    def expr_offset(self) -> int:
        return self.text_size

    @property
    def pose_offset(self) -> int:
        return self.text_size + self.n_expr

    @property
    def mot_start(self) -> int:
        return self.size - 3

    @property
    def mot_mid(self) -> int:
        return self.size - 2

    @property
    def mot_end(self) -> int:
        return self.size - 1

    def classify(self, token_id: int) -> str:
        """Total id -> role map over the vocabulary: text | expr | pose | special."""
        if not 0 <= token_id < self.size:
            raise RejectedInputError(f"id {token_id} outside vocabulary of size {self.size}")
        if token_id < self.text_size:
            return "text"
        if token_id < self.pose_offset:
            return "expr"
        if token_id < self.mot_start:
            return "pose"
        return "special"

    def expr_id(self, token: int) -> int:
        """Vocabulary id of a 1-based expression codebook token."""
        if not 1 <= token <= self.n_expr:
            raise RejectedInputError(f"expression token {token} outside 1..{self.n_expr}")
        return self.expr_offset + token - 1

    def pose_id(self, token: int) -> int:
        if not 1 <= token <= self.n_pose:
            raise RejectedInputError(f"pose token {token} outside 1..{self.n_pose}")
        return self.pose_offset + token - 1

    def expr_token(self, token_id: int) -> int:
        if self.classify(token_id) != "expr":
            raise RejectedInputError(f"id {token_id} is not an expression id")
        return token_id - self.expr_offset + 1

    def pose_token(self, token_id: int) -> int:
        if self.classify(token_id) != "pose":
            raise RejectedInputError(f"id {token_id} is not a pose id")
        return token_id - self.pose_offset + 1

    def save(self, path) -> None:
        manifest = {
            "format_version": VOCAB_FORMAT_VERSION,
            "text_size": self.text_size,
            "n_expr": self.n_expr,
            "n_pose": self.n_pose,
            "mot_start": self.mot_start,
            "mot_mid": self.mot_mid,
            "mot_end": self.mot_end,
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)

    @classmethod
    def load(cls, path) -> "Vocabulary":
        with open(path, encoding="utf-8") as fh:
            manifest = json.load(fh)
        vocab = cls(text_size=manifest["text_size"], n_expr=manifest["n_expr"],
                    n_pose=manifest["n_pose"])
        if manifest["mot_end"] != vocab.mot_end:
            raise RejectedInputError("vocabulary manifest inconsistent with its ranges")
        return vocab


@dataclass
class MotionTokenSequence:
    """Paired expression/pose token streams in codebook space (1-based)."""

    expr_tokens: list[int]
    pose_tokens: list[int]

    def __post_init__(self):
        self.expr_tokens = [int(t) for t in self.expr_tokens]
        self.pose_tokens = [int(t) for t in self.pose_tokens]
        if len(self.expr_tokens) != len(self.pose_tokens):
            raise RejectedInputError(
                f"expression ({len(self.expr_tokens)}) and pose ({len(self.pose_tokens)}) "
                "token streams differ in length")
        if any(t < 1 for t in self.expr_tokens + self.pose_tokens):
            raise RejectedInputError("motion tokens are 1-based and must be >= 1")

    def __len__(self) -> int:
        return len(self.expr_tokens)


@dataclass
class FramedSequence:
    """Full model input ids plus the role of every position."""

    ids: list[int]
    span_map: list[str]
    vocab: Vocabulary | None = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        if len(self.ids) != len(self.span_map):
            raise RejectedInputError("ids and span_map lengths differ")
        order = [r for r in self.span_map if r in (ROLE_START, ROLE_MID, ROLE_END)]
        if order != [ROLE_START, ROLE_MID, ROLE_END]:
            raise RejectedInputError(
                "framed sequence must contain exactly one start, mid and end, in order")

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def is_degenerate(self) -> bool:
        """True when the motion spans are empty."""
        return ROLE_EXPR not in self.span_map and ROLE_POSE not in self.span_map

    def positions(self, role: str) -> list[int]:
        return [i for i, r in enumerate(self.span_map) if r == role]


def frame(text_ids: list[int], motion: MotionTokenSequence, vocab: Vocabulary) -> FramedSequence:
    """Lay out [text] MOT_START [expr] MOT_MID [pose] MOT_END."""
    for tid in text_ids:
        if not 0 <= tid < vocab.text_size:
            raise RejectedInputError(f"text id {tid} outside 0..{vocab.text_size - 1}")
    ids = list(text_ids)
    span = [ROLE_TEXT] * len(ids)
    ids.append(vocab.mot_start)
    span.append(ROLE_START)
    ids.extend(vocab.expr_id(t) for t in motion.expr_tokens)
    span.extend([ROLE_EXPR] * len(motion.expr_tokens))
    ids.append(vocab.mot_mid)
    span.append(ROLE_MID)
    ids.extend(vocab.pose_id(t) for t in motion.pose_tokens)
    span.extend([ROLE_POSE] * len(motion.pose_tokens))
    ids.append(vocab.mot_end)
    span.append(ROLE_END)
    return FramedSequence(ids=ids, span_map=span, vocab=vocab)


def unframe(framed: FramedSequence, vocab: Vocabulary) -> tuple[list[int], MotionTokenSequence]:
    """Inverse of frame(); recovers text ids and codebook-space motion tokens."""
    text_ids = [framed.ids[i] for i in framed.positions(ROLE_TEXT)]
    expr = [vocab.expr_token(framed.ids[i]) for i in framed.positions(ROLE_EXPR)]
    pose = [vocab.pose_token(framed.ids[i]) for i in framed.positions(ROLE_POSE)]
    return text_ids, MotionTokenSequence(expr_tokens=expr, pose_tokens=pose)


def build_attention_mask(framed: FramedSequence) -> np.ndarray:
    """L x L boolean mask; mask[i, j] is True when query i may attend to key j.

    Base causal rule (j <= i) plus: pose-span queries (MOT_END included) never
    attend to expression-span keys.  Text, MOT_START and MOT_MID keys stay
    visible to pose queries.
    """
    n = len(framed)
    mask = np.tril(np.ones((n, n), dtype=bool))
    roles = np.asarray(framed.span_map)
    pose_queries = (roles == ROLE_POSE) | (roles == ROLE_END)
    expr_keys = roles == ROLE_EXPR
    mask[np.ix_(pose_queries, expr_keys)] = False
    return mask


def classify(token_id: int, vocab: Vocabulary) -> str:
    return vocab.classify(token_id)
