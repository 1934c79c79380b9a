"""Pairing descriptions with motion tokens into a training dataset."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from ..driving.training import TrainingPair
from ..protocol import MotionTokenSequence
from ..tokenizer import TokenizerPair, encode_clip

logger = logging.getLogger(__name__)

# Reference corpus sizes at full scale, recorded in split manifests for
# context; desk-scale runs use far smaller fixture counts.
FULL_SCALE_REFERENCE = {"train_videos": 4000, "train_clips": 8678, "test_clips": 300}


@dataclass
class SkipRecord:
    clip_id: str
    reason: str


@dataclass
class SplitManifest:
    train_ids: list[str]
    test_ids: list[str]
    metadata: dict = field(default_factory=lambda: dict(
        full_scale_reference=FULL_SCALE_REFERENCE))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump({"train_ids": self.train_ids, "test_ids": self.test_ids,
                       "metadata": self.metadata}, fh, indent=2, sort_keys=True)

    @classmethod
    def load(cls, path) -> "SplitManifest":
        with open(path, encoding="utf-8") as fh:
            rec = json.load(fh)
        return cls(train_ids=rec["train_ids"], test_ids=rec["test_ids"],
                   metadata=rec["metadata"])


def build_pairs(clips, codecs: TokenizerPair, descriptions: dict
                ) -> tuple[list[TrainingPair], list[SkipRecord]]:
    """One pair per clip with an aggregate description; the rest are skipped.

    ``descriptions`` maps clip_id to a ClipDescription (or any object with an
    ``aggregate_description``).
    """
    pairs, skips = [], []
    for clip in clips:
        desc = descriptions.get(clip.clip_id)
        if desc is None or not getattr(desc, "aggregate_description", ""):
            skips.append(SkipRecord(clip_id=clip.clip_id, reason="missing description"))
            logger.warning("clip %s skipped: missing description", clip.clip_id)
            continue
        expr, pose = encode_clip(clip, codecs)
        pairs.append(TrainingPair(
            description=desc.aggregate_description,
            motion=MotionTokenSequence(expr_tokens=expr, pose_tokens=pose),
            pair_id=clip.clip_id))
    return pairs, skips


def split_pairs(pairs, test_fraction: float = 0.1, seed: int = 0) -> SplitManifest:
    """Deterministic shuffle split by pair id."""
    ids = [p.pair_id for p in pairs]
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(ids))
    n_test = max(1, int(round(test_fraction * len(ids)))) if len(ids) > 1 else 0
    test = sorted(ids[i] for i in order[:n_test])
    train = sorted(ids[i] for i in order[n_test:])
    return SplitManifest(train_ids=train, test_ids=test)
