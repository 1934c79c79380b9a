"""Round-trip matching scores (MSP for head pose, MSE for expression).

There is no renderer in this pipeline, so generated tokens are judged by a
label readout instead: decode tokens to embeddings, read per-frame attribute
labels straight off the embeddings (threshold map for action units, mixture
models for gaze/pose/blink), describe the label stream with the standard
curation prompts, and have a judge score how well that round-trip
description matches the input description — head pose and expression scored
independently on a 0..100 scale.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from ..curation.attributes import AttributeRecord, FAUFrame, threshold_faus
from ..curation.describe import WINDOW_SIZE_FRAMES, describe_clip
from ..curation.gmm import GMMModel, assign_labels
from ..curation.taxonomy import FAU_LABELS
from ..errors import JudgeParseError
from ..llm import LLMClient
from ..planner.templates import load_template
from ..tokenizer import TokenizerPair, decode_tokens

POSE_ASPECT = "head pose"
EXPRESSION_ASPECT = "facial expression"


def clip01(x: np.ndarray) -> np.ndarray:
    return np.clip(x, 0.0, 1.0)


@dataclass
class LabelReadout:
    """Maps decoded embeddings to per-frame attribute records.

    ``fau_dims`` assigns an expression dimension to each action-unit code it
    covers; that dimension's value, clipped to [0, 1], is the unit's
    probability (uncovered codes read 0).  Gaze/blink labels come from
    mixture models over expression-dimension slices, pose labels from a
    mixture model over a pose-dimension slice.
    """

    fau_dims: dict
    gaze_model: GMMModel
    pose_model: GMMModel
    blink_model: GMMModel
    gaze_dims: tuple = ()
    blink_dims: tuple = ()
    pose_dims: tuple = ()

    def fau_frame(self, expr_frame: np.ndarray) -> FAUFrame:
        probs = {code: 0.0 for code in FAU_LABELS}
        for code, dim in self.fau_dims.items():
            probs[code] = float(clip01(expr_frame[dim]))
        return FAUFrame(probabilities=probs)

    def attributes(self, clip) -> list[AttributeRecord]:
        expr, pose = clip.expression, clip.pose
        gaze_feats = expr[:, list(self.gaze_dims)] if self.gaze_dims else expr
        blink_feats = expr[:, list(self.blink_dims)] if self.blink_dims else expr
        pose_feats = pose[:, list(self.pose_dims)] if self.pose_dims else pose
        gaze = assign_labels(gaze_feats, self.gaze_model)
        pose_labels = assign_labels(pose_feats, self.pose_model)
        blink = assign_labels(blink_feats, self.blink_model)
        records = []
        for i in range(clip.n_frames):
            records.append(AttributeRecord(
                frame_index=i,
                active_faus=threshold_faus(self.fau_frame(expr[i])),
                gaze_label=gaze[i], pose_label=pose_labels[i],
                blink_label=blink[i]))
        return records


def _parse_score(text: str) -> int:
    match = re.search(r"-?\d+", text)
    if match is None:
        raise JudgeParseError(f"no integer score in {text!r}")
    score = int(match.group())
    if not 0 <= score <= 100:
        raise JudgeParseError(f"score {score} outside 0..100")
    return score


def match_score(input_desc: str, roundtrip_desc: str, aspect: str,
                client: LLMClient) -> int:
    """Judge-scored 0..100 match for one aspect, with one strict re-ask."""
    template = load_template("match_score")
    prompt = template.render(aspect=aspect, first=input_desc, second=roundtrip_desc)
    try:
        return _parse_score(client.complete(prompt))
    except JudgeParseError:
        strict = prompt + "\nReply with ONLY one integer between 0 and 100."
        return _parse_score(client.complete(strict))


@dataclass
class MatchReport:
    msp: float
    mse: float
    n_samples: int
    per_sample: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"msp": self.msp, "mse": self.mse, "n_samples": self.n_samples}


def roundtrip_description(motion, codecs: TokenizerPair, readout: LabelReadout,
                          client: LLMClient,
                          window_size: int = WINDOW_SIZE_FRAMES) -> str:
    clip = decode_tokens(motion.expr_tokens, motion.pose_tokens, codecs)
    records = readout.attributes(clip)
    return describe_clip(clip.clip_id, records, client,
                         window_size=window_size).aggregate_description


def msp_mse(samples, codecs: TokenizerPair, readout: LabelReadout,
            client: LLMClient, judge_client: LLMClient | None = None,
            window_size: int = WINDOW_SIZE_FRAMES) -> MatchReport:
    """samples: (input_description, MotionTokenSequence) pairs."""
    judge_client = judge_client or client
    pose_scores, expr_scores, per_sample = [], [], []
    samples = list(samples)
    for input_desc, motion in samples:
        rt = roundtrip_description(motion, codecs, readout, client, window_size)
        msp = match_score(input_desc, rt, POSE_ASPECT, judge_client)
        mse = match_score(input_desc, rt, EXPRESSION_ASPECT, judge_client)
        pose_scores.append(msp)
        expr_scores.append(mse)
        per_sample.append({"roundtrip": rt, "msp": msp, "mse": mse})
    return MatchReport(msp=float(np.mean(pose_scores)) if pose_scores else 0.0,
                       mse=float(np.mean(expr_scores)) if expr_scores else 0.0,
                       n_samples=len(samples), per_sample=per_sample)
