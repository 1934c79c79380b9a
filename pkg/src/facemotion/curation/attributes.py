"""Per-frame attribute extraction: action-unit thresholding and records."""

from __future__ import annotations

import json
from dataclasses import dataclass

from ..errors import RejectedInputError
from .taxonomy import BLINK_LABELS, FAU_LABELS, GAZE_LABELS, POSE_LABELS, label_text

FAU_THRESHOLD = 0.5


@dataclass(frozen=True)
class FAUFrame:
    """One frame's action-unit probabilities, complete over all 41 labels."""

    probabilities: dict

    def __post_init__(self):
        missing = set(FAU_LABELS) - set(self.probabilities)
        extra = set(self.probabilities) - set(FAU_LABELS)
        if missing or extra:
            raise RejectedInputError(
                f"action-unit table mismatch: missing {sorted(missing)}, "
                f"unknown {sorted(extra)}")
        for code, p in self.probabilities.items():
            if not 0.0 <= float(p) <= 1.0:
                raise RejectedInputError(f"{code} probability {p} outside [0, 1]")


def threshold_faus(frame: FAUFrame) -> frozenset:
    """Active labels: probability strictly greater than 0.5."""
    return frozenset(code for code, p in frame.probabilities.items()
                     if float(p) > FAU_THRESHOLD)


@dataclass(frozen=True)
class AttributeRecord:
    """One frame's full attribute set: active FAUs plus one label per family."""

    frame_index: int
    active_faus: frozenset
    gaze_label: str
    pose_label: str
    blink_label: str

    def __post_init__(self):
        unknown = self.active_faus - set(FAU_LABELS)
        if unknown:
            raise RejectedInputError(f"unknown action-unit codes {sorted(unknown)}")
        if self.gaze_label not in GAZE_LABELS:
            raise RejectedInputError(f"unknown gaze label {self.gaze_label!r}")
        if self.pose_label not in POSE_LABELS:
            raise RejectedInputError(f"unknown pose label {self.pose_label!r}")
        if self.blink_label not in BLINK_LABELS:
            raise RejectedInputError(f"unknown blink label {self.blink_label!r}")

    def phrases(self) -> list[str]:
        """Human-readable attribute strings, action units first."""
        out = [label_text(code) for code in sorted(self.active_faus)]
        out += [label_text(self.gaze_label), label_text(self.pose_label),
                label_text(self.blink_label)]
        return out

    def to_record(self) -> dict:
        return {"frame_index": self.frame_index,
                "active_faus": sorted(self.active_faus),
                "gaze_label": self.gaze_label, "pose_label": self.pose_label,
                "blink_label": self.blink_label}

    @classmethod
    def from_record(cls, rec: dict) -> "AttributeRecord":
        return cls(frame_index=rec["frame_index"],
                   active_faus=frozenset(rec["active_faus"]),
                   gaze_label=rec["gaze_label"], pose_label=rec["pose_label"],
                   blink_label=rec["blink_label"])


def write_attribute_records(records, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_record(), sort_keys=True) + "\n")


def read_attribute_records(path) -> list[AttributeRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(AttributeRecord.from_record(json.loads(line)))
    return out


def read_fau_frames(path) -> list[FAUFrame]:
    """JSONL of {"frame_index": i, "probabilities": {code: p}} rows."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(FAUFrame(probabilities=json.loads(line)["probabilities"]))
    return out


def write_fau_frames(frames, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for i, frame in enumerate(frames):
            fh.write(json.dumps({"frame_index": i,
                                 "probabilities": frame.probabilities},
                                sort_keys=True) + "\n")
