"""Windowed attribute-to-description generation.

Clips are cut into non-overlapping 25-frame (1-second) windows; each window's
attribute stream is described by the client, and multi-window clips get one
aggregate description built from the per-window texts.  Leftover frames
shorter than a window are dropped and counted.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from ..errors import RejectedInputError
from ..llm import LLMClient
from ..planner.templates import load_template

WINDOW_SIZE_FRAMES = 25


@dataclass
class ClipDescription:
    clip_id: str
    window_descriptions: list[str]
    aggregate_description: str
    window_size_frames: int = WINDOW_SIZE_FRAMES
    dropped_frames: int = 0

    def to_record(self) -> dict:
        return {"clip_id": self.clip_id,
                "window_descriptions": self.window_descriptions,
                "aggregate_description": self.aggregate_description,
                "window_size_frames": self.window_size_frames,
                "dropped_frames": self.dropped_frames}

    @classmethod
    def from_record(cls, rec: dict) -> "ClipDescription":
        return cls(**rec)


@dataclass
class WindowPartition:
    windows: list[list]          # window_count lists of window_size records
    dropped_frames: int
    window_size_frames: int = WINDOW_SIZE_FRAMES


def partition_windows(records, window_size: int = WINDOW_SIZE_FRAMES) -> WindowPartition:
    """floor(t / window_size) disjoint windows; the remainder is dropped."""
    records = list(records)
    n_windows = len(records) // window_size
    windows = [records[i * window_size:(i + 1) * window_size]
               for i in range(n_windows)]
    return WindowPartition(windows=windows,
                           dropped_frames=len(records) - n_windows * window_size,
                           window_size_frames=window_size)


def _attribute_lines(records) -> str:
    lines = []
    for rec in records:
        lines.append(f"frame {rec.frame_index}: " + "; ".join(rec.phrases()))
    return "\n".join(lines)


def describe_window(records, client: LLMClient,
                    window_size: int = WINDOW_SIZE_FRAMES) -> str:
    """One-second description from exactly ``window_size`` attribute records."""
    records = list(records)
    if len(records) != window_size:
        raise RejectedInputError(
            f"a window needs exactly {window_size} records, got {len(records)}")
    template = load_template("describe_window")
    prompt = template.render(attributes=_attribute_lines(records))
    return client.complete(prompt)


def aggregate_windows(window_texts, client: LLMClient) -> str:
    """Combine per-second descriptions into one longer description."""
    window_texts = list(window_texts)
    if len(window_texts) < 2:
        raise RejectedInputError("aggregation needs at least 2 window descriptions")
    template = load_template("aggregate_windows")
    numbered = "\n".join(f"{i + 1}. {t}" for i, t in enumerate(window_texts))
    return client.complete(template.render(window_descriptions=numbered))


def describe_clip(clip_id: str, records, client: LLMClient,
                  window_size: int = WINDOW_SIZE_FRAMES) -> ClipDescription:
    """Full hierarchy: window descriptions, then an aggregate over them.

    Single-window clips reuse the window text as the aggregate (there is
    nothing to combine); clips shorter than one window are rejected.
    """
    part = partition_windows(records, window_size)
    if not part.windows:
        raise RejectedInputError(
            f"clip {clip_id}: {part.dropped_frames} frames is shorter than one window")
    texts = [describe_window(w, client, window_size) for w in part.windows]
    if len(texts) == 1:
        aggregate = texts[0]
    else:
        aggregate = aggregate_windows(texts, client)
    return ClipDescription(clip_id=clip_id, window_descriptions=texts,
                           aggregate_description=aggregate,
                           window_size_frames=window_size,
                           dropped_frames=part.dropped_frames)


def write_descriptions(descriptions, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for desc in descriptions:
            fh.write(json.dumps(desc.to_record(), sort_keys=True) + "\n")


def read_descriptions(path) -> list[ClipDescription]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(ClipDescription.from_record(json.loads(line)))
    return out
