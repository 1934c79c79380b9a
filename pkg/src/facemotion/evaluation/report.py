"""Structured metric reports with config echo and input hashes.

Reports are deterministic functions of their inputs: keys are sorted, floats
are stored as repr-exact JSON numbers, and no timestamps are embedded, so two
runs with the same seeds produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from ..errors import RejectedInputError


def content_hash(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass
class MetricReport:
    """Everything a run measured, plus how the inputs were configured.

    ``spaces`` maps a space name (embedding | 3dmm | text) to its
    naturalness numbers; the SND field of every space must equal
    fid + fid_delta exactly as floats.
    """

    spaces: dict = field(default_factory=dict)
    msp: float | None = None
    mse: float | None = None
    hit: dict = field(default_factory=dict)
    winning: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    config_echo: dict = field(default_factory=dict)
    input_hashes: dict = field(default_factory=dict)

    def __post_init__(self):
        for name, space in self.spaces.items():
            if "snd" in space and space["snd"] != space["fid"] + space["fid_delta"]:
                raise RejectedInputError(
                    f"space {name!r}: snd must equal fid + fid_delta exactly")

    def as_dict(self) -> dict:
        return {"spaces": self.spaces, "msp": self.msp, "mse": self.mse,
                "hit": self.hit, "winning": self.winning, "extra": self.extra,
                "config_echo": self.config_echo, "input_hashes": self.input_hashes}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json() + "\n")

    @classmethod
    def load(cls, path) -> "MetricReport":
        with open(path, encoding="utf-8") as fh:
            rec = json.load(fh)
        return cls(**rec)

    def render_text(self) -> str:
        """Human-readable summary; the JSON file stays the source of truth."""
        lines = ["metric report", "============="]
        for name in sorted(self.spaces):
            s = self.spaces[name]
            lines.append(f"[{name}] var={s.get('var'):.6g} fid={s['fid']:.6g} "
                         f"fid_delta={s['fid_delta']:.6g} snd={s['snd']:.6g}")
        if self.msp is not None:
            lines.append(f"msp={self.msp:.2f} mse={self.mse:.2f}")
        for name in sorted(self.hit):
            rates = self.hit[name].get("rates", {})
            pretty = " ".join(f"hit@{k}={100 * v:.1f}%" for k, v in sorted(
                rates.items(), key=lambda kv: int(kv[0])))
            lines.append(f"[{name}] {pretty}")
        for pair in sorted(self.winning):
            value = self.winning[pair]
            lines.append(f"winning {pair}: "
                         + ("n/a (all ties)" if value is None else f"{value:.1f}%"))
        for key in sorted(self.extra):
            value = self.extra[key]
            if isinstance(value, float):
                lines.append(f"{key}={value:.6g}")
            elif isinstance(value, (int, str)):
                lines.append(f"{key}={value}")
        if self.input_hashes:
            lines.append("inputs:")
            lines += [f"  {k}: {v}" for k, v in sorted(self.input_hashes.items())]
        if self.config_echo:
            lines.append("config: " + json.dumps(self.config_echo, sort_keys=True))
        return "\n".join(lines) + "\n"
