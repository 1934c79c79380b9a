"""Append-only run manifests recording stage inputs/outputs by content hash.

The manifest is a JSONL file: a header line identifying the run, then one
line per completed stage execution.  Lines are only ever appended, so the
full history of a working directory stays auditable.  Timestamps live here
and only here — reports must stay byte-reproducible.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import RejectedInputError

MANIFEST_FORMAT_VERSION = 1
MANIFEST_NAME = "manifest.jsonl"


def hash_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass
class StageRecord:
    stage: str
    config_hash: str
    seed: int
    inputs: dict = field(default_factory=dict)    # artifact name -> sha256
    outputs: dict = field(default_factory=dict)
    timestamp: str = ""
    status: str = "complete"

    def to_record(self) -> dict:
        return {"kind": "stage", "stage": self.stage, "config_hash": self.config_hash,
                "seed": self.seed, "inputs": self.inputs, "outputs": self.outputs,
                "timestamp": self.timestamp, "status": self.status}

    @classmethod
    def from_record(cls, rec: dict) -> "StageRecord":
        return cls(stage=rec["stage"], config_hash=rec["config_hash"],
                   seed=rec["seed"], inputs=rec["inputs"], outputs=rec["outputs"],
                   timestamp=rec.get("timestamp", ""),
                   status=rec.get("status", "complete"))


class RunManifest:
    """One manifest per working directory; records accumulate, never rewrite."""

    def __init__(self, path, run_id: str, config_hash: str,
                 records: list | None = None):
        self.path = Path(path)
        self.run_id = run_id
        self.config_hash = config_hash
        self.records: list[StageRecord] = records or []

    @classmethod
    def open(cls, workdir, config_hash: str) -> "RunManifest":
        """Load the directory's manifest, or start one with a header line."""
        path = Path(workdir) / MANIFEST_NAME
        if path.exists():
            return cls.load(path)
        run_id = f"run-{config_hash[:12]}"
        manifest = cls(path, run_id=run_id, config_hash=config_hash)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps({"kind": "header", "run_id": run_id,
                                 "config_hash": config_hash,
                                 "format_version": MANIFEST_FORMAT_VERSION,
                                 "created": _now()}, sort_keys=True) + "\n")
        return manifest

    @classmethod
    def load(cls, path) -> "RunManifest":
        with open(path, encoding="utf-8") as fh:
            lines = [json.loads(line) for line in fh if line.strip()]
        if not lines or lines[0].get("kind") != "header":
            raise RejectedInputError(f"{path}: not a run manifest (missing header)")
        header = lines[0]
        if header.get("format_version") != MANIFEST_FORMAT_VERSION:
            raise RejectedInputError(
                f"{path}: manifest format {header.get('format_version')} unsupported")
        records = [StageRecord.from_record(rec) for rec in lines[1:]]
        return cls(path, run_id=header["run_id"], config_hash=header["config_hash"],
                   records=records)

    def append(self, record: StageRecord) -> None:
        record.timestamp = record.timestamp or _now()
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record.to_record(), sort_keys=True) + "\n")
        self.records.append(record)

    def latest(self, stage: str) -> StageRecord | None:
        for record in reversed(self.records):
            if record.stage == stage:
                return record
        return None


def _now() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
