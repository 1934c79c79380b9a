"""Pipeline configuration: schema-validated, hashable, section accessors.

A configuration is a plain JSON document merged over the packaged defaults
and validated against the packaged schema before any stage runs.  The
canonical-JSON hash of the merged document identifies the configuration in
run manifests and reports.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources

import jsonschema

from ..driving import DrivingConfig, SamplerConfig, TrainerConfig
from ..errors import ConfigurationError
from ..llm import LLMClient, MockClient, OpenAIStyleClient, RetryPolicy
from ..tokenizer import CodecConfig


def _asset_json(name: str) -> dict:
    ref = resources.files("facemotion.assets").joinpath(name)
    return json.loads(ref.read_text(encoding="utf-8"))


def load_schema() -> dict:
    return _asset_json("config_schema.json")


def default_config() -> dict:
    return _asset_json("default_config.json")


def _deep_merge(base: dict, override: dict) -> dict:
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def canonical_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class PipelineConfig:
    """The merged, validated configuration document."""

    raw: dict = field(default_factory=default_config)

    def __post_init__(self):
        try:
            jsonschema.validate(self.raw, load_schema())
        except jsonschema.ValidationError as exc:
            raise ConfigurationError(
                f"invalid configuration at {'/'.join(str(p) for p in exc.absolute_path) or '<root>'}: "
                f"{exc.message}") from exc

    @property
    def seed(self) -> int:
        return int(self.raw.get("seed", 0))

    @property
    def mock_llm(self) -> bool:
        return bool(self.raw.get("mock_llm", True))

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(canonical_json(self.raw).encode("utf-8")).hexdigest()

    def section(self, name: str) -> dict:
        return dict(self.raw.get(name, {}))

    def codec_config(self) -> CodecConfig:
        sec = self.section("codec")
        return CodecConfig(seed=self.seed, **sec)

    def driving_config(self) -> DrivingConfig:
        sec = self.section("driver")
        fields = {k: sec[k] for k in ("n_layers", "n_heads", "d_model",
                                      "context_length", "use_pose_expr_mask")
                  if k in sec}
        return DrivingConfig(seed=self.seed, **fields)

    def trainer_config(self) -> TrainerConfig:
        sec = self.section("driver")
        fields = {k: sec[k] for k in ("epochs", "batch_size", "learning_rate",
                                      "weight_decay") if k in sec}
        return TrainerConfig(seed=self.seed, **fields)

    def sampler_config(self) -> SamplerConfig:
        sec = self.section("driver")
        return SamplerConfig(strategy="greedy", seed=self.seed,
                             max_motion_length=int(sec.get("max_motion_length", 64)))

    def make_client(self, cache_dir) -> LLMClient:
        sec = self.section("client")
        retry = RetryPolicy(max_attempts=int(sec.get("max_attempts", 3)))
        if self.mock_llm:
            return MockClient(model=sec.get("model", "mock"),
                              temperature=float(sec.get("temperature", 0.0)),
                              cache_dir=cache_dir, retry=retry)
        kwargs = {}
        if "base_url" in sec:
            kwargs["endpoint"] = sec["base_url"]
        return OpenAIStyleClient(model=sec.get("model", ""),
                                 temperature=float(sec.get("temperature", 0.0)),
                                 cache_dir=cache_dir, retry=retry, **kwargs)

    def with_overrides(self, overrides: dict) -> "PipelineConfig":
        return PipelineConfig(raw=_deep_merge(self.raw, overrides))


def load_config(path=None, overrides: dict | None = None) -> PipelineConfig:
    """Defaults <- optional file <- optional overrides, then validate."""
    doc = default_config()
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            doc = _deep_merge(doc, json.load(fh))
    if overrides:
        doc = _deep_merge(doc, overrides)
    return PipelineConfig(raw=doc)
