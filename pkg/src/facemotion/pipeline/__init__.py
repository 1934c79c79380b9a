"""Stage orchestration: configuration, run manifests, and the demo run."""

from .config import PipelineConfig, canonical_json, default_config, load_config, load_schema
from .demo import demo_pipeline
from .manifest import (MANIFEST_FORMAT_VERSION, MANIFEST_NAME, RunManifest,
                       StageRecord, hash_file)
from .stages import PRODUCER, STAGE_ORDER, STAGES, PipelineContext, StageSpec, run_stage

__all__ = [
    "PipelineConfig", "canonical_json", "default_config", "load_config",
    "load_schema", "demo_pipeline", "MANIFEST_FORMAT_VERSION", "MANIFEST_NAME",
    "RunManifest", "StageRecord", "hash_file", "PRODUCER", "STAGE_ORDER",
    "STAGES", "PipelineContext", "StageSpec", "run_stage",
]
