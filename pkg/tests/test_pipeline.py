"""Configuration, run manifests, stage dependency checking, and the demo."""

import hashlib
import json

import pytest

from facemotion.errors import (ConfigurationError, DependencyError,
                               PipelineStageError, RejectedInputError)
from facemotion.llm import MockClient, OpenAIStyleClient
from facemotion.pipeline import (MANIFEST_NAME, PipelineConfig, RunManifest,
                                 StageRecord, canonical_json, default_config,
                                 demo_pipeline, hash_file, load_config,
                                 run_stage)

# Small enough to finish in seconds, large enough that every stage has real
# work: 6 clips of 50 frames, a 2-layer driver that can memorize 6 pairs, and
# metric settings sized to the tiny pools (text_fid needs dims+1 vectors per
# side; the hit pool leaves 5 distractor candidates).
SMALL_OVERRIDES = {
    "codec": {"epochs": 8, "n_codes": 32, "batch_size": 32, "stride": 5},
    "driver": {"n_layers": 2, "n_heads": 4, "d_model": 64, "context_length": 96,
               "epochs": 120, "batch_size": 8, "learning_rate": 0.001,
               "max_motion_length": 12},
    "corpus": {"n_clips": 6, "segment_frames": 25},
    "planner": {"n_plans": 4},
    "metrics": {"msp_samples": 3, "hit_m": 2, "hit_k": [1, 2], "text_dims": 3,
                "window_size": 25},
}


@pytest.fixture(scope="module")
def small_config():
    return load_config(overrides=SMALL_OVERRIDES)


# ---------------------------------------------------------------- config


def test_packaged_defaults_validate():
    cfg = PipelineConfig()
    assert cfg.seed == 0
    assert cfg.mock_llm is True
    assert cfg.raw == default_config()


def test_override_merge_is_deep():
    cfg = PipelineConfig().with_overrides({"driver": {"epochs": 3}})
    assert cfg.raw["driver"]["epochs"] == 3
    # siblings in the same section survive the merge
    assert cfg.raw["driver"]["d_model"] == default_config()["driver"]["d_model"]
    assert cfg.raw["codec"] == default_config()["codec"]


def test_bad_values_are_configuration_errors():
    with pytest.raises(ConfigurationError, match="codec"):
        PipelineConfig().with_overrides({"codec": {"n_codes": 1}})
    with pytest.raises(ConfigurationError):
        PipelineConfig().with_overrides({"planner": {"granularity": "medium"}})
    with pytest.raises(ConfigurationError):
        PipelineConfig().with_overrides({"no_such_section": {}})


def test_config_hash_ignores_key_order():
    a = PipelineConfig(raw={"seed": 3, "mock_llm": True})
    b = PipelineConfig(raw={"mock_llm": True, "seed": 3})
    assert a.config_hash == b.config_hash
    assert a.config_hash != PipelineConfig(raw={"seed": 4, "mock_llm": True}).config_hash
    assert canonical_json({"b": 1, "a": 2}) == '{"a":2,"b":1}'


def test_load_config_merges_file_then_overrides(tmp_path):
    path = tmp_path / "conf.json"
    path.write_text(json.dumps({"seed": 7, "driver": {"epochs": 5}}))
    cfg = load_config(path, overrides={"seed": 9})
    assert cfg.seed == 9                      # override beats file
    assert cfg.raw["driver"]["epochs"] == 5   # file beats defaults


def test_section_accessor_returns_copy():
    cfg = PipelineConfig()
    cfg.section("driver")["epochs"] = -1
    assert cfg.raw["driver"]["epochs"] == default_config()["driver"]["epochs"]


def test_typed_config_accessors_carry_seed(small_config):
    cfg = small_config.with_overrides({"seed": 11})
    assert cfg.codec_config().seed == 11
    assert cfg.codec_config().n_codes == 32
    assert cfg.driving_config().n_layers == 2
    assert cfg.trainer_config().epochs == 120
    sampler = cfg.sampler_config()
    assert sampler.strategy == "greedy" and sampler.max_motion_length == 12


def test_make_client_respects_mock_flag(tmp_path):
    cfg = PipelineConfig()
    assert isinstance(cfg.make_client(tmp_path / "c"), MockClient)
    live = cfg.with_overrides({"mock_llm": False, "client": {"model": "gpt-x"}})
    assert isinstance(live.make_client(tmp_path / "c"), OpenAIStyleClient)


# ---------------------------------------------------------------- manifest


def test_manifest_open_writes_header_and_reloads(tmp_path):
    m = RunManifest.open(tmp_path, config_hash="c" * 64)
    assert m.run_id == "run-" + "c" * 12
    again = RunManifest.open(tmp_path, config_hash="c" * 64)
    assert again.run_id == m.run_id and again.records == []
    header = json.loads((tmp_path / MANIFEST_NAME).read_text().splitlines()[0])
    assert header["kind"] == "header" and header["format_version"] == 1


def test_manifest_is_append_only_and_latest_wins(tmp_path):
    m = RunManifest.open(tmp_path, config_hash="a" * 64)
    m.append(StageRecord(stage="curate", config_hash="a" * 64, seed=0,
                         outputs={"clips.jsonl": "h1"}))
    m.append(StageRecord(stage="curate", config_hash="a" * 64, seed=0,
                         outputs={"clips.jsonl": "h2"}))
    assert m.latest("curate").outputs["clips.jsonl"] == "h2"
    assert m.latest("tokenize") is None
    lines = (tmp_path / MANIFEST_NAME).read_text().splitlines()
    assert len(lines) == 3  # header + both records, nothing rewritten
    reloaded = RunManifest.load(tmp_path / MANIFEST_NAME)
    assert [r.outputs for r in reloaded.records] == [{"clips.jsonl": "h1"},
                                                     {"clips.jsonl": "h2"}]
    assert all(r.timestamp for r in reloaded.records)


def test_manifest_rejects_missing_header(tmp_path):
    path = tmp_path / MANIFEST_NAME
    path.write_text('{"kind": "stage", "stage": "curate"}\n')
    with pytest.raises(RejectedInputError, match="header"):
        RunManifest.load(path)


def test_manifest_rejects_unknown_format_version(tmp_path):
    path = tmp_path / MANIFEST_NAME
    path.write_text(json.dumps({"kind": "header", "run_id": "r",
                                "config_hash": "x", "format_version": 99}) + "\n")
    with pytest.raises(RejectedInputError, match="format"):
        RunManifest.load(path)


def test_hash_file_matches_sha256(tmp_path):
    path = tmp_path / "blob.bin"
    path.write_bytes(b"hello world\n")
    assert hash_file(path) == hashlib.sha256(b"hello world\n").hexdigest()


def test_stage_record_round_trip():
    rec = StageRecord(stage="eval", config_hash="z" * 64, seed=5,
                      inputs={"a": "1"}, outputs={"b": "2"}, timestamp="t")
    assert StageRecord.from_record(rec.to_record()) == rec


# ---------------------------------------------------------------- stages


def test_unknown_stage_is_rejected(small_config, tmp_path):
    with pytest.raises(RejectedInputError, match="curate"):
        run_stage("transmogrify", small_config, tmp_path)


def test_missing_dependency_names_producer(small_config, tmp_path):
    with pytest.raises(DependencyError, match="'curate'"):
        run_stage("tokenize", small_config, tmp_path)


def test_rerun_with_unchanged_inputs_is_noop(small_config, tmp_path):
    first = run_stage("curate", small_config, tmp_path)
    lines_before = (tmp_path / MANIFEST_NAME).read_text().splitlines()
    second = run_stage("curate", small_config, tmp_path)
    lines_after = (tmp_path / MANIFEST_NAME).read_text().splitlines()
    assert second == first                 # same record object contents
    assert lines_after == lines_before    # and no new manifest line


def test_tampered_input_is_detected(small_config, tmp_path):
    run_stage("curate", small_config, tmp_path)
    clips = tmp_path / "clips.jsonl"
    clips.write_text(clips.read_text() + "\n")
    with pytest.raises(DependencyError, match="clips.jsonl"):
        run_stage("tokenize", small_config, tmp_path)


def test_stage_failure_is_wrapped_with_stage_name(small_config, tmp_path):
    bad = small_config.with_overrides({"corpus": {"n_clips": 4000}})
    with pytest.raises(PipelineStageError, match="curate") as err:
        run_stage("curate", bad, tmp_path)
    assert err.value.stage == "curate"


def test_changed_config_triggers_rerun(small_config, tmp_path):
    run_stage("curate", small_config, tmp_path)
    reseeded = small_config.with_overrides({"seed": 1})
    run_stage("curate", reseeded, tmp_path)
    manifest = RunManifest.load(tmp_path / MANIFEST_NAME)
    hashes = [r.config_hash for r in manifest.records if r.stage == "curate"]
    assert len(hashes) == 2 and hashes[0] != hashes[1]


# ---------------------------------------------------------------- demo


def test_demo_is_deterministic_across_workdirs(small_config, tmp_path):
    report_a = demo_pipeline(small_config, tmp_path / "a")
    report_b = demo_pipeline(small_config, tmp_path / "b")
    bytes_a = (tmp_path / "a" / "report.json").read_bytes()
    bytes_b = (tmp_path / "b" / "report.json").read_bytes()
    assert bytes_a == bytes_b
    assert report_a.as_dict() == report_b.as_dict()

    # the report covers every surface the run produced
    assert set(report_a.spaces) == {"expression", "pose"}
    for space in report_a.spaces.values():
        assert space["snd"] == pytest.approx(space["fid"] + space["fid_delta"])
    assert 0.0 <= report_a.msp <= 100.0 and 0.0 <= report_a.mse <= 100.0
    rates = report_a.hit["end_to_end"]["rates"]
    assert set(rates) == {"1", "2"}
    assert report_a.extra["n_generated"] == 10  # 6 curated + 4 planned
    assert "text_fid_planned_vs_curated" in report_a.extra
    assert (tmp_path / "a" / "report.txt").exists()

    # re-running the whole demo in place changes nothing on disk
    manifest_before = (tmp_path / "a" / MANIFEST_NAME).read_text()
    demo_pipeline(small_config, tmp_path / "a")
    assert (tmp_path / "a" / MANIFEST_NAME).read_text() == manifest_before
    assert (tmp_path / "a" / "report.json").read_bytes() == bytes_a


def test_demo_artifacts_follow_manifest_hashes(small_config, tmp_path):
    demo_pipeline(small_config, tmp_path)
    manifest = RunManifest.load(tmp_path / MANIFEST_NAME)
    assert manifest.config_hash == small_config.config_hash
    seen = [r.stage for r in manifest.records]
    assert seen == ["curate", "tokenize", "train-driver", "plan", "drive", "eval"]
    for record in manifest.records:
        for artifact, digest in record.outputs.items():
            assert hash_file(tmp_path / artifact) == digest
