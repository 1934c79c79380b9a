"""The stage graph: curate -> tokenize -> train-driver -> plan -> drive -> eval.

Every stage reads its inputs from files produced by earlier stages, verifies
them against the run manifest's recorded content hashes, writes its own
outputs, and appends a manifest record.  Re-running a stage whose config,
inputs, and outputs are all unchanged is a no-op.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..curation.dataset import build_pairs
from ..curation.describe import describe_clip, read_descriptions, write_descriptions
from ..driving import (SamplerConfig, TextTokenizer, generate, load_model,
                       read_pairs, save_model, train, write_pairs)
from ..errors import DependencyError, PipelineStageError, RejectedInputError
from ..evaluation import (ClientJudge, EndToEndConfig, HashingTextEmbedder,
                          MetricReport, average_baseline, end_to_end_hit,
                          msp_mse, naturalness_suite, random_gt_baseline,
                          text_fid_pca)
from ..protocol import MotionTokenSequence, Vocabulary
from ..synthetic import grammar_combos, make_label_readout, make_motif_clip
from ..tokenizer import (decode_tokens, load_tokenizer, read_clips, save_tokenizer,
                         train_codec, write_clips)
from .config import PipelineConfig
from .manifest import RunManifest, StageRecord, hash_file

logger = logging.getLogger(__name__)

STAGE_ORDER = ("curate", "tokenize", "train-driver", "plan", "drive", "eval")


@dataclass
class PipelineContext:
    config: PipelineConfig
    workdir: Path

    def path(self, artifact: str) -> Path:
        return self.workdir / artifact

    def client(self):
        return self.config.make_client(self.workdir / "llm_cache")


# ---------------------------------------------------------------- stages


def _stage_curate(ctx: PipelineContext) -> None:
    """Synthesize labeled clips and describe them with the standard prompts."""
    corpus = ctx.config.section("corpus")
    n_clips = int(corpus.get("n_clips", 48))
    segment_frames = int(corpus.get("segment_frames", 25))
    combos = grammar_combos()
    if n_clips > len(combos):
        raise RejectedInputError(f"n_clips {n_clips} exceeds {len(combos)} motif combos")
    rng = np.random.default_rng(ctx.config.seed)
    picked = [combos[i] for i in rng.permutation(len(combos))[:n_clips]]
    clips = [make_motif_clip(*combo, clip_id=f"clip-{i:03d}",
                             segment_frames=segment_frames)
             for i, combo in enumerate(picked)]
    write_clips(clips, ctx.path("clips.jsonl"))

    readout = make_label_readout(ctx.config.seed)
    client = ctx.client()
    window = int(ctx.config.section("metrics").get("window_size", 25))
    descriptions = [describe_clip(c.clip_id, readout.attributes(c), client,
                                  window_size=window) for c in clips]
    write_descriptions(descriptions, ctx.path("descriptions.jsonl"))
    logger.info("curated %d clips with descriptions", len(clips))


def _stage_tokenize(ctx: PipelineContext) -> None:
    clips = read_clips(ctx.path("clips.jsonl"))
    codecs = train_codec(clips, ctx.config.codec_config())
    save_tokenizer(codecs, ctx.path("tokenizer.npz"))


def _stage_train_driver(ctx: PipelineContext) -> None:
    clips = read_clips(ctx.path("clips.jsonl"))
    descriptions = {d.clip_id: d for d in read_descriptions(ctx.path("descriptions.jsonl"))}
    codecs = load_tokenizer(ctx.path("tokenizer.npz"))
    pairs, skips = build_pairs(clips, codecs, descriptions)
    if skips:
        logger.warning("%d clips skipped while pairing", len(skips))
    write_pairs(pairs, ctx.path("pairs.jsonl"))

    pairs = read_pairs(ctx.path("pairs.jsonl"))
    text_tok = TextTokenizer.from_corpus(p.description for p in pairs)
    n_codes = codecs.expression_codec.codebook.n_codes
    vocab = Vocabulary(text_size=text_tok.size, n_expr=n_codes, n_pose=n_codes)
    model, log = train(pairs, vocab, text_tokenizer=text_tok,
                       model_config=ctx.config.driving_config(),
                       trainer_config=ctx.config.trainer_config())
    save_model(model, ctx.path("driver.pt"))
    with open(ctx.path("train_log.json"), "w", encoding="utf-8") as fh:
        json.dump({"epoch_losses": log.epoch_losses, "final_loss": log.final_loss},
                  fh, indent=2, sort_keys=True)


def _stage_plan(ctx: PipelineContext) -> None:
    from ..planner import (Agent, ConditionTuple, load_template, plan_many,
                           synthesize_envpersona)

    client = ctx.client()
    dataset = synthesize_envpersona(client)
    dataset.save(ctx.path("envpersona.jsonl"))

    planner_cfg = ctx.config.section("planner")
    n_plans = int(planner_cfg.get("n_plans", 24))
    granularity = planner_cfg.get("granularity", "fine")
    conds = [ConditionTuple(instruction=f"express {pair.emotion}",
                            environment=pair.environment,
                            agent=Agent(persona=pair.persona))
             for pair in dataset.pairs[:n_plans]]
    template = load_template("env_persona")
    results = plan_many(conds, template, client, granularity=granularity)
    with open(ctx.path("plans.jsonl"), "w", encoding="utf-8") as fh:
        for cond, res in zip(conds, results):
            fh.write(json.dumps({"environment": cond.environment,
                                 "persona": cond.agent.persona,
                                 "granularity": res.granularity,
                                 "text": res.raw_text,
                                 "provenance": res.provenance},
                                sort_keys=True) + "\n")


def _stage_drive(ctx: PipelineContext) -> None:
    model = load_model(ctx.path("driver.pt"))
    pairs = read_pairs(ctx.path("pairs.jsonl"))
    with open(ctx.path("plans.jsonl"), encoding="utf-8") as fh:
        plans = [json.loads(line) for line in fh if line.strip()]
    sampler = ctx.config.sampler_config()

    rows = []
    for pair in pairs:
        result = generate(model, pair.description, sampler)
        rows.append({"source": "curated", "item_id": pair.pair_id,
                     "description": pair.description,
                     "expr_tokens": result.motion.expr_tokens,
                     "pose_tokens": result.motion.pose_tokens,
                     "truncated": result.truncated})
    for i, rec in enumerate(plans):
        result = generate(model, rec["text"], sampler)
        rows.append({"source": "planned", "item_id": f"plan-{i:03d}",
                     "description": rec["text"],
                     "expr_tokens": result.motion.expr_tokens,
                     "pose_tokens": result.motion.pose_tokens,
                     "truncated": result.truncated})
    with open(ctx.path("generated.jsonl"), "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
    n_trunc = sum(r["truncated"] for r in rows)
    logger.info("drove %d descriptions (%d truncated)", len(rows), n_trunc)


def _stage_eval(ctx: PipelineContext) -> None:
    codecs = load_tokenizer(ctx.path("tokenizer.npz"))
    clips = read_clips(ctx.path("clips.jsonl"))
    with open(ctx.path("generated.jsonl"), encoding="utf-8") as fh:
        rows = [json.loads(line) for line in fh if line.strip()]
    curated = [r for r in rows if r["source"] == "curated"]
    planned = [r for r in rows if r["source"] == "planned"]
    metrics = ctx.config.section("metrics")
    window = int(metrics.get("window_size", 25))
    seed = ctx.config.seed

    def decoded(row):
        return decode_tokens(row["expr_tokens"], row["pose_tokens"], codecs)

    decodable = [r for r in curated
                 if len(r["expr_tokens"]) and len(r["pose_tokens"])]
    gen_clips = [decoded(r) for r in decodable]

    spaces = {}
    for stream in ("expression", "pose"):
        gen_seqs = [getattr(c, stream) for c in gen_clips]
        ref_seqs = [getattr(c, stream) for c in clips]
        spaces[stream] = naturalness_suite(gen_seqs, ref_seqs).as_dict()

    # baseline context: constant-mean sequences and shuffled ground truth
    ref_expr = [c.expression for c in clips]
    baseline = {
        "average_fid_expression": naturalness_suite(
            [average_baseline(ref_expr, len(s)) for s in ref_expr[:len(gen_clips)]],
            ref_expr).fid,
        "random_gt_fid_expression": naturalness_suite(
            random_gt_baseline(ref_expr, np.random.default_rng(seed)), ref_expr).fid,
    }

    client = ctx.client()
    readout = make_label_readout(seed)
    min_frames = window  # round-trip description needs at least one window
    judgeable = [r for r in decodable
                 if len(r["expr_tokens"]) * codecs.temporal_stride >= min_frames]
    msp_n = min(int(metrics.get("msp_samples", 8)), len(judgeable))
    samples = [(r["description"],
                MotionTokenSequence(expr_tokens=r["expr_tokens"],
                                    pose_tokens=r["pose_tokens"]))
               for r in judgeable]
    match = msp_mse(samples[:msp_n], codecs, readout, client, window_size=window)

    hit_cfg = EndToEndConfig(m=int(metrics.get("hit_m", 9)),
                             k_values=tuple(metrics.get("hit_k", (1, 2, 3))),
                             seed=seed, window_size=window)
    hit = end_to_end_hit(samples, codecs, readout, client,
                         ClientJudge(client), hit_cfg)

    embedder = HashingTextEmbedder()
    text_fid = text_fid_pca(
        embedder.embed_all([r["description"] for r in planned]),
        embedder.embed_all([r["description"] for r in curated]),
        dims=int(metrics.get("text_dims", 20)))

    inputs = {name: hash_file(ctx.path(name))
              for name in ("tokenizer.npz", "clips.jsonl", "generated.jsonl")}
    report = MetricReport(
        spaces=spaces, msp=match.msp, mse=match.mse,
        hit={"end_to_end": hit.as_dict()},
        extra={"text_fid_planned_vs_curated": text_fid,
               "baselines": baseline,
               "n_generated": len(rows),
               "n_truncated": sum(r["truncated"] for r in rows)},
        config_echo=ctx.config.raw, input_hashes=inputs)
    report.save(ctx.path("report.json"))
    with open(ctx.path("report.txt"), "w", encoding="utf-8") as fh:
        fh.write(report.render_text())


@dataclass(frozen=True)
class StageSpec:
    name: str
    inputs: tuple          # artifact file names consumed
    outputs: tuple         # artifact file names produced
    fn: object


STAGES = {spec.name: spec for spec in (
    StageSpec("curate", inputs=(), outputs=("clips.jsonl", "descriptions.jsonl"),
              fn=_stage_curate),
    StageSpec("tokenize", inputs=("clips.jsonl",), outputs=("tokenizer.npz",),
              fn=_stage_tokenize),
    StageSpec("train-driver",
              inputs=("clips.jsonl", "descriptions.jsonl", "tokenizer.npz"),
              outputs=("pairs.jsonl", "driver.pt", "train_log.json"),
              fn=_stage_train_driver),
    StageSpec("plan", inputs=(), outputs=("envpersona.jsonl", "plans.jsonl"),
              fn=_stage_plan),
    StageSpec("drive", inputs=("driver.pt", "pairs.jsonl", "plans.jsonl"),
              outputs=("generated.jsonl",), fn=_stage_drive),
    StageSpec("eval",
              inputs=("tokenizer.npz", "clips.jsonl", "generated.jsonl"),
              outputs=("report.json", "report.txt"), fn=_stage_eval),
)}

# every artifact must have exactly one producer
PRODUCER: dict = {}
for _spec in STAGES.values():
    for _out in _spec.outputs:
        assert _out not in PRODUCER, f"artifact {_out} has two producers"
        PRODUCER[_out] = _spec.name


def _verify_inputs(spec: StageSpec, ctx: PipelineContext,
                   manifest: RunManifest) -> dict:
    """Hash each input and require it to match its producer's record."""
    hashes = {}
    for artifact in spec.inputs:
        producer = PRODUCER[artifact]
        record = manifest.latest(producer)
        if record is None:
            raise DependencyError(
                f"stage {spec.name!r} needs {artifact!r}; run stage {producer!r} first")
        path = ctx.path(artifact)
        if not path.exists():
            raise DependencyError(
                f"input {artifact!r} is missing; re-run stage {producer!r}")
        digest = hash_file(path)
        if record.outputs.get(artifact) != digest:
            raise DependencyError(
                f"input file {path} does not match the hash recorded by stage "
                f"{producer!r}; the file is stale or was modified")
        hashes[artifact] = digest
    return hashes


def run_stage(stage_name: str, config: PipelineConfig, workdir) -> StageRecord:
    """Execute one stage with dependency checks; unchanged re-runs are no-ops."""
    if stage_name not in STAGES:
        raise RejectedInputError(
            f"unknown stage {stage_name!r}; choose from {', '.join(STAGE_ORDER)}")
    spec = STAGES[stage_name]
    ctx = PipelineContext(config=config, workdir=Path(workdir))
    ctx.workdir.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest.open(ctx.workdir, config.config_hash)

    input_hashes = _verify_inputs(spec, ctx, manifest)

    previous = manifest.latest(stage_name)
    if (previous is not None and previous.config_hash == config.config_hash
            and previous.inputs == input_hashes
            and all(ctx.path(a).exists() and hash_file(ctx.path(a)) == h
                    for a, h in previous.outputs.items())):
        logger.info("stage %s: inputs and outputs unchanged, skipping", stage_name)
        return previous

    try:
        spec.fn(ctx)
    except PipelineStageError:
        raise
    except Exception as exc:
        raise PipelineStageError(stage_name, exc) from exc

    outputs = {}
    for artifact in spec.outputs:
        path = ctx.path(artifact)
        if not path.exists():
            raise PipelineStageError(
                stage_name, FileNotFoundError(f"stage did not produce {artifact}"))
        outputs[artifact] = hash_file(path)
    record = StageRecord(stage=stage_name, config_hash=config.config_hash,
                         seed=config.seed, inputs=input_hashes, outputs=outputs)
    manifest.append(record)
    return record
