"""Command-line entry point: stages, the demo run, and fixture generation."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import FaceMotionError
from .pipeline import STAGE_ORDER, demo_pipeline, load_config, run_stage

logger = logging.getLogger(__name__)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, default=None,
                        help="JSON config file merged over the packaged defaults")
    parser.add_argument("--workdir", type=Path, default=Path("runs/default"),
                        help="directory for artifacts, caches, and the run manifest")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the configured seed")
    parser.add_argument("--mock-llm", action=argparse.BooleanOptionalAction,
                        default=None,
                        help="force the deterministic mock client on or off")
    parser.add_argument("--verbose", action="store_true",
                        help="debug-level logging")


def _config_from_args(args: argparse.Namespace):
    overrides: dict = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.mock_llm is not None:
        overrides["mock_llm"] = args.mock_llm
    return load_config(args.config, overrides)


def _cmd_stage(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    record = run_stage(args.stage, config, args.workdir)
    print(json.dumps({"stage": record.stage, "status": record.status,
                      "outputs": record.outputs}, indent=2, sort_keys=True))
    return 0


def _cmd_demo(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    report = demo_pipeline(config, args.workdir)
    print(report.render_text())
    print(f"artifacts in {args.workdir}")
    return 0


def _cmd_fixtures(args: argparse.Namespace) -> int:
    """Write small sample files so the on-disk formats are easy to inspect."""
    from .planner.dialogue import Dialogue, DialogueTurn, write_dialogues
    from .synthetic import (fixture_fau_frames, make_motif_clip,
                            smooth_random_clips)
    from .tokenizer import write_clips
    from .curation.attributes import write_fau_frames

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    write_clips(smooth_random_clips(8, seed=args.seed or 0),
                outdir / "smooth_clips.jsonl")
    write_clips([make_motif_clip("gaze left", "eyes closed", "turns left",
                                 "head down", clip_id="motif-sample")],
                outdir / "motif_clips.jsonl")
    write_fau_frames(fixture_fau_frames(50, seed=args.seed or 0),
                     outdir / "fau_frames.jsonl")
    write_dialogues([Dialogue(dialogue_id="d0", turns=(
        DialogueTurn("a", "Did you hear the news?", "surprised"),
        DialogueTurn("b", "No, what happened?", "neutral"),
        DialogueTurn("a", "We won the grant.", "happy"),
        DialogueTurn("b", "That is wonderful!", "happy"),
        DialogueTurn("a", "I can hardly believe it.", "happy"),
    ))], outdir / "dialogues.jsonl")
    print(f"fixtures written to {outdir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="facemotion",
        description="Text-driven facial-motion pipeline: curation, motion "
                    "tokenization, a toy driving transformer, LLM planning, "
                    "and the evaluation harness.")
    sub = parser.add_subparsers(dest="command", required=True)

    for stage in STAGE_ORDER:
        p = sub.add_parser(stage, help=f"run the {stage} stage")
        _add_common(p)
        p.set_defaults(func=_cmd_stage, stage=stage)

    p = sub.add_parser("run", help="run one stage selected by --stage")
    _add_common(p)
    p.add_argument("--stage", choices=STAGE_ORDER, required=True)
    p.set_defaults(func=_cmd_stage)

    p = sub.add_parser("demo", help="run every stage on synthetic data")
    _add_common(p)
    p.set_defaults(func=_cmd_demo)

    p = sub.add_parser("make-fixtures", help="write sample data files")
    p.add_argument("--outdir", type=Path, default=Path("fixtures"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=_cmd_fixtures)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except FaceMotionError as exc:
        logger.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
