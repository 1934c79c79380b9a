"""One-command offline run of every stage on synthetic data."""

from __future__ import annotations

import logging
import time
from pathlib import Path

from ..evaluation import MetricReport
from .config import PipelineConfig
from .stages import STAGE_ORDER, run_stage

logger = logging.getLogger(__name__)


def demo_pipeline(config: PipelineConfig, workdir) -> MetricReport:
    """Run curate -> tokenize -> train-driver -> plan -> drive -> eval.

    Deterministic end to end: with the same config (seeds included) two runs
    produce byte-identical report files, whether or not caches are deleted
    in between.
    """
    workdir = Path(workdir)
    started = time.time()
    for stage in STAGE_ORDER:
        t0 = time.time()
        run_stage(stage, config, workdir)
        logger.info("stage %-12s done in %.1fs", stage, time.time() - t0)
    logger.info("demo pipeline finished in %.1fs", time.time() - started)
    return MetricReport.load(workdir / "report.json")
