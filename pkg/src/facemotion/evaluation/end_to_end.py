"""End-to-end retrieval evaluation of generated motion.

Each generated motion sequence is turned back into text (decode to
embeddings, read attribute labels, describe with the curation prompts),
stripped of non-facial content, condensed to a short phrase, and that phrase
is used as the query in a 10-candidate retrieval: the judge must find the
original input description among nine distractors.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import FaceMotionError, PipelineStageError
from ..llm import LLMClient
from ..tokenizer import TokenizerPair
from .hit import END_TO_END_K_VALUES, END_TO_END_M, HitAtKConfig, HitReport, hit_at_k
from .judges import Judge
from .leakage import concise_phrase, filter_expression_content
from .matching import LabelReadout, roundtrip_description


@dataclass(frozen=True)
class EndToEndConfig:
    m: int = END_TO_END_M
    k_values: tuple = END_TO_END_K_VALUES
    seed: int = 0
    window_size: int = 25

    def hit_config(self) -> HitAtKConfig:
        return HitAtKConfig(m=self.m, k_values=self.k_values, seed=self.seed)


def _staged(stage: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except FaceMotionError as exc:
        raise PipelineStageError(stage, exc) from exc


def generated_motion_phrase(motion, codecs: TokenizerPair, readout: LabelReadout,
                            client: LLMClient, window_size: int = 25) -> str:
    """Round-trip one generated sequence to a concise facial-motion phrase."""
    description = _staged("describe", roundtrip_description,
                          motion, codecs, readout, client, window_size)
    filtered = _staged("leakage_filter", filter_expression_content,
                       description, client)
    return _staged("concise_phrase", concise_phrase, filtered, client)


def end_to_end_hit(outputs, codecs: TokenizerPair, readout: LabelReadout,
                   client: LLMClient, judge: Judge,
                   cfg: EndToEndConfig | None = None) -> HitReport:
    """outputs: (input_description, generated MotionTokenSequence) pairs.

    The distractor pool is the set of input descriptions themselves, so each
    query competes against descriptions of the same corpus.  Failures inside
    the describe / filter / condense stages surface as PipelineStageError
    naming the stage.
    """
    cfg = cfg or EndToEndConfig()
    outputs = list(outputs)
    pool = [desc for desc, _ in outputs]
    samples = []
    for desc, motion in outputs:
        phrase = generated_motion_phrase(motion, codecs, readout, client,
                                         cfg.window_size)
        samples.append((phrase, desc))
    return _staged("hit_at_k", hit_at_k, samples, pool, judge, cfg.hit_config())
