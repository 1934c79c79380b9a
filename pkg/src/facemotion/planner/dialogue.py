"""Dialogue-corpus handling and the evaluation-sample filter.

A corpus row is a conversation: an ordered list of turns, each carrying the
speaker, the utterance and an emotion label.  Evaluation keeps only turns
that have at least three previous turns and a non-neutral emotion.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

from .planning import Agent, ConditionTuple

logger = logging.getLogger(__name__)

MIN_PREVIOUS_TURNS = 3
NEUTRAL = "neutral"


@dataclass(frozen=True)
class DialogueTurn:
    speaker: str
    text: str
    emotion: str | None = None


@dataclass(frozen=True)
class Dialogue:
    dialogue_id: str
    turns: tuple[DialogueTurn, ...]


@dataclass(frozen=True)
class DialogueSample:
    dialogue_id: str
    turn_index: int
    history: tuple[DialogueTurn, ...]
    target: DialogueTurn


def read_dialogues(path) -> list[Dialogue]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            turns = tuple(DialogueTurn(speaker=t["speaker"], text=t["text"],
                                       emotion=t.get("emotion"))
                          for t in rec["turns"])
            out.append(Dialogue(dialogue_id=rec["dialogue_id"], turns=turns))
    return out


def write_dialogues(dialogues, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for d in dialogues:
            rec = {"dialogue_id": d.dialogue_id,
                   "turns": [{"speaker": t.speaker, "text": t.text,
                              "emotion": t.emotion} for t in d.turns]}
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def filter_dialogues(dialogues) -> list[DialogueSample]:
    """Keep turns with >= 3 previous turns AND a non-neutral emotion label.

    Turns without an emotion label are skipped with a warning rather than
    failing the whole corpus.
    """
    samples = []
    for dialogue in dialogues:
        for i, turn in enumerate(dialogue.turns):
            if turn.emotion is None:
                logger.warning("dialogue %s turn %d: missing emotion label, skipped",
                               dialogue.dialogue_id, i)
                continue
            if i < MIN_PREVIOUS_TURNS or turn.emotion == NEUTRAL:
                continue
            samples.append(DialogueSample(dialogue_id=dialogue.dialogue_id,
                                          turn_index=i,
                                          history=dialogue.turns[:i],
                                          target=turn))
    return samples


def sample_to_condition(sample: DialogueSample, role: str,
                        persona: str = "an attentive conversation partner",
                        instruction: str = "React with natural facial motion."
                        ) -> ConditionTuple:
    """Condition for planning either side of the sampled turn.

    Speaker: the agent delivers the target utterance and owns the history.
    Listener: the agent hears the target utterance as the latest turn.
    """
    history = [f"{t.speaker}: {t.text}" for t in sample.history]
    if role == "speaker":
        memory = tuple(history)
        environment = sample.target.text
    else:
        memory = tuple(history + [f"{sample.target.speaker}: {sample.target.text}"])
        environment = sample.target.text
    return ConditionTuple(instruction=instruction, environment=environment,
                          agent=Agent(persona=persona, role=role, memory=memory))
