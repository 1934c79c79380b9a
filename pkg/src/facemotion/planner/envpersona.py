"""Synthesis of the environment/persona condition dataset.

Eight seed emotions x 25 situations each gives 200 environments; crossed
with six enriched personas that yields exactly 1200 (environment, persona)
pairs, generated deterministically when driven by the mock client.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass

from ..errors import DegenerateOutputError
from ..llm import LLMClient
from .templates import load_template

logger = logging.getLogger(__name__)

SEED_EMOTIONS = ("angry", "disgust", "contempt", "fear", "happy", "sad",
                 "surprised", "neutral")
PERSONA_TRAITS = ("brave", "timid", "calm", "sensitive", "pessimist", "optimistic")
SITUATIONS_PER_EMOTION = 25
MAX_SITUATION_ATTEMPTS = 3


@dataclass(frozen=True)
class EnvPersonaPair:
    environment: str
    persona: str
    emotion: str
    trait: str


@dataclass
class EnvPersonaDataset:
    situations: dict[str, list[str]]   # emotion -> 25 environments
    personas: dict[str, str]           # trait -> enriched description
    pairs: list[EnvPersonaPair]

    @property
    def environments(self) -> list[str]:
        return [s for emotion in SEED_EMOTIONS for s in self.situations[emotion]]

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            header = {"kind": "header", "situations": self.situations,
                      "personas": self.personas}
            fh.write(json.dumps(header, sort_keys=True) + "\n")
            for p in self.pairs:
                fh.write(json.dumps({"kind": "pair", "environment": p.environment,
                                     "persona": p.persona, "emotion": p.emotion,
                                     "trait": p.trait}, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "EnvPersonaDataset":
        pairs, situations, personas = [], {}, {}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                rec = json.loads(line)
                if rec["kind"] == "header":
                    situations, personas = rec["situations"], rec["personas"]
                else:
                    pairs.append(EnvPersonaPair(
                        environment=rec["environment"], persona=rec["persona"],
                        emotion=rec["emotion"], trait=rec["trait"]))
        return cls(situations=situations, personas=personas, pairs=pairs)


def _parse_situations(text: str) -> list[str]:
    out = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        match = re.match(r"^\d+[.)]\s*(.+)$", line)
        out.append(match.group(1).strip() if match else line)
    return out


def _situations_for(emotion: str, client: LLMClient) -> list[str]:
    template = load_template("situations")
    prompt = template.render(emotion=emotion, count=SITUATIONS_PER_EMOTION)
    for attempt in range(MAX_SITUATION_ATTEMPTS):
        got = _parse_situations(client.complete(prompt))
        if len(got) == SITUATIONS_PER_EMOTION:
            return got
        logger.warning("emotion %s: got %d situations on attempt %d, re-asking",
                       emotion, len(got), attempt + 1)
        # stricter re-ask; the suffix changes the prompt so the cache is bypassed
        prompt = prompt + (f"\nReturn exactly {SITUATIONS_PER_EMOTION} numbered lines, "
                           f"no more, no fewer. (attempt {attempt + 2})")
    raise DegenerateOutputError(
        f"client never returned {SITUATIONS_PER_EMOTION} situations for {emotion!r}")


def synthesize_envpersona(client: LLMClient) -> EnvPersonaDataset:
    situations = {emotion: _situations_for(emotion, client)
                  for emotion in SEED_EMOTIONS}
    persona_template = load_template("persona_enrich")
    personas = {trait: client.complete(persona_template.render(trait=trait))
                for trait in PERSONA_TRAITS}
    pairs = [EnvPersonaPair(environment=env, persona=personas[trait],
                            emotion=emotion, trait=trait)
             for emotion in SEED_EMOTIONS
             for env in situations[emotion]
             for trait in PERSONA_TRAITS]
    return EnvPersonaDataset(situations=situations, personas=personas, pairs=pairs)
