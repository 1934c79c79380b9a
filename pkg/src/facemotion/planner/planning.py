"""Condition tuples, prompt assembly and planning against an LLM client."""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from ..errors import RejectedInputError
from ..llm import LLMClient
from .templates import PromptTemplate

ROLES = ("speaker", "listener", "solo")

_ROLE_TEMPLATE = {"solo": "env_persona", "speaker": "dialogue_speaker",
                  "listener": "dialogue_listener"}

DEFAULT_MAX_MEMORY_TURNS = 12


@dataclass(frozen=True)
class Agent:
    persona: str
    role: str = "solo"
    memory: tuple[str, ...] = ()

    def __post_init__(self):
        if self.role not in ROLES:
            raise RejectedInputError(f"unknown agent role {self.role!r}")


@dataclass(frozen=True)
class ConditionTuple:
    instruction: str
    environment: str
    agent: Agent

    def __post_init__(self):
        if not self.instruction.strip():
            raise RejectedInputError("instruction must be nonempty")


@dataclass
class PlanResult:
    raw_text: str
    granularity: str
    provenance: dict = field(default_factory=dict)


def _memory_block(turns, cap: int = DEFAULT_MAX_MEMORY_TURNS) -> str:
    turns = list(turns)[-cap:]
    if not turns:
        return "(no prior turns)"
    return "\n".join(f"{i + 1}. {t}" for i, t in enumerate(turns))


def _examples_block(template: PromptTemplate, granularity: str | None) -> str:
    if granularity is None:
        return ""
    demos = template.example_outputs.get(granularity, ())
    if not demos:
        return ""
    return "Example outputs:\n" + "\n".join(f"- {d}" for d in demos) + "\n"


def build_prompt(cond: ConditionTuple, template: PromptTemplate,
                 granularity: str | None = "fine") -> str:
    """Pure function of (condition, template, granularity).

    Demonstration outputs are embedded only when a granularity is requested;
    memory turns appear verbatim, oldest first; the listener template
    additionally binds the last turn so it can be emphasized.
    """
    expected = _ROLE_TEMPLATE[cond.agent.role]
    if template.template_id != expected:
        raise RejectedInputError(
            f"agent role {cond.agent.role!r} requires template {expected!r}, "
            f"got {template.template_id!r}")
    bindings = {
        "instruction": cond.instruction,
        "environment": cond.environment,
        "persona": cond.agent.persona,
        "memory": _memory_block(cond.agent.memory),
        "examples": _examples_block(template, granularity),
    }
    if "last_turn" in template.placeholders():
        bindings["last_turn"] = (cond.agent.memory[-1] if cond.agent.memory
                                 else "(nothing yet)")
    return template.render(**bindings)


def plan(cond: ConditionTuple, template: PromptTemplate, client: LLMClient,
         granularity: str | None = "fine") -> PlanResult:
    prompt = build_prompt(cond, template, granularity)
    text = client.complete(prompt)
    return PlanResult(
        raw_text=text,
        granularity=granularity or "unguided",
        provenance={
            "prompt_sha256": hashlib.sha256(prompt.encode("utf-8")).hexdigest(),
            "client_id": client.client_id,
            "template_id": template.template_id,
        })


def plan_many(conds, template: PromptTemplate, client: LLMClient,
              granularity: str | None = "fine",
              max_workers: int | None = None) -> list[PlanResult]:
    """Plan a batch with bounded concurrency; results keep input order."""
    conds = list(conds)
    workers = max(1, max_workers or client.max_concurrency)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda c: plan(c, template, client, granularity), conds))
