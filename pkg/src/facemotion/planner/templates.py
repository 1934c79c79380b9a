"""Prompt templates loaded from text assets, with strict placeholder binding."""

from __future__ import annotations

import string
from dataclasses import dataclass, field
from importlib import resources
from types import MappingProxyType

from ..errors import TemplateError

PLAN_TEMPLATE_IDS = ("env_persona", "dialogue_speaker", "dialogue_listener")
UTILITY_TEMPLATE_IDS = (
    "describe_window", "aggregate_windows", "leakage_filter", "concise_phrase",
    "rank_candidates", "match_score", "situations", "persona_enrich",
)
GRANULARITIES = ("coarse", "fine")


def _asset_text(name: str) -> str:
    ref = resources.files("facemotion") / "assets" / "templates" / name
    if not ref.is_file():
        raise TemplateError(f"template asset {name!r} not found")
    return ref.read_text(encoding="utf-8")


@dataclass(frozen=True)
class PromptTemplate:
    template_id: str
    body: str
    example_outputs: MappingProxyType = field(
        default_factory=lambda: MappingProxyType({}))  # granularity -> tuple of demos

    def placeholders(self) -> set[str]:
        return {name for _, name, _, _ in string.Formatter().parse(self.body)
                if name is not None}

    def render(self, **bindings) -> str:
        missing = self.placeholders() - set(bindings)
        if missing:
            raise TemplateError(
                f"template {self.template_id!r}: unbound placeholder(s) "
                + ", ".join(sorted(missing)))
        return self.body.format(**bindings)


def load_examples(granularity: str) -> tuple[str, ...]:
    if granularity not in GRANULARITIES:
        raise TemplateError(f"unknown granularity {granularity!r}")
    text = _asset_text(f"examples_{granularity}.txt")
    return tuple(line.strip() for line in text.splitlines() if line.strip())


def load_template(template_id: str) -> PromptTemplate:
    """Load a template asset; plan templates carry demonstration examples."""
    if template_id not in PLAN_TEMPLATE_IDS + UTILITY_TEMPLATE_IDS:
        raise TemplateError(f"unknown template id {template_id!r}")
    body = _asset_text(f"{template_id}.txt")
    examples = {}
    if template_id in PLAN_TEMPLATE_IDS:
        examples = {g: load_examples(g) for g in GRANULARITIES}
    return PromptTemplate(template_id=template_id, body=body,
                          example_outputs=MappingProxyType(examples))
