"""Leakage filtering and concise-phrase extraction before judging.

Descriptions produced by planning can mention the environment or the other
agent; ranking must use facial-motion content only, so those references are
stripped, and end-to-end comparison uses one concise motion phrase.
"""

from __future__ import annotations

from ..errors import RejectedInputError
from ..llm import LLMClient
from ..planner.templates import load_template


def filter_expression_content(description: str, client: LLMClient) -> str:
    """Keep only the facial-motion content of a description."""
    if not description.strip():
        raise RejectedInputError("empty description")
    template = load_template("leakage_filter")
    return client.complete(template.render(description=description))


def concise_phrase(description: str, client: LLMClient) -> str:
    """Reduce a description to a single short motion phrase."""
    if not description.strip():
        raise RejectedInputError("empty description")
    template = load_template("concise_phrase")
    return client.complete(template.render(description=description))
