"""Ranking judges: seeded-random, truth-oracle, and client-backed.

A judge orders candidate descriptions by how well they match a query.  The
client-backed judge must receive an explicit permutation of candidate
numbers back; one stricter re-ask is allowed before the sample is declared
unparsable.
"""

from __future__ import annotations

import re
from typing import Protocol

import numpy as np

from ..errors import JudgeParseError
from ..llm import LLMClient
from ..planner.templates import load_template


class Judge(Protocol):
    def rank(self, query: str, candidates: list[str]) -> list[int]:
        """Candidate indices (0-based), best match first."""


class RandomJudge:
    """Uniformly random permutation; the calibration baseline."""

    def __init__(self, seed: int = 0):
        self._rng = np.random.default_rng(seed)

    def rank(self, query: str, candidates: list[str]) -> list[int]:
        return self._rng.permutation(len(candidates)).tolist()


class OracleJudge:
    """Ranks the known true description first; needs the query -> truth map."""

    def __init__(self, truth: dict):
        self.truth = dict(truth)

    def rank(self, query: str, candidates: list[str]) -> list[int]:
        true_text = self.truth.get(query)
        order = sorted(range(len(candidates)),
                       key=lambda i: (candidates[i] != true_text, i))
        return order


def parse_permutation(text: str, n: int) -> list[int]:
    """Extract a permutation of 1..n from judge output; 0-based on return."""
    numbers = [int(tok) for tok in re.findall(r"\d+", text)]
    if len(numbers) != n or sorted(numbers) != list(range(1, n + 1)):
        raise JudgeParseError(f"expected a permutation of 1..{n}, got {text!r}")
    return [k - 1 for k in numbers]


class ClientJudge:
    """LLM-backed ranking with one stricter re-ask on a malformed reply."""

    def __init__(self, client: LLMClient):
        self.client = client
        self._template = load_template("rank_candidates")

    def rank(self, query: str, candidates: list[str]) -> list[int]:
        numbered = "\n".join(f"{i + 1}) {c}" for i, c in enumerate(candidates))
        prompt = self._template.render(query=query, candidates=numbered)
        try:
            return parse_permutation(self.client.complete(prompt), len(candidates))
        except JudgeParseError:
            # the suffix changes the prompt, so the re-ask misses the cache
            strict = prompt + ("\nYour previous answer was malformed. Reply with "
                               "ONLY the candidate numbers, comma-separated.")
            return parse_permutation(self.client.complete(strict), len(candidates))
