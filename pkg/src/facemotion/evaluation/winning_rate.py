"""Pairwise winning rate from a user-study score table.

Two conventions are implemented.  The primary mode reports strict wins as a
fraction of non-tied comparisons, which is how reported percentages behave
(ties are neglected).  The literal mode divides the strict-win count by
N + M (subjects plus items); the two disagree whenever ties exist or
N + M != N * M, so both are exposed and the mode is recorded in reports.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import RejectedInputError

STRICT_MODE = "strict"
LITERAL_MODE = "literal"


@dataclass
class UserStudyTable:
    """scores[method] is an (N subjects, M items) integer array in 0..4."""

    scores: dict

    def __post_init__(self):
        if not self.scores:
            raise RejectedInputError("empty score table")
        arrays = {}
        shape = None
        for method, table in self.scores.items():
            arr = np.asarray(table)
            if arr.ndim != 2:
                raise RejectedInputError(f"{method}: scores must be (subjects, items)")
            if shape is None:
                shape = arr.shape
            elif arr.shape != shape:
                raise RejectedInputError("methods have mismatched score tables")
            if ((arr < 0) | (arr > 4)).any():
                raise RejectedInputError(f"{method}: scores must lie in 0..4")
            arrays[method] = arr
        self.scores = arrays

    @property
    def n_subjects(self) -> int:
        return next(iter(self.scores.values())).shape[0]

    @property
    def n_items(self) -> int:
        return next(iter(self.scores.values())).shape[1]


def winning_rate(table: UserStudyTable, method_pair: tuple,
                 mode: str = STRICT_MODE) -> float | None:
    """Percentage of comparisons method_pair[0] wins against method_pair[1].

    Strict mode: wins / (wins + losses); None when every comparison is tied
    (reported as not-applicable).  Literal mode: wins / (N + M).
    """
    first, second = method_pair
    for m in (first, second):
        if m not in table.scores:
            raise RejectedInputError(f"method {m!r} not in table")
    a, b = table.scores[first], table.scores[second]
    wins = int((a > b).sum())
    losses = int((a < b).sum())
    if mode == STRICT_MODE:
        if wins + losses == 0:
            return None  # all ties: winning rate is not applicable
        return 100.0 * wins / (wins + losses)
    if mode == LITERAL_MODE:
        return 100.0 * wins / (table.n_subjects + table.n_items)
    raise RejectedInputError(f"unknown winning-rate mode {mode!r}")
