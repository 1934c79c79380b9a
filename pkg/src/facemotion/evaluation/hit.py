"""Hit@k: does a judge rank the true description within the top k?"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import JudgeParseError, RejectedInputError
from .judges import Judge

DEFAULT_M = 19
DEFAULT_K_VALUES = (1, 5, 10)
END_TO_END_M = 9
END_TO_END_K_VALUES = (1, 2, 3)


@dataclass(frozen=True)
class HitAtKConfig:
    m: int = DEFAULT_M                      # distractor count per sample
    k_values: tuple = DEFAULT_K_VALUES
    seed: int = 0

    def __post_init__(self):
        if self.m < 1:
            raise RejectedInputError("m must be >= 1")
        if any(k < 1 or k > self.m + 1 for k in self.k_values):
            raise RejectedInputError(f"every k must lie in 1..{self.m + 1}")


@dataclass
class HitReport:
    rates: dict                 # k -> fraction of valid samples hit
    n_valid: int
    n_invalid: int
    true_ranks: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"rates": {str(k): v for k, v in self.rates.items()},
                "n_valid": self.n_valid, "n_invalid": self.n_invalid}


def hit_at_k(samples, pool, judge: Judge, cfg: HitAtKConfig | None = None) -> HitReport:
    """samples: (query, true_description) pairs; pool: candidate descriptions.

    Per sample, m distractors are drawn uniformly without replacement from
    the pool excluding the true description, the true one is inserted at a
    seeded position, and the judge ranks all m+1.  A sample whose judge
    output stays unparsable (after the judge's own re-ask) is excluded and
    counted.
    """
    cfg = cfg or HitAtKConfig()
    samples = list(samples)
    pool = list(pool)
    rng = np.random.default_rng(cfg.seed)
    hits = {k: 0 for k in cfg.k_values}
    ranks: list[int] = []
    invalid = 0
    for query, truth in samples:
        eligible = [p for p in pool if p != truth]
        if len(eligible) < cfg.m:
            raise RejectedInputError(
                f"pool has only {len(eligible)} eligible distractors, need {cfg.m}")
        picked = rng.choice(len(eligible), size=cfg.m, replace=False)
        candidates = [eligible[i] for i in picked]
        true_pos = int(rng.integers(0, cfg.m + 1))
        candidates.insert(true_pos, truth)
        try:
            order = judge.rank(query, candidates)
        except JudgeParseError:
            invalid += 1
            continue
        rank = order.index(true_pos) + 1
        ranks.append(rank)
        for k in cfg.k_values:
            hits[k] += int(rank <= k)
    n_valid = len(samples) - invalid
    rates = {k: (hits[k] / n_valid if n_valid else 0.0) for k in cfg.k_values}
    return HitReport(rates=rates, n_valid=n_valid, n_invalid=invalid,
                     true_ranks=ranks)
