"""Reference baselines for the naturalness metrics.

Average replays the training mean; Random_Gen samples a Gaussian fitted to
the pooled training frames; Random_GT substitutes another ground-truth item.
The two stochastic baselines are averaged over repeated seeded runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import RejectedInputError
from .frechet import DistributionStats

DEFAULT_BASELINE_RUNS = 10


@dataclass
class EmbeddingGaussian:
    stats: DistributionStats

    @classmethod
    def fit(cls, train_sequences) -> "EmbeddingGaussian":
        frames = np.vstack([np.asarray(s, dtype=np.float64) for s in train_sequences])
        return cls(stats=DistributionStats.from_samples(frames))

    def sample_sequence(self, length: int, rng: np.random.Generator) -> np.ndarray:
        return rng.multivariate_normal(self.stats.mean, self.stats.covariance,
                                       size=length)


def average_baseline(train_sequences, length: int) -> np.ndarray:
    """The pooled training mean frame, held constant: identical for every item."""
    frames = np.vstack([np.asarray(s, dtype=np.float64) for s in train_sequences])
    return np.tile(frames.mean(axis=0), (length, 1))


def random_gen_baseline(gaussian: EmbeddingGaussian, lengths,
                        rng: np.random.Generator) -> list[np.ndarray]:
    return [gaussian.sample_sequence(int(n), rng) for n in lengths]


def random_gt_baseline(ground_truth, rng: np.random.Generator) -> list[np.ndarray]:
    """For each item, a uniformly drawn *other* ground-truth sequence."""
    items = [np.asarray(s, dtype=np.float64) for s in ground_truth]
    if len(items) < 2:
        raise RejectedInputError("need at least 2 ground-truth items to swap")
    out = []
    for i in range(len(items)):
        j = int(rng.integers(0, len(items) - 1))
        if j >= i:
            j += 1  # skip the item's own ground truth
        out.append(items[j])
    return out


def averaged_runs(run_fn, n_runs: int = DEFAULT_BASELINE_RUNS, seed: int = 0) -> dict:
    """Average the numeric dict outputs of run_fn(rng) over seeded runs."""
    totals: dict[str, float] = {}
    for run in range(n_runs):
        result = run_fn(np.random.default_rng(seed + run))
        for key, value in result.items():
            totals[key] = totals.get(key, 0.0) + float(value)
    return {k: v / n_runs for k, v in totals.items()}
