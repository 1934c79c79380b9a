"""Fréchet-distance metrics between Gaussian summaries of motion sets.

The distance between N(mu_a, S_a) and N(mu_b, S_b) is
||mu_a - mu_b||^2 + tr(S_a + S_b - 2 (S_a S_b)^(1/2)).  The matrix square
root is computed through symmetric eigendecompositions only: with
R = sqrtm(S_a), the product term equals tr of sqrt of the symmetric matrix
R S_b R, whose eigenvalues are clamped at -1e-8 -> 0 before the square root.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import RejectedInputError

EIGENVALUE_CLAMP = -1e-8


@dataclass
class DistributionStats:
    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=np.float64)
        self.covariance = np.asarray(self.covariance, dtype=np.float64)
        if self.mean.ndim != 1:
            raise RejectedInputError("mean must be a vector")
        d = self.mean.shape[0]
        if self.covariance.shape != (d, d):
            raise RejectedInputError(
                f"covariance shape {self.covariance.shape} does not match dimension {d}")
        if not np.allclose(self.covariance, self.covariance.T, atol=1e-8):
            raise RejectedInputError("covariance must be symmetric")
        eigs = np.linalg.eigvalsh(self.covariance)
        if eigs.min() < EIGENVALUE_CLAMP:
            raise RejectedInputError(
                f"covariance has eigenvalue {eigs.min():.3e} below the {EIGENVALUE_CLAMP} clamp")

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @classmethod
    def from_samples(cls, samples: np.ndarray, ridge: float = 0.0) -> "DistributionStats":
        x = np.asarray(samples, dtype=np.float64)
        if x.ndim != 2 or x.shape[0] < 2:
            raise RejectedInputError("need a 2-d array with at least 2 samples")
        cov = np.cov(x, rowvar=False, ddof=1)
        cov = np.atleast_2d(cov)
        if ridge:
            cov = cov + ridge * np.eye(cov.shape[0])
        return cls(mean=x.mean(axis=0), covariance=cov)


def sqrtm_psd(matrix: np.ndarray) -> np.ndarray:
    """Symmetric PSD square root via eigendecomposition with clamping."""
    vals, vecs = np.linalg.eigh(np.asarray(matrix, dtype=np.float64))
    if vals.min() < EIGENVALUE_CLAMP:
        raise RejectedInputError(
            f"matrix eigenvalue {vals.min():.3e} below the {EIGENVALUE_CLAMP} clamp")
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T


def frechet_distance(a: DistributionStats, b: DistributionStats) -> float:
    if a.dim != b.dim:
        raise RejectedInputError(f"dimension mismatch: {a.dim} vs {b.dim}")
    root_a = sqrtm_psd(a.covariance)
    cross = root_a @ b.covariance @ root_a
    cross_eigs = np.clip(np.linalg.eigvalsh((cross + cross.T) / 2.0), 0.0, None)
    mean_term = float(np.sum((a.mean - b.mean) ** 2))
    trace_term = float(np.trace(a.covariance) + np.trace(b.covariance)
                       - 2.0 * np.sum(np.sqrt(cross_eigs)))
    # analytic value is nonnegative; sub-epsilon negatives are rounding noise
    return max(mean_term + trace_term, 0.0)


@dataclass
class NaturalnessReport:
    var: float
    fid: float
    fid_delta: float
    snd: float  # always fid + fid_delta, computed exactly once

    def as_dict(self) -> dict:
        return {"var": self.var, "fid": self.fid, "fid_delta": self.fid_delta,
                "snd": self.snd}


def _as_sequences(seqs) -> list[np.ndarray]:
    out = [np.asarray(s, dtype=np.float64) for s in seqs]
    if len(out) < 2:
        raise RejectedInputError("need at least 2 sequences per side")
    for s in out:
        if s.ndim != 2:
            raise RejectedInputError("each sequence must be (frames, dims)")
    return out


def temporal_variance(sequences) -> float:
    """Mean per-dimension variance over time, averaged across sequences."""
    seqs = [np.asarray(s, dtype=np.float64) for s in sequences]
    return float(np.mean([s.var(axis=0).mean() for s in seqs]))


def naturalness_suite(sequences, reference) -> NaturalnessReport:
    """Var on the generated set; FID on frames; FID_delta on frame diffs."""
    gen = _as_sequences(sequences)
    ref = _as_sequences(reference)
    for s in gen + ref:
        if s.shape[0] < 2:
            raise RejectedInputError(
                "single-frame sequences have no frame differences")
    fid = frechet_distance(DistributionStats.from_samples(np.vstack(gen)),
                           DistributionStats.from_samples(np.vstack(ref)))
    gen_delta = np.vstack([np.diff(s, axis=0) for s in gen])
    ref_delta = np.vstack([np.diff(s, axis=0) for s in ref])
    fid_delta = frechet_distance(DistributionStats.from_samples(gen_delta),
                                 DistributionStats.from_samples(ref_delta))
    return NaturalnessReport(var=temporal_variance(gen), fid=fid,
                             fid_delta=fid_delta, snd=fid + fid_delta)
