"""Fréchet distance between description sets in a PCA-reduced text space.

Raw bag-of-words embeddings are near-singular (covariance rank far below the
embedding dimension), which breaks Gaussian fitting; projecting both sets to
a low-dimensional principal subspace fitted on their union makes the
distance well-conditioned.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass

import numpy as np

from ..errors import RejectedInputError
from .frechet import DistributionStats, frechet_distance

logger = logging.getLogger(__name__)

PCA_DIMS = 20


@dataclass(frozen=True)
class HashingTextEmbedder:
    """Deterministic bag-of-words embedding by feature hashing."""

    dim: int = 256

    def embed(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dim)
        for word in text.lower().split():
            digest = hashlib.sha256(word.encode("utf-8")).digest()
            bucket = int.from_bytes(digest[:4], "big") % self.dim
            sign = 1.0 if digest[4] % 2 == 0 else -1.0
            vec[bucket] += sign
        norm = np.linalg.norm(vec)
        return vec / norm if norm > 0 else vec

    def embed_all(self, texts) -> np.ndarray:
        return np.asarray([self.embed(t) for t in texts])


def pca_fit(x: np.ndarray, dims: int) -> tuple[np.ndarray, np.ndarray, int]:
    """(center, components (kept_dims, d), kept_dims); rank-deficient input
    reduces the dimension count with a warning."""
    center = x.mean(axis=0)
    centered = x - center
    cov = centered.T @ centered / max(len(x) - 1, 1)
    vals, vecs = np.linalg.eigh(cov)
    order = np.argsort(vals)[::-1]
    rank = int(np.sum(vals > max(vals.max(), 0) * 1e-10)) if vals.max() > 0 else 0
    kept = min(dims, rank) if rank else dims
    if kept < dims:
        logger.warning("text covariance rank %d < requested %d dims; reducing",
                       rank, dims)
    return center, vecs[:, order[:kept]].T, kept


def text_fid_pca(gen_embeddings: np.ndarray, ref_embeddings: np.ndarray,
                 dims: int = PCA_DIMS, ridge: float = 1e-10) -> float:
    """Project both sets onto the union's principal subspace, then Fréchet."""
    gen = np.asarray(gen_embeddings, dtype=np.float64)
    ref = np.asarray(ref_embeddings, dtype=np.float64)
    if gen.ndim != 2 or ref.ndim != 2 or gen.shape[1] != ref.shape[1]:
        raise RejectedInputError("embedding sets must be 2-d with equal dimensions")
    if len(gen) < dims + 1 or len(ref) < dims + 1:
        raise RejectedInputError(
            f"need at least {dims + 1} vectors per side for {dims} dims")
    center, components, _ = pca_fit(np.vstack([gen, ref]), dims)
    gen_p = (gen - center) @ components.T
    ref_p = (ref - center) @ components.T
    return frechet_distance(DistributionStats.from_samples(gen_p, ridge=ridge),
                            DistributionStats.from_samples(ref_p, ridge=ridge))
