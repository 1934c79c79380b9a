"""Gaussian mixture fitting by EM, for clustering motion features into labels.

Diagonal covariances by default (stable at small sample sizes); full
covariances behind a flag.  Initialization picks K distinct data points as
means with a seeded generator, so fits are reproducible.  The per-iteration
log-likelihood history is recorded; EM guarantees it never decreases, and
fitting stops once the improvement falls below tolerance.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from ..errors import ConfigurationError, RejectedInputError

logger = logging.getLogger(__name__)

_LOG_2PI = np.log(2.0 * np.pi)


def _kmeans_init(x: np.ndarray, k: int, rng: np.random.Generator,
                 iterations: int = 10) -> tuple[np.ndarray, np.ndarray]:
    """k-means++ seeding plus a few Lloyd steps; returns (means, assignments)."""
    n = len(x)
    means = np.empty((k, x.shape[1]))
    means[0] = x[rng.integers(n)]
    d2 = np.sum((x - means[0]) ** 2, axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0:  # all points identical to chosen seeds
            means[j] = x[rng.integers(n)]
            continue
        means[j] = x[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, np.sum((x - means[j]) ** 2, axis=1))
    assign = np.zeros(n, dtype=int)
    for _ in range(iterations):
        dists = np.sum((x[:, None, :] - means[None, :, :]) ** 2, axis=2)
        assign = np.argmin(dists, axis=1)
        for j in range(k):
            members = x[assign == j]
            if len(members):
                means[j] = members.mean(axis=0)
    return means, assign


@dataclass
class GMMModel:
    weights: np.ndarray                 # (K,)
    means: np.ndarray                   # (K, d)
    covariances: np.ndarray             # (K, d) diagonal or (K, d, d) full
    covariance_type: str = "diag"
    label_map: dict | None = None       # component index -> taxonomy label code
    log_likelihood_history: list[float] = field(default_factory=list)
    ridge_events: int = 0

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if abs(self.weights.sum() - 1.0) > 1e-9 or (self.weights < 0).any():
            raise RejectedInputError("component weights must be nonnegative and sum to 1")

    @property
    def n_components(self) -> int:
        return len(self.weights)

    @property
    def dim(self) -> int:
        return self.means.shape[1]


def _log_prob(x: np.ndarray, model: GMMModel) -> np.ndarray:
    """(n, K) log densities of each point under each component."""
    n, d = x.shape
    out = np.empty((n, model.n_components))
    for k in range(model.n_components):
        diff = x - model.means[k]
        if model.covariance_type == "diag":
            var = model.covariances[k]
            maha = np.sum(diff ** 2 / var, axis=1)
            logdet = np.sum(np.log(var))
        else:
            chol = np.linalg.cholesky(model.covariances[k])
            y = np.linalg.solve(chol, diff.T)
            maha = np.sum(y ** 2, axis=0)
            logdet = 2.0 * np.sum(np.log(np.diag(chol)))
        out[:, k] = -0.5 * (d * _LOG_2PI + logdet + maha)
    return out


def _weighted_log_prob(x: np.ndarray, model: GMMModel) -> np.ndarray:
    return _log_prob(x, model) + np.log(model.weights)[None, :]


def responsibilities(x: np.ndarray, model: GMMModel) -> np.ndarray:
    wlp = _weighted_log_prob(x, model)
    return np.exp(wlp - logsumexp(wlp, axis=1, keepdims=True))


def log_likelihood(x: np.ndarray, model: GMMModel) -> float:
    return float(np.sum(logsumexp(_weighted_log_prob(x, model), axis=1)))


def fit_gmm(features: np.ndarray, k: int, seed: int = 0,
            covariance_type: str = "diag", max_iterations: int = 200,
            tolerance: float = 1e-7, ridge: float = 1e-6) -> GMMModel:
    """EM fit, deterministic under the seed.

    Near-singular covariance updates are regularized by adding ``ridge`` to
    the variances (diagonal of the covariance), counted in ``ridge_events``.
    """
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise RejectedInputError("features must be a 2-d array")
    n, d = x.shape
    if n < k:
        raise RejectedInputError(f"{n} points cannot support {k} components")
    if covariance_type not in ("diag", "full"):
        raise RejectedInputError(f"unknown covariance type {covariance_type!r}")

    rng = np.random.default_rng(seed)
    means, assign = _kmeans_init(x, k, rng)
    weights = np.empty(k)
    global_var = x.var(axis=0) + ridge
    if covariance_type == "diag":
        covs = np.empty((k, d))
    else:
        covs = np.empty((k, d, d))
    for j in range(k):
        members = x[assign == j]
        weights[j] = max(len(members), 1)
        if covariance_type == "diag":
            covs[j] = members.var(axis=0) + ridge if len(members) > 1 else global_var
        else:
            if len(members) > d:
                covs[j] = np.cov(members.T) + ridge * np.eye(d)
            else:
                covs[j] = np.diag(global_var)
    weights = weights / weights.sum()
    model = GMMModel(weights=weights, means=means, covariances=covs,
                     covariance_type=covariance_type)

    history: list[float] = []
    ridge_events = 0
    for _ in range(max_iterations):
        # E step
        resp = responsibilities(x, model)
        ll = log_likelihood(x, model)
        if history and ll < history[-1] - 1e-9:
            logger.warning("log-likelihood decreased (%.3e); stopping", history[-1] - ll)
            break
        converged = bool(history) and ll - history[-1] < tolerance
        history.append(ll)
        if converged:
            break
        # M step
        nk = resp.sum(axis=0) + 1e-12
        weights = nk / nk.sum()
        means = (resp.T @ x) / nk[:, None]
        if covariance_type == "diag":
            covs = np.empty((k, d))
            for j in range(k):
                diff = x - means[j]
                covs[j] = (resp[:, j] @ (diff ** 2)) / nk[j]
                if (covs[j] < ridge).any():
                    covs[j] = covs[j] + ridge
                    ridge_events += 1
                    logger.debug("component %d: variance floored with ridge %.1e", j, ridge)
        else:
            covs = np.empty((k, d, d))
            for j in range(k):
                diff = x - means[j]
                cov = (resp[:, j][:, None] * diff).T @ diff / nk[j]
                if np.linalg.eigvalsh(cov).min() < ridge:
                    cov = cov + ridge * np.eye(d)
                    ridge_events += 1
                    logger.debug("component %d: covariance ridged by %.1e", j, ridge)
                covs[j] = cov
        model = GMMModel(weights=weights, means=means, covariances=covs,
                         covariance_type=covariance_type)

    model.log_likelihood_history = history
    model.ridge_events = ridge_events
    return model


def assign_components(features: np.ndarray, model: GMMModel) -> np.ndarray:
    """Most responsible component per row."""
    x = np.asarray(features, dtype=np.float64)
    return np.argmax(_weighted_log_prob(x, model), axis=1)


def assign_labels(features: np.ndarray, model: GMMModel) -> list[str]:
    """Map each frame to its argmax component's taxonomy label."""
    if model.label_map is None:
        raise ConfigurationError("model has no label map; supply or suggest one")
    comps = assign_components(features, model)
    missing = sorted(set(int(c) for c in comps) - set(model.label_map))
    if missing:
        raise ConfigurationError(f"components {missing} have no label mapping")
    return [model.label_map[int(c)] for c in comps]


def suggest_label_map(model: GMMModel, prototypes: dict) -> dict:
    """Propose component -> label by nearest prototype vector to each mean.

    A convenience for bootstrapping the (otherwise hand-authored) label map;
    the result should be reviewed before use.
    """
    codes = list(prototypes)
    protos = np.asarray([prototypes[c] for c in codes], dtype=np.float64)
    out = {}
    for j in range(model.n_components):
        dists = np.sum((protos - model.means[j]) ** 2, axis=1)
        out[j] = codes[int(np.argmin(dists))]
    return out
