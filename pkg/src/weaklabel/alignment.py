"""Document-class alignment: prior labels, PCA, and prior-initialized clustering.

Documents first receive a prior label (nearest class by cosine).  After PCA
reduction, a Gaussian mixture with one covariance matrix shared by all
clusters is initialized from those priors and refined by EM.  Cluster j is
the cluster initialized from class j and is never relabeled, so mixture
posteriors read directly as class posteriors.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import NumericError

logger = logging.getLogger(__name__)

DEFAULT_PCA_DIM = 64
DEFAULT_MAX_ITERS = 100
DEFAULT_TOL = 1e-4

# Relative ridge added to the tied covariance at init and each M-step.
COV_REG_SCALE = 1e-6


@dataclass(frozen=True)
class GmmState:
    """Parameters of the tied-covariance mixture at one point in time."""

    means: np.ndarray  # (k, P)
    tied_covariance: np.ndarray  # (P, P)
    mixing_weights: np.ndarray  # (k,)
    log_likelihood: float


@dataclass(frozen=True)
class AlignmentResult:
    """Per-document class assignment with posterior confidence."""

    assignment: np.ndarray  # (n,) int64
    posterior: np.ndarray  # (n, k), rows sum to 1
    confidence: np.ndarray  # (n,)
    state: GmmState | None = None
    ll_history: list[float] = field(default_factory=list)
    covariance_history: list[np.ndarray] = field(default_factory=list)


def prior_labels(doc_vectors: np.ndarray, class_reps: np.ndarray) -> np.ndarray:
    """Nearest class per document by cosine; ties go to the lower class id."""
    if len(class_reps) < 2:
        raise ValueError("need at least 2 classes")
    doc_norms = np.linalg.norm(doc_vectors, axis=1)
    class_norms = np.linalg.norm(class_reps, axis=1)
    sims = np.full((len(doc_vectors), len(class_reps)), -1.0)
    ok = doc_norms > 0.0
    if not ok.all():
        logger.warning(
            "%d zero-norm document representations assigned by tie-break",
            int((~ok).sum()),
        )
    sims[ok] = doc_vectors[ok] @ class_reps.T / np.outer(doc_norms[ok], class_norms)
    return np.argmax(sims, axis=1).astype(np.int64)


def reduce_dimensions(
    doc_vectors: np.ndarray, target_dim: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Center and project onto the top principal directions.

    Returns (reduced (n, P), basis (P, dim) with orthonormal rows ordered by
    descending explained variance, mean (dim,)).  Each basis vector's sign
    is fixed so its largest-magnitude component is positive.  Out-of-range
    ``target_dim`` is clamped to min(n, dim) with a warning.
    """
    n, dim = doc_vectors.shape
    p_max = min(n, dim)
    if not 1 <= target_dim <= p_max:
        logger.warning("PCA dimension %d out of range, clamped to %d", target_dim, p_max)
        target_dim = p_max
    mean = doc_vectors.mean(axis=0)
    centered = doc_vectors - mean
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    basis = vt[:target_dim].copy()
    for row in basis:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    return centered @ basis.T, basis, mean


def _prior_init(
    data: np.ndarray,
    prior: np.ndarray,
    k: int,
    fallback_means: np.ndarray | None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Means, tied covariance, and mixing weights implied by the prior labels."""
    n, p = data.shape
    counts = np.bincount(prior, minlength=k).astype(np.float64)
    means = np.zeros((k, p))
    cov = np.zeros((p, p))
    for c in range(k):
        members = data[prior == c]
        if len(members) == 0:
            if fallback_means is None:
                raise ValueError(f"class {c} has no prior-assigned documents and no fallback mean")
            logger.warning("class %d has no prior documents; using fallback mean", c)
            means[c] = fallback_means[c]
        else:
            means[c] = members.mean(axis=0)
            centered = members - means[c]
            cov += centered.T @ centered
    cov /= n
    weights = np.maximum(counts, 1.0) / np.maximum(counts, 1.0).sum() \
        if (counts == 0).any() else counts / n
    return means, _regularize(cov), weights


def _regularize(cov: np.ndarray) -> np.ndarray:
    cov = (cov + cov.T) / 2.0
    p = cov.shape[0]
    return cov + (COV_REG_SCALE * np.trace(cov) / p) * np.eye(p)


def _tied_log_prob(
    data: np.ndarray, means: np.ndarray, cov: np.ndarray, weights: np.ndarray
) -> np.ndarray:
    """Log joint density log(pi_c * N(x | mu_c, cov)) for every (doc, cluster)."""
    n, p = data.shape
    try:
        chol = linalg.cholesky(cov, lower=True)
    except linalg.LinAlgError as exc:
        raise NumericError(f"tied covariance not positive-definite: {exc}")
    log_det = 2.0 * np.sum(np.log(np.diag(chol)))
    log_prob = np.empty((n, len(means)))
    for c, mu in enumerate(means):
        solved = linalg.solve_triangular(chol, (data - mu).T, lower=True)
        log_prob[:, c] = -0.5 * (np.sum(solved**2, axis=0) + p * np.log(2.0 * np.pi) + log_det)
    return log_prob + np.log(np.maximum(weights, 1e-300))


def _log_normalize_rows(log_prob: np.ndarray) -> tuple[np.ndarray, float]:
    row_max = log_prob.max(axis=1, keepdims=True)
    log_norm = row_max[:, 0] + np.log(np.exp(log_prob - row_max).sum(axis=1))
    resp = np.exp(log_prob - log_norm[:, None])
    return resp, float(log_norm.sum())


def gmm_align(
    data: np.ndarray,
    prior: np.ndarray,
    k: int,
    max_iters: int = DEFAULT_MAX_ITERS,
    tol: float = DEFAULT_TOL,
    fallback_means: np.ndarray | None = None,
    keep_history: bool = False,
) -> AlignmentResult:
    """EM over a Gaussian mixture with one shared covariance matrix.

    Cluster c starts at the mean of the documents whose prior label is c
    (or at ``fallback_means[c]`` when that class is empty), the covariance
    at the pooled within-class covariance, and the mixing weights at the
    prior proportions.  Stops at ``max_iters`` or when the relative change
    in log-likelihood drops below ``tol``.
    """
    data = np.asarray(data, dtype=np.float64)
    means, cov, weights = _prior_init(data, prior, k, fallback_means)
    n = len(data)

    ll_history: list[float] = []
    cov_history: list[np.ndarray] = [cov.copy()] if keep_history else []
    resp = None
    ll_prev: float | None = None
    for iteration in range(max_iters):
        log_prob = _tied_log_prob(data, means, cov, weights)
        resp, ll = _log_normalize_rows(log_prob)
        if not np.isfinite(ll):
            raise NumericError(f"log-likelihood became non-finite at iteration {iteration}")
        ll_history.append(ll)
        if ll_prev is not None and abs(ll - ll_prev) < tol * max(abs(ll_prev), 1e-12):
            break
        ll_prev = ll

        # M-step: responsibilities re-estimate means, the shared covariance,
        # and mixing weights.
        nk = np.maximum(resp.sum(axis=0), 1e-12)
        weights = nk / n
        means = (resp.T @ data) / nk[:, None]
        cov = np.zeros_like(cov)
        for c in range(k):
            centered = data - means[c]
            cov += (resp[:, c, None] * centered).T @ centered
        cov = _regularize(cov / n)
        if keep_history:
            cov_history.append(cov.copy())
    else:
        log_prob = _tied_log_prob(data, means, cov, weights)
        resp, ll = _log_normalize_rows(log_prob)
        if not np.isfinite(ll):
            raise NumericError(f"log-likelihood became non-finite at iteration {max_iters}")
        ll_history.append(ll)

    assignment = np.argmax(resp, axis=1).astype(np.int64)
    confidence = resp[np.arange(n), assignment]
    state = GmmState(
        means=means, tied_covariance=cov, mixing_weights=weights,
        log_likelihood=ll_history[-1],
    )
    return AlignmentResult(
        assignment=assignment, posterior=resp, confidence=confidence,
        state=state, ll_history=ll_history, covariance_history=cov_history,
    )


def kmeans_align(
    data: np.ndarray,
    prior: np.ndarray,
    k: int,
    max_iters: int = DEFAULT_MAX_ITERS,
    fallback_means: np.ndarray | None = None,
) -> AlignmentResult:
    """Lloyd iterations from prior-derived means (clustering ablation).

    Confidence is the within-cluster rank of (negative) distance mapped to
    (0, 1]: the closest document in a cluster scores 1.  Posteriors are
    one-hot.
    """
    data = np.asarray(data, dtype=np.float64)
    n = len(data)
    counts = np.bincount(prior, minlength=k)
    means = np.zeros((k, data.shape[1]))
    for c in range(k):
        members = data[prior == c]
        if len(members) == 0:
            if fallback_means is None:
                raise ValueError(f"class {c} has no prior-assigned documents and no fallback mean")
            means[c] = fallback_means[c]
        else:
            means[c] = members.mean(axis=0)

    assignment = None
    for _ in range(max_iters):
        dists = np.linalg.norm(data[:, None, :] - means[None, :, :], axis=2)
        new_assignment = np.argmin(dists, axis=1)
        for c in range(k):
            if not (new_assignment == c).any():
                own = dists[np.arange(n), new_assignment]
                farthest = int(np.argmax(own))
                logger.warning("empty cluster %d reseeded from document %d", c, farthest)
                new_assignment[farthest] = c
        if assignment is not None and np.array_equal(new_assignment, assignment):
            break
        assignment = new_assignment
        for c in range(k):
            means[c] = data[assignment == c].mean(axis=0)

    dists = np.linalg.norm(data[:, None, :] - means[None, :, :], axis=2)
    assignment = np.argmin(dists, axis=1).astype(np.int64)

    confidence = np.empty(n)
    own_dist = dists[np.arange(n), assignment]
    for c in range(k):
        members = np.flatnonzero(assignment == c)
        if len(members) == 0:
            continue
        order = members[np.lexsort((members, own_dist[members]))]
        confidence[order] = (len(members) - np.arange(len(members))) / len(members)

    posterior = np.zeros((n, k))
    posterior[np.arange(n), assignment] = 1.0
    return AlignmentResult(assignment=assignment, posterior=posterior, confidence=confidence)
