"""Multinomial Naive Bayes over non-negative feature values, Laplace smoothed."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.special import logsumexp

DEFAULT_ALPHA = 1.0


@dataclass
class NaiveBayesParams:
    alpha: float
    class_log_prior: np.ndarray   # shape (2,), index 0 = low, 1 = high
    feature_log_prob: np.ndarray  # shape (2, dim)


def fit(X: sparse.csr_matrix, y: np.ndarray, alpha: float = DEFAULT_ALPHA,
        balanced: bool = False) -> NaiveBayesParams:
    n, dim = X.shape
    feature_log_prob = np.empty((2, dim))
    priors = np.empty(2)
    for c in (0, 1):
        mask = y == c
        sums = np.asarray(X[mask].sum(axis=0)).ravel()
        feature_log_prob[c] = np.log(sums + alpha) - np.log(sums.sum() + alpha * dim)
        priors[c] = mask.sum() / n
    if balanced:
        priors[:] = 0.5
    return NaiveBayesParams(
        alpha=alpha,
        class_log_prior=np.log(priors),
        feature_log_prob=feature_log_prob,
    )


def class_log_posteriors(params: NaiveBayesParams, X: sparse.csr_matrix) -> np.ndarray:
    """Log posteriors, shape (n, 2), normalized so each row sums to 1 in
    probability space."""
    jll = X @ params.feature_log_prob.T + params.class_log_prior
    return jll - logsumexp(jll, axis=1, keepdims=True)


def score(params: NaiveBayesParams, X: sparse.csr_matrix) -> np.ndarray:
    """Posterior probability of the high-impact class per row."""
    return np.exp(class_log_posteriors(params, X)[:, 1])
