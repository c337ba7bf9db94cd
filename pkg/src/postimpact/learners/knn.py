"""k-nearest-neighbor voting by cosine similarity over sparse vectors.

Similarity ties resolve to the lower training index (stable sort on the
negated similarities). A zero vector has similarity 0 to everything.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

DEFAULT_K = 5


@dataclass
class KNNParams:
    k: int
    train: sparse.csr_matrix    # stored training vectors
    labels: np.ndarray          # 0/1 per training row
    vote_weight: np.ndarray     # per-row vote weight (ones unless balanced)
    normalized: sparse.csr_matrix  # row-normalized copy of `train`


def _row_normalize(X: sparse.csr_matrix) -> sparse.csr_matrix:
    norms = np.sqrt(np.asarray(X.multiply(X).sum(axis=1)).ravel())
    inv = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
    return sparse.diags(inv) @ X


def fit(X: sparse.csr_matrix, y: np.ndarray, k: int = DEFAULT_K,
        balanced: bool = False) -> KNNParams:
    y = np.asarray(y)
    n = len(y)
    if balanced:
        n_high = int(y.sum())
        vote_weight = np.where(y == 1, n / (2.0 * max(n_high, 1)),
                               n / (2.0 * max(n - n_high, 1)))
    else:
        vote_weight = np.ones(n)
    return KNNParams(k=k, train=X.tocsr(), labels=y, vote_weight=vote_weight,
                     normalized=_row_normalize(X.tocsr()))


def score(params: KNNParams, X: sparse.csr_matrix) -> np.ndarray:
    """Fraction of the k nearest training vectors voting high-impact."""
    k = min(params.k, params.train.shape[0])
    sims = np.asarray((_row_normalize(X) @ params.normalized.T).todense())
    out = np.empty(sims.shape[0])
    for i, row in enumerate(sims):
        top = np.argsort(-row, kind="stable")[:k]
        weights = params.vote_weight[top]
        out[i] = float((weights * params.labels[top]).sum() / weights.sum())
    return out
