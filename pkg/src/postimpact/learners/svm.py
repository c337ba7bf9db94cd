"""Linear SVM trained with a Pegasos-style stochastic subgradient method.

Two standard refinements over the plain last-iterate recipe:

* learning-rate offset: eta_t = 1 / (lambda * (t + t0)) with t0 = 1/lambda,
  so the first steps are O(1) instead of O(1/lambda);
* iterate averaging weighted by t, which is what the model returns. The
  last iterate of plain stochastic subgradient descent oscillates, while
  the weighted average settles, keeping the recorded per-epoch objective
  (evaluated on the averaged weights) non-increasing in practice.

The raw weight vector is kept as scale * direction so the per-step shrink
costs O(1); the running average is carried through a second accumulator
with the same trick, so every step stays O(nnz of the sampled row). After
each step the raw weights are projected onto the ball of radius
1/sqrt(lambda).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

DEFAULT_LAMBDA = 1e-4
DEFAULT_EPOCHS = 50


@dataclass
class SVMParams:
    weights: np.ndarray
    bias: float
    lambda_: float
    epochs: int
    objective_per_epoch: list[float] = field(default_factory=list)


def _objective(X, y_signed, sample_weight, w, b, lambda_) -> float:
    margins = y_signed * (X @ w + b)
    hinge = np.maximum(0.0, 1.0 - margins) * sample_weight
    return 0.5 * lambda_ * float(w @ w) + float(hinge.mean())


def fit(X: sparse.csr_matrix, y: np.ndarray, rng: np.random.Generator,
        lambda_: float = DEFAULT_LAMBDA, epochs: int = DEFAULT_EPOCHS,
        balanced: bool = False) -> SVMParams:
    n, dim = X.shape
    y_signed = np.where(np.asarray(y) == 1, 1.0, -1.0)
    if balanced:
        n_high = int((y_signed > 0).sum())
        sample_weight = np.where(y_signed > 0, n / (2.0 * max(n_high, 1)),
                                 n / (2.0 * max(n - n_high, 1)))
    else:
        sample_weight = np.ones(n)

    # per-row views, cheaper than csr row slicing in the inner loop
    rows = [(X.indices[X.indptr[i]:X.indptr[i + 1]],
             X.data[X.indptr[i]:X.indptr[i + 1]]) for i in range(n)]
    row_sq = np.array([float(v @ v) for _, v in rows])

    t0 = 1.0 / lambda_
    radius_sq = 1.0 / lambda_

    v = np.zeros(dim)       # raw weights w = scale * v
    scale = 1.0
    sq_norm = 0.0
    b = 0.0

    u = np.zeros(dim)       # averaged weights w_bar = p * v + q * u
    p = 0.0
    q = 1.0
    b_bar = 0.0

    t = 0
    objective_per_epoch: list[float] = []
    for _ in range(epochs):
        for i in rng.permutation(n):
            t += 1
            eta = 1.0 / (lambda_ * (t + t0))
            idx, vals = rows[i]
            dot = scale * float(v[idx] @ vals) if idx.size else 0.0
            violated = y_signed[i] * (dot + b) < 1.0

            shrink = 1.0 - eta * lambda_
            scale *= shrink
            sq_norm *= shrink * shrink
            dot *= shrink

            coeff = 0.0
            if violated:
                step = eta * sample_weight[i] * y_signed[i]
                if idx.size:
                    coeff = step / scale
                    v[idx] += coeff * vals
                    sq_norm += 2.0 * step * dot + step * step * row_sq[i]
                b += step

            if sq_norm > radius_sq:
                factor = np.sqrt(radius_sq / sq_norm)
                scale *= factor
                sq_norm = radius_sq

            # weighted running average: w_bar_t = w_bar_{t-1} + c (w_t - w_bar_{t-1})
            # with weight t, so c = 2 / (t + 1); the u-correction keeps the
            # average consistent with the sparse in-place change to v.
            c = 2.0 / (t + 1)
            if t == 1:
                p, q, b_bar = scale, 1.0, b
            else:
                if coeff != 0.0:
                    u[idx] -= (p / q) * coeff * vals
                q *= 1.0 - c
                p = (1.0 - c) * p + c * scale
                b_bar = (1.0 - c) * b_bar + c * b

        w_bar = p * v + q * u
        objective_per_epoch.append(
            _objective(X, y_signed, sample_weight, w_bar, b_bar, lambda_))

    return SVMParams(weights=p * v + q * u, bias=b_bar, lambda_=lambda_,
                     epochs=epochs, objective_per_epoch=objective_per_epoch)


def margins(params: SVMParams, X: sparse.csr_matrix) -> np.ndarray:
    return np.asarray(X @ params.weights).ravel() + params.bias


def score(params: SVMParams, X: sparse.csr_matrix) -> np.ndarray:
    """Logistic squash of the signed margin; margin 0 scores exactly 0.5."""
    return 1.0 / (1.0 + np.exp(-margins(params, X)))
