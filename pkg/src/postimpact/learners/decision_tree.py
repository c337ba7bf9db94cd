"""CART decision tree with Gini impurity and midpoint threshold splits.

Deterministic: candidate dimensions are scanned in ascending index order and
a new best split must strictly beat the incumbent, so gain ties resolve to
the lower dimension (and to the lower threshold within a dimension). A node
is split whenever any dimension still separates samples, even at zero gain;
this keeps training accuracy at 1.0 on consistent data when depth is
uncapped (e.g. XOR-style layouts where every single split has zero gain).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

DEFAULT_MAX_DEPTH = 20
DEFAULT_MIN_SAMPLES_SPLIT = 2


@dataclass
class TreeNode:
    score: float        # weighted fraction of high-impact samples
    n_samples: int
    feature: int = -1   # -1 marks a leaf
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    def is_leaf(self) -> bool:
        return self.feature < 0


@dataclass
class DecisionTreeParams:
    root: TreeNode
    dim: int
    max_depth: int | None
    min_samples_split: int

    def depth(self) -> int:
        def walk(node: TreeNode) -> int:
            if node.is_leaf():
                return 0
            return 1 + max(walk(node.left), walk(node.right))
        return walk(self.root)


def _gini(high_w: float, total_w: float) -> float:
    if total_w <= 0:
        return 0.0
    p = high_w / total_w
    return 1.0 - p * p - (1.0 - p) * (1.0 - p)


def _best_split(X: np.ndarray, y: np.ndarray, w: np.ndarray):
    """Best (gain, dim, threshold) over all dims, or None if no dim separates."""
    total_w = w.sum()
    total_high = float(w[y == 1].sum())
    parent = _gini(total_high, total_w)

    best = None  # (gain, dim, threshold)
    for d in range(X.shape[1]):
        vals = X[:, d]
        order = np.argsort(vals, kind="stable")
        sv = vals[order]
        boundaries = np.nonzero(np.diff(sv))[0]
        if boundaries.size == 0:
            continue
        sw = w[order]
        swh = sw * y[order]
        cum_w = np.cumsum(sw)
        cum_high = np.cumsum(swh)

        left_w = cum_w[boundaries]
        left_high = cum_high[boundaries]
        right_w = total_w - left_w
        right_high = total_high - left_high

        pl = left_high / left_w
        pr = right_high / right_w
        gini_l = 1.0 - pl * pl - (1.0 - pl) ** 2
        gini_r = 1.0 - pr * pr - (1.0 - pr) ** 2
        child = (left_w * gini_l + right_w * gini_r) / total_w
        gains = parent - child

        pos = int(np.argmax(gains))  # first (lowest threshold) among ties
        gain = float(gains[pos])
        if best is None or gain > best[0]:
            b = boundaries[pos]
            best = (gain, d, float((sv[b] + sv[b + 1]) / 2.0))
    return best


def _build(X: np.ndarray, y: np.ndarray, w: np.ndarray, depth: int,
           max_depth: int | None, min_samples_split: int) -> TreeNode:
    total_w = w.sum()
    high_w = float(w[y == 1].sum())
    node = TreeNode(score=high_w / total_w if total_w > 0 else 0.0,
                    n_samples=len(y))

    if len(y) < min_samples_split or (max_depth is not None and depth >= max_depth):
        return node
    if high_w == 0.0 or high_w == total_w:  # pure
        return node

    split = _best_split(X, y, w)
    if split is None:
        return node

    _, d, threshold = split
    mask = X[:, d] <= threshold
    node.feature = d
    node.threshold = threshold
    node.left = _build(X[mask], y[mask], w[mask], depth + 1, max_depth, min_samples_split)
    node.right = _build(X[~mask], y[~mask], w[~mask], depth + 1, max_depth, min_samples_split)
    return node


def fit(X: sparse.csr_matrix, y: np.ndarray,
        max_depth: int | None = DEFAULT_MAX_DEPTH,
        min_samples_split: int = DEFAULT_MIN_SAMPLES_SPLIT,
        balanced: bool = False) -> DecisionTreeParams:
    Xd = np.asarray(X.todense(), dtype=np.float64)
    y = np.asarray(y)
    if balanced:
        n = len(y)
        w = np.where(y == 1, n / (2.0 * max(y.sum(), 1)),
                     n / (2.0 * max(n - y.sum(), 1))).astype(np.float64)
    else:
        w = np.ones(len(y), dtype=np.float64)
    root = _build(Xd, y, w, 0, max_depth, min_samples_split)
    return DecisionTreeParams(root=root, dim=X.shape[1],
                              max_depth=max_depth,
                              min_samples_split=min_samples_split)


def score(params: DecisionTreeParams, X: sparse.csr_matrix) -> np.ndarray:
    Xd = np.asarray(X.todense(), dtype=np.float64)
    out = np.empty(Xd.shape[0])
    for i, row in enumerate(Xd):
        node = params.root
        while not node.is_leaf():
            node = node.left if row[node.feature] <= node.threshold else node.right
        out[i] = node.score
    return out


# --- flat (array) form for serialization ------------------------------------

def to_arrays(params: DecisionTreeParams) -> dict[str, np.ndarray]:
    """Preorder flattening; children stored as node indices, -1 for leaves."""
    feats, thresholds, lefts, rights, scores, counts = [], [], [], [], [], []

    def walk(node: TreeNode) -> int:
        idx = len(feats)
        feats.append(node.feature)
        thresholds.append(node.threshold)
        scores.append(node.score)
        counts.append(node.n_samples)
        lefts.append(-1)
        rights.append(-1)
        if not node.is_leaf():
            lefts[idx] = walk(node.left)
            rights[idx] = walk(node.right)
        return idx

    walk(params.root)
    return {
        "tree_feature": np.asarray(feats, dtype=np.int64),
        "tree_threshold": np.asarray(thresholds, dtype=np.float64),
        "tree_left": np.asarray(lefts, dtype=np.int64),
        "tree_right": np.asarray(rights, dtype=np.int64),
        "tree_score": np.asarray(scores, dtype=np.float64),
        "tree_n_samples": np.asarray(counts, dtype=np.int64),
    }


def from_arrays(arrays: dict, dim: int, max_depth: int | None,
                min_samples_split: int) -> DecisionTreeParams:
    feats = arrays["tree_feature"]
    thresholds = arrays["tree_threshold"]
    lefts = arrays["tree_left"]
    rights = arrays["tree_right"]
    scores = arrays["tree_score"]
    counts = arrays["tree_n_samples"]

    def build(idx: int) -> TreeNode:
        node = TreeNode(score=float(scores[idx]), n_samples=int(counts[idx]),
                        feature=int(feats[idx]), threshold=float(thresholds[idx]))
        if node.feature >= 0:
            node.left = build(int(lefts[idx]))
            node.right = build(int(rights[idx]))
        return node

    return DecisionTreeParams(root=build(0), dim=dim, max_depth=max_depth,
                              min_samples_split=min_samples_split)
