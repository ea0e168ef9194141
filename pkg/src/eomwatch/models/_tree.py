"""CART machinery shared by the random forest and gradient boosting.

Split search is vectorized: every candidate feature is sorted once and all
midpoint thresholds are scored in one pass (Gini impurity reduction for
classification, sum-of-squared-error reduction for regression). Ties resolve
to the first candidate feature in drawn order and the lowest split position,
which keeps tree construction deterministic for a given RNG state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

#: Splits must improve impurity by more than this to be accepted.
GAIN_EPS = 1e-12


@dataclass
class TreeNode:
    feature: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    counts: tuple[int, int] | None = None  # classification leaves: (n0, n1)
    value: float | None = None  # regression leaves
    leaf_id: int = -1

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    def to_dict(self) -> dict:
        if self.is_leaf:
            leaf: dict = {}
            if self.counts is not None:
                leaf["counts"] = list(self.counts)
            if self.value is not None:
                leaf["value"] = self.value
            return leaf
        return {
            "feature": self.feature,
            "threshold": self.threshold,
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TreeNode":
        if "feature" in d:
            return cls(
                feature=d["feature"],
                threshold=d["threshold"],
                left=cls.from_dict(d["left"]),
                right=cls.from_dict(d["right"]),
            )
        return cls(
            counts=tuple(d["counts"]) if "counts" in d else None,
            value=d.get("value"),
        )


def _column_best(gains: np.ndarray) -> tuple[int, int] | None:
    """(split_position, column) of the best valid gain, or None."""
    if gains.size == 0 or not np.any(gains > GAIN_EPS):
        return None
    per_col = gains.max(axis=0)
    j = int(np.argmax(per_col))  # first column attaining the max
    i = int(np.argmax(gains[:, j]))  # lowest split position in that column
    return i, j


def best_split_classification(
    Xsub: np.ndarray, y: np.ndarray
) -> tuple[int, float, float] | None:
    """Best (column, threshold, gain) by Gini impurity reduction, or None."""
    n = Xsub.shape[0]
    order = np.argsort(Xsub, axis=0, kind="stable")
    xs = np.take_along_axis(Xsub, order, axis=0)
    ys = y[order]

    total1 = int(y.sum())
    parent = 1.0 - (total1 / n) ** 2 - ((n - total1) / n) ** 2

    n1_left = np.cumsum(ys, axis=0)[:-1].astype(float)
    n_left = np.arange(1, n, dtype=float)[:, None]
    n_right = n - n_left
    n1_right = total1 - n1_left

    gini_left = 1.0 - (n1_left / n_left) ** 2 - ((n_left - n1_left) / n_left) ** 2
    gini_right = 1.0 - (n1_right / n_right) ** 2 - ((n_right - n1_right) / n_right) ** 2
    gains = parent - (n_left * gini_left + n_right * gini_right) / n
    gains[xs[:-1] >= xs[1:]] = -np.inf  # only positions between distinct values

    best = _column_best(gains)
    if best is None:
        return None
    i, j = best
    threshold = (xs[i, j] + xs[i + 1, j]) / 2.0
    return j, float(threshold), float(gains[i, j])


def best_split_regression(
    Xsub: np.ndarray, t: np.ndarray
) -> tuple[int, float, float] | None:
    """Best (column, threshold, gain) by SSE reduction, or None."""
    n = Xsub.shape[0]
    order = np.argsort(Xsub, axis=0, kind="stable")
    xs = np.take_along_axis(Xsub, order, axis=0)
    ts = t[order]

    s_total = float(t.sum())
    q_total = float((t * t).sum())
    sse_parent = q_total - s_total * s_total / n

    s_left = np.cumsum(ts, axis=0)[:-1]
    q_left = np.cumsum(ts * ts, axis=0)[:-1]
    n_left = np.arange(1, n, dtype=float)[:, None]
    n_right = n - n_left
    sse_left = q_left - s_left * s_left / n_left
    sse_right = (q_total - q_left) - (s_total - s_left) ** 2 / n_right
    gains = sse_parent - sse_left - sse_right
    gains[xs[:-1] >= xs[1:]] = -np.inf

    best = _column_best(gains)
    if best is None:
        return None
    i, j = best
    threshold = (xs[i, j] + xs[i + 1, j]) / 2.0
    return j, float(threshold), float(gains[i, j])


class ClassificationTree:
    """Binary Gini decision tree grown until pure (or max_depth / no gain)."""

    def __init__(self, max_depth: int | None = None, max_features: int | None = None):
        self.max_depth = max_depth
        self.max_features = max_features

    def fit(self, X: np.ndarray, y: np.ndarray, rng: np.random.Generator) -> "ClassificationTree":
        self.n_features_ = X.shape[1]
        self.root_ = self._build(X, y, np.arange(X.shape[0]), rng, depth=0)
        return self

    def _build(self, X, y, idx, rng, depth) -> TreeNode:
        y_node = y[idx]
        n1 = int(y_node.sum())
        counts = (len(idx) - n1, n1)
        if (
            n1 == 0
            or n1 == len(idx)
            or len(idx) < 2
            or (self.max_depth is not None and depth >= self.max_depth)
        ):
            return TreeNode(counts=counts)

        d = X.shape[1]
        if self.max_features is not None and self.max_features < d:
            feats = rng.choice(d, size=self.max_features, replace=False)
        else:
            feats = rng.permutation(d) if self.max_features is not None else np.arange(d)
        split = best_split_classification(X[np.ix_(idx, feats)], y_node)
        if split is None:
            return TreeNode(counts=counts)
        j, threshold, _ = split
        feature = int(feats[j])
        go_left = X[idx, feature] <= threshold
        left_idx, right_idx = idx[go_left], idx[~go_left]
        if len(left_idx) == 0 or len(right_idx) == 0:  # degenerate float midpoint
            return TreeNode(counts=counts)
        return TreeNode(
            feature=feature,
            threshold=threshold,
            left=self._build(X, y, left_idx, rng, depth + 1),
            right=self._build(X, y, right_idx, rng, depth + 1),
        )

    def _leaf(self, row: np.ndarray) -> TreeNode:
        node = self.root_
        while not node.is_leaf:
            node = node.left if row[node.feature] <= node.threshold else node.right
        return node

    def predict_counts(self, X: np.ndarray) -> np.ndarray:
        return np.array([self._leaf(row).counts for row in X], dtype=float)

    def predict(self, X: np.ndarray) -> np.ndarray:
        counts = self.predict_counts(X)
        return (counts[:, 1] > counts[:, 0]).astype(np.int64)  # tie -> class 0


class RegressionTree:
    """Depth-limited SSE regression tree; leaf values may be overridden."""

    def __init__(self, max_depth: int):
        self.max_depth = max_depth

    def fit(self, X: np.ndarray, target: np.ndarray) -> "RegressionTree":
        self.n_features_ = X.shape[1]
        self.leaves_: list[TreeNode] = []
        self.leaf_rows_: list[np.ndarray] = []
        self.root_ = self._build(X, target, np.arange(X.shape[0]), depth=0)
        return self

    def _make_leaf(self, target: np.ndarray, idx: np.ndarray) -> TreeNode:
        node = TreeNode(value=float(target[idx].mean()), leaf_id=len(self.leaves_))
        self.leaves_.append(node)
        self.leaf_rows_.append(idx)
        return node

    def _build(self, X, target, idx, depth) -> TreeNode:
        if len(idx) < 2 or depth >= self.max_depth:
            return self._make_leaf(target, idx)
        split = best_split_regression(X[idx], target[idx])
        if split is None:
            return self._make_leaf(target, idx)
        j, threshold, _ = split
        go_left = X[idx, j] <= threshold
        left_idx, right_idx = idx[go_left], idx[~go_left]
        if len(left_idx) == 0 or len(right_idx) == 0:
            return self._make_leaf(target, idx)
        return TreeNode(
            feature=int(j),
            threshold=threshold,
            left=self._build(X, target, left_idx, depth + 1),
            right=self._build(X, target, right_idx, depth + 1),
        )

    def _leaf(self, row: np.ndarray) -> TreeNode:
        node = self.root_
        while not node.is_leaf:
            node = node.left if row[node.feature] <= node.threshold else node.right
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.array([self._leaf(row).value for row in X])

    def set_leaf_values(self, values: dict[int, float]) -> None:
        for leaf in self.leaves_:
            if leaf.leaf_id in values:
                leaf.value = values[leaf.leaf_id]
