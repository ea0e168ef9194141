"""Random forest: bagged Gini trees with sqrt feature sampling."""

from __future__ import annotations

import math

import numpy as np

from ..validation import check_array, check_is_fitted, check_X_y
from ._tree import ClassificationTree, TreeNode
from .base import BaseEstimator, ClassifierMixin


def tree_rng(seed: int, tree_index: int) -> np.random.Generator:
    """Per-tree generator derived deterministically from (seed, tree index)."""
    return np.random.default_rng(np.random.SeedSequence([seed, tree_index]))


class RandomForestClassifier(BaseEstimator, ClassifierMixin):
    """100 unlimited-depth trees by default, each on a bootstrap sample.

    Every node evaluates ceil(sqrt(d)) features drawn without replacement;
    prediction is the majority vote over trees with ties resolved to class 0.
    Because each tree's RNG depends only on (seed, tree index), training is
    schedule-independent and could be parallelized without changing results.
    """

    def __init__(self, n_trees: int = 100, max_depth: int | None = None, seed: int = 0):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.seed = seed

    def fit(self, X, y) -> "RandomForestClassifier":
        X, y = check_X_y(X, y)
        n, d = X.shape
        max_features = math.ceil(math.sqrt(d))
        self.trees_ = []
        for i in range(self.n_trees):
            rng = tree_rng(self.seed, i)
            bootstrap = rng.integers(0, n, size=n)
            tree = ClassificationTree(max_depth=self.max_depth, max_features=max_features)
            tree.fit(X[bootstrap], y[bootstrap], rng)
            self.trees_.append(tree)
        self.n_features_ = d
        return self

    def predict_proba(self, X) -> np.ndarray:
        """Vote fractions over the forest, shape (n, 2)."""
        check_is_fitted(self, "trees_")
        X = check_array(X)
        votes1 = np.zeros(X.shape[0])
        for tree in self.trees_:
            votes1 += tree.predict(X)
        p1 = votes1 / len(self.trees_)
        return np.column_stack([1.0 - p1, p1])

    def predict(self, X) -> np.ndarray:
        proba = self.predict_proba(X)
        return (proba[:, 1] > proba[:, 0]).astype(np.int64)  # tie -> class 0

    def to_dict(self) -> dict:
        check_is_fitted(self, "trees_")
        return {
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "seed": self.seed,
            "n_features": self.n_features_,
            "trees": [t.root_.to_dict() for t in self.trees_],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RandomForestClassifier":
        model = cls(n_trees=d["n_trees"], max_depth=d["max_depth"], seed=d["seed"])
        model.n_features_ = d["n_features"]
        model.trees_ = []
        for root in d["trees"]:
            tree = ClassificationTree(max_depth=d["max_depth"])
            tree.root_ = TreeNode.from_dict(root)
            tree.n_features_ = d["n_features"]
            model.trees_.append(tree)
        return model
