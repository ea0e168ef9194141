"""Gradient boosting with binomial deviance and depth-3 regression trees."""

from __future__ import annotations

import math

import numpy as np

from ..validation import check_array, check_is_fitted, check_X_y
from ._tree import RegressionTree, TreeNode
from .base import BaseEstimator, ClassifierMixin

#: The initial log-odds is clamped to this magnitude for single-class data.
LOG_ODDS_CAP = 10.0
_PROB_EPS = 1e-12
_HESSIAN_EPS = 1e-150


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-z))


def _deviance(y: np.ndarray, prob: np.ndarray) -> float:
    p = np.clip(prob, _PROB_EPS, 1.0 - _PROB_EPS)
    return float(-np.mean(y * np.log(p) + (1 - y) * np.log(1 - p)))


class GradientBoostingClassifier(BaseEstimator, ClassifierMixin):
    """Binomial-deviance boosting.

    Starts from the training log-odds, then fits ``n_estimators`` regression
    trees to the negative gradient (y - sigmoid(F)) and applies per-leaf
    Newton steps scaled by the learning rate. A single-class training set
    yields a constant model at the clamped log-odds. Training is fully
    deterministic (no subsampling); ``train_deviance_`` records the training
    deviance after the initial fit and after every round.
    """

    def __init__(self, n_estimators: int = 100, learning_rate: float = 0.1, max_depth: int = 3):
        self.n_estimators = n_estimators
        self.learning_rate = learning_rate
        self.max_depth = max_depth

    def fit(self, X, y) -> "GradientBoostingClassifier":
        X, y = check_X_y(X, y)
        yf = y.astype(float)
        p = float(yf.mean())
        self.trees_ = []
        if p in (0.0, 1.0):
            self.f0_ = LOG_ODDS_CAP if p == 1.0 else -LOG_ODDS_CAP
            self.train_deviance_ = [_deviance(yf, _sigmoid(np.full(len(y), self.f0_)))]
            self.n_features_ = X.shape[1]
            return self

        self.f0_ = math.log(p / (1.0 - p))
        F = np.full(len(y), self.f0_)
        self.train_deviance_ = [_deviance(yf, _sigmoid(F))]
        for _ in range(self.n_estimators):
            prob = _sigmoid(F)
            residual = yf - prob
            tree = RegressionTree(max_depth=self.max_depth).fit(X, residual)
            hessian = prob * (1.0 - prob)
            values = {}
            for leaf, rows in zip(tree.leaves_, tree.leaf_rows_):
                denom = float(hessian[rows].sum())
                values[leaf.leaf_id] = (
                    float(residual[rows].sum()) / denom if denom > _HESSIAN_EPS else 0.0
                )
            tree.set_leaf_values(values)
            F = F + self.learning_rate * tree.predict(X)
            self.trees_.append(tree)
            self.train_deviance_.append(_deviance(yf, _sigmoid(F)))
        self.n_features_ = X.shape[1]
        return self

    def decision_function(self, X) -> np.ndarray:
        check_is_fitted(self, "f0_")
        X = check_array(X)
        F = np.full(X.shape[0], self.f0_)
        for tree in self.trees_:
            F = F + self.learning_rate * tree.predict(X)
        return F

    def predict_proba(self, X) -> np.ndarray:
        p1 = _sigmoid(self.decision_function(X))
        return np.column_stack([1.0 - p1, p1])

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X)[:, 1] >= 0.5).astype(np.int64)

    def to_dict(self) -> dict:
        check_is_fitted(self, "f0_")
        return {
            "n_estimators": self.n_estimators,
            "learning_rate": self.learning_rate,
            "max_depth": self.max_depth,
            "f0": self.f0_,
            "n_features": self.n_features_,
            "trees": [t.root_.to_dict() for t in self.trees_],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GradientBoostingClassifier":
        model = cls(
            n_estimators=d["n_estimators"],
            learning_rate=d["learning_rate"],
            max_depth=d["max_depth"],
        )
        model.f0_ = d["f0"]
        model.n_features_ = d["n_features"]
        model.trees_ = []
        for root in d["trees"]:
            tree = RegressionTree(max_depth=d["max_depth"])
            tree.root_ = TreeNode.from_dict(root)
            tree.n_features_ = d["n_features"]
            tree.leaves_ = []
            tree.leaf_rows_ = []
            model.trees_.append(tree)
        return model
