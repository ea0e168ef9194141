"""k-nearest-neighbor classification with uniform weights."""

from __future__ import annotations

import numpy as np

from ..errors import ValidationError
from ..validation import check_array, check_is_fitted, check_X_y
from .base import BaseEstimator, ClassifierMixin


def _neighbor_indices(train_X: np.ndarray, query: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k nearest rows by Euclidean distance.

    Distance ties break toward the lower row index (stable sort).
    """
    d2 = ((train_X - query) ** 2).sum(axis=1)
    return np.argsort(d2, kind="stable")[:k]


def predict_knn(train_X, train_y, query, k: int = 5) -> int:
    """Majority label among the k nearest training rows; vote ties -> class 0."""
    train_X, train_y = check_X_y(train_X, train_y)
    if k > train_X.shape[0]:
        raise ValidationError(f"k={k} exceeds training size {train_X.shape[0]}")
    query = np.asarray(query, dtype=float).ravel()
    neighbors = train_y[_neighbor_indices(train_X, query, k)]
    ones = int(neighbors.sum())
    return int(ones > k - ones)


class KNeighborsClassifier(BaseEstimator, ClassifierMixin):
    """5-NN with uniform weights by default; deterministic tie handling."""

    def __init__(self, k: int = 5):
        self.k = k

    def fit(self, X, y) -> "KNeighborsClassifier":
        X, y = check_X_y(X, y)
        if self.k > X.shape[0]:
            raise ValidationError(f"k={self.k} exceeds training size {X.shape[0]}")
        self.train_X_ = X
        self.train_y_ = y
        return self

    def predict_proba(self, X) -> np.ndarray:
        """Neighbor label fractions, shape (n, 2)."""
        check_is_fitted(self, "train_X_")
        X = check_array(X)
        p1 = np.empty(X.shape[0])
        for i, query in enumerate(X):
            neighbors = self.train_y_[_neighbor_indices(self.train_X_, query, self.k)]
            p1[i] = neighbors.sum() / self.k
        return np.column_stack([1.0 - p1, p1])

    def predict(self, X) -> np.ndarray:
        proba = self.predict_proba(X)
        return (proba[:, 1] > proba[:, 0]).astype(np.int64)  # tie -> class 0

    def to_dict(self) -> dict:
        check_is_fitted(self, "train_X_")
        return {
            "k": self.k,
            "train_X": self.train_X_.tolist(),
            "train_y": self.train_y_.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "KNeighborsClassifier":
        model = cls(k=d["k"])
        model.train_X_ = np.asarray(d["train_X"], dtype=float)
        model.train_y_ = np.asarray(d["train_y"], dtype=np.int64)
        return model
