"""Stratified train/test splitting and stratified k-fold cross-validation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from ..validation import check_X_y


@dataclass(frozen=True)
class Dataset:
    """Feature matrix with binary labels and row identifiers."""

    X: np.ndarray
    y: np.ndarray
    ids: tuple[str, ...]

    def __post_init__(self):
        X, y = check_X_y(self.X, self.y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        if len(self.ids) != X.shape[0]:
            raise ValidationError("ids length does not match row count")

    def __len__(self) -> int:
        return self.X.shape[0]

    def subset(self, indices: np.ndarray) -> "Dataset":
        return Dataset(
            X=self.X[indices],
            y=self.y[indices],
            ids=tuple(self.ids[i] for i in indices),
        )


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def stratified_split_indices(
    y: np.ndarray, test_fraction: float = 0.2, seed: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    """Disjoint, exhaustive (train, test) indices with per-class test counts
    of round-half-up(class_count * test_fraction). Deterministic under seed."""
    if not 0 < test_fraction < 1:
        raise ValidationError(f"test_fraction must be in (0, 1), got {test_fraction}")
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    test_parts = []
    for label in sorted(np.unique(y).tolist()):
        members = np.flatnonzero(y == label)
        if len(members) < 2:
            raise ValidationError(
                f"class {label} has {len(members)} member(s); need at least 2"
            )
        n_test = _round_half_up(len(members) * test_fraction)
        shuffled = members[rng.permutation(len(members))]
        test_parts.append(shuffled[:n_test])
    test_idx = np.sort(np.concatenate(test_parts)) if test_parts else np.array([], dtype=int)
    train_idx = np.setdiff1d(np.arange(len(y)), test_idx)
    return train_idx, test_idx


def stratified_split(
    data: Dataset, test_fraction: float = 0.2, seed: int = 0
) -> tuple[Dataset, Dataset]:
    """80/20 stratified split by default; rows keep their original order."""
    train_idx, test_idx = stratified_split_indices(data.y, test_fraction, seed)
    return data.subset(train_idx), data.subset(test_idx)


def stratified_kfold_indices(
    y: np.ndarray, k: int = 5, seed: int = 0
) -> list[tuple[np.ndarray, np.ndarray]]:
    """k (train, validation) index pairs: disjoint, exhaustive, label-stratified.

    Per-class remainders rotate across folds so overall fold sizes differ by
    at most one even with several classes.
    """
    y = np.asarray(y)
    n = len(y)
    if n < k:
        raise ValidationError(f"cannot make {k} folds from {n} rows")
    if k < 2:
        raise ValidationError("k must be at least 2")
    rng = np.random.default_rng(seed)

    folds: list[list[int]] = [[] for _ in range(k)]
    offset = 0
    for label in sorted(np.unique(y).tolist()):
        members = np.flatnonzero(y == label)
        shuffled = members[rng.permutation(len(members))]
        base, extras = divmod(len(members), k)
        position = 0
        for j in range(k):
            size = base + (1 if (j - offset) % k < extras else 0)
            folds[j].extend(shuffled[position : position + size].tolist())
            position += size
        offset = (offset + extras) % k

    pairs = []
    all_idx = np.arange(n)
    for j in range(k):
        val = np.sort(np.asarray(folds[j], dtype=int))
        train = np.setdiff1d(all_idx, val)
        pairs.append((train, val))
    return pairs


def kfold(data: Dataset, k: int = 5, seed: int = 0) -> list[tuple[Dataset, Dataset]]:
    """Stratified k-fold partition of a dataset into (train, validation) pairs."""
    return [
        (data.subset(train), data.subset(val))
        for train, val in stratified_kfold_indices(data.y, k, seed)
    ]
