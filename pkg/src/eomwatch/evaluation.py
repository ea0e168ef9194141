"""Confusion-matrix metrics, photo-interpretation statistics, cross-validation.

Class 1 (treated) is the positive class throughout. Degenerate 0/0 rates
follow the convention "0, with an explicit flag" so they are never silently
mistaken for real zeros.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import date
from typing import Callable, Sequence

import numpy as np

from .errors import ValidationError
from .features import FeatureVector, default_transform
from .geodata import EventSet, ParcelSet
from .models.config import ModelConfig, make_model
from .models.selection import stratified_kfold_indices


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def confusion(preds: Sequence[int], labels: Sequence[int]) -> ConfusionMatrix:
    """Standard binary counts with class 1 as positive."""
    preds = np.asarray(preds)
    labels = np.asarray(labels)
    if preds.shape != labels.shape:
        raise ValidationError(
            f"predictions ({preds.shape}) and labels ({labels.shape}) differ in length"
        )
    return ConfusionMatrix(
        tp=int(np.sum((preds == 1) & (labels == 1))),
        fp=int(np.sum((preds == 1) & (labels == 0))),
        tn=int(np.sum((preds == 0) & (labels == 0))),
        fn=int(np.sum((preds == 0) & (labels == 1))),
    )


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    degenerate: bool = False

    def as_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "degenerate": self.degenerate,
        }


def f1_score(precision: float, recall: float) -> float:
    """Harmonic mean of precision and recall; 0 when both are 0."""
    if precision + recall == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def precision_recall_f1(cm: ConfusionMatrix, positive_class: int = 1) -> ClassMetrics:
    """Precision/recall/F1 for the chosen positive class; 0/0 -> 0 + flag."""
    if positive_class == 1:
        tp, fp, fn = cm.tp, cm.fp, cm.fn
    elif positive_class == 0:
        tp, fp, fn = cm.tn, cm.fn, cm.fp
    else:
        raise ValidationError(f"positive_class must be 0 or 1, got {positive_class}")
    degenerate = (tp + fp == 0) or (tp + fn == 0)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    return ClassMetrics(precision, recall, f1_score(precision, recall), degenerate)


@dataclass(frozen=True)
class Annotation:
    """One photo-interpretation verdict for a treated parcel."""

    parcel_id: str
    change_visible: bool
    annotator: str
    timestamp: str


def latest_annotations(annotations: Sequence[Annotation]) -> dict[str, Annotation]:
    """Last verdict per parcel, in input (log) order: last write wins."""
    latest: dict[str, Annotation] = {}
    for a in annotations:
        latest[a.parcel_id] = a
    return latest


@dataclass(frozen=True)
class PhotoInterpStats:
    treated_count: int
    annotated_count: int
    visible_count: int
    recall: float | None  # visible / annotated; None when nothing is annotated
    coverage: float
    partial_coverage: bool

    def as_dict(self) -> dict:
        return {
            "treated": self.treated_count,
            "annotated": self.annotated_count,
            "visible": self.visible_count,
            "recall": self.recall,
            "recall_percent": None if self.recall is None else truncated_percent(self.recall),
            "coverage": self.coverage,
            "partial_coverage": self.partial_coverage,
        }


def truncated_percent(fraction: float, decimals: int = 2) -> float:
    """Percentage truncated (not rounded) to the given decimals.

    The published photo-interpretation recall of 49/97 reads 50.51%, which is
    the truncation of 50.5154...%; plain rounding would give 50.52. This
    helper is the display convention for that statistic; full precision is
    always stored alongside.
    """
    scale = 10 ** decimals
    return math.floor(fraction * 100.0 * scale) / scale


def photo_interp_recall(
    annotations: Sequence[Annotation], treated_ids: Sequence[str]
) -> PhotoInterpStats:
    """Fraction of annotated treated parcels with a visible change.

    At full coverage this equals visible/treated (the headline statistic);
    with unannotated treated parcels left, the recall is computed over the
    annotated subset and flagged as partial coverage. Annotations for parcels
    outside the treated set are rejected.
    """
    treated = set(treated_ids)
    latest = latest_annotations(annotations)
    unknown = sorted(set(latest) - treated)
    if unknown:
        raise ValidationError(
            f"annotations refer to non-treated parcels: {', '.join(unknown[:5])}"
        )
    annotated = len(latest)
    visible = sum(1 for a in latest.values() if a.change_visible)
    coverage = annotated / len(treated) if treated else 0.0
    return PhotoInterpStats(
        treated_count=len(treated),
        annotated_count=annotated,
        visible_count=visible,
        recall=visible / annotated if annotated else None,
        coverage=coverage,
        partial_coverage=annotated < len(treated),
    )


_SEASONS = {
    12: "winter", 1: "winter", 2: "winter",
    3: "spring", 4: "spring", 5: "spring",
    6: "summer", 7: "summer", 8: "summer",
    9: "autumn", 10: "autumn", 11: "autumn",
}
SEASON_ORDER = ("winter", "spring", "summer", "autumn")


def season_of(d: date) -> str:
    """Meteorological season: DJF winter, MAM spring, JJA summer, SON autumn."""
    return _SEASONS[d.month]


@dataclass(frozen=True)
class GroupShare:
    visible_pct: float
    not_visible_pct: float
    count: int

    def as_dict(self) -> dict:
        return {
            "visible_pct": self.visible_pct,
            "not_visible_pct": self.not_visible_pct,
            "count": self.count,
        }


@dataclass(frozen=True)
class DistributionTables:
    by_category: dict[str, GroupShare]
    by_season: dict[str, GroupShare]
    notes: tuple[str, ...]

    def as_dict(self) -> dict:
        return {
            "by_category": {k: v.as_dict() for k, v in self.by_category.items()},
            "by_season": {k: v.as_dict() for k, v in self.by_season.items()},
            "notes": list(self.notes),
        }


def _shares(groups: dict[str, list[bool]]) -> tuple[dict[str, GroupShare], list[str]]:
    tables: dict[str, GroupShare] = {}
    notes = []
    for name, verdicts in groups.items():
        if not verdicts:
            notes.append(f"group {name!r} omitted: no annotated parcels")
            continue
        visible = sum(verdicts)
        pct = 100.0 * visible / len(verdicts)
        tables[name] = GroupShare(pct, 100.0 - pct, len(verdicts))
    return tables, notes


def distribution_tables(
    annotations: Sequence[Annotation],
    parcels: ParcelSet,
    events: EventSet,
) -> DistributionTables:
    """Visible/not-visible percentages per crop category and per season.

    The season comes from the parcel's anchor (latest application) date.
    Every emitted row sums to 100%; empty groups are omitted with a note.
    """
    latest = latest_annotations(annotations)
    by_category: dict[str, list[bool]] = {}
    by_season: dict[str, list[bool]] = {s: [] for s in SEASON_ORDER}
    for pid, annotation in sorted(latest.items()):
        parcel = parcels[pid]
        anchor = events.latest_date(pid)
        if anchor is None:
            raise ValidationError(f"annotated parcel {pid} has no application events")
        by_category.setdefault(parcel.crop_category, []).append(annotation.change_visible)
        by_season[season_of(anchor)].append(annotation.change_visible)

    cat_tables, cat_notes = _shares(by_category)
    season_tables, season_notes = _shares(by_season)
    return DistributionTables(
        by_category=cat_tables,
        by_season=season_tables,
        notes=tuple(cat_notes + season_notes),
    )


@dataclass(frozen=True)
class FoldMetrics:
    """Per-class metrics of one evaluation (fold or holdout)."""

    per_class: dict[int, ClassMetrics]
    confusion_matrix: ConfusionMatrix

    def as_dict(self) -> dict:
        return {
            "class_0": self.per_class[0].as_dict(),
            "class_1": self.per_class[1].as_dict(),
            "confusion": {
                "tp": self.confusion_matrix.tp,
                "fp": self.confusion_matrix.fp,
                "tn": self.confusion_matrix.tn,
                "fn": self.confusion_matrix.fn,
            },
        }


def evaluate_predictions(preds, labels) -> FoldMetrics:
    cm = confusion(preds, labels)
    return FoldMetrics(
        per_class={0: precision_recall_f1(cm, 0), 1: precision_recall_f1(cm, 1)},
        confusion_matrix=cm,
    )


@dataclass(frozen=True)
class CVResult:
    folds: tuple[FoldMetrics, ...]
    mean: dict[int, ClassMetrics] = field(default_factory=dict)
    std: dict[int, ClassMetrics] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "folds": [f.as_dict() for f in self.folds],
            "mean": {f"class_{c}": m.as_dict() for c, m in self.mean.items()},
            "std": {f"class_{c}": m.as_dict() for c, m in self.std.items()},
        }


def _aggregate(folds: Sequence[FoldMetrics]) -> CVResult:
    mean: dict[int, ClassMetrics] = {}
    std: dict[int, ClassMetrics] = {}
    for c in (0, 1):
        p = np.array([f.per_class[c].precision for f in folds])
        r = np.array([f.per_class[c].recall for f in folds])
        f1 = np.array([f.per_class[c].f1 for f in folds])
        degenerate = any(f.per_class[c].degenerate for f in folds)
        mean[c] = ClassMetrics(float(p.mean()), float(r.mean()), float(f1.mean()), degenerate)
        std[c] = ClassMetrics(float(p.std()), float(r.std()), float(f1.std()), degenerate)
    return CVResult(folds=tuple(folds), mean=mean, std=std)


def cross_validate(
    model_kind: str | Callable[[], object],
    config: ModelConfig,
    feature_vectors: Sequence[FeatureVector],
    k: int = 5,
    seed: int = 0,
) -> CVResult:
    """Stratified k-fold CV over raw (pre-imputation) feature vectors.

    The imputation/standardization transform is refit inside each fold's
    training portion, so no statistics leak from the validation rows.
    ``model_kind`` is one of the registry kinds or, for testing, a callable
    returning an unfitted estimator.
    """
    X_raw = np.vstack([fv.full_vector() for fv in feature_vectors])
    y = np.asarray([fv.label for fv in feature_vectors], dtype=np.int64)

    folds = []
    for train_idx, val_idx in stratified_kfold_indices(y, k=k, seed=seed):
        transform = default_transform().fit(X_raw[train_idx])
        X_train = transform.transform(X_raw[train_idx])
        X_val = transform.transform(X_raw[val_idx])
        model = model_kind() if callable(model_kind) else make_model(model_kind, config)
        model.fit(X_train, y[train_idx])
        folds.append(evaluate_predictions(model.predict(X_val), y[val_idx]))
    return _aggregate(folds)
