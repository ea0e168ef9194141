from datetime import date

import numpy as np
import pytest
from hypothesis import given, strategies as st

from eomwatch.errors import ValidationError
from eomwatch.evaluation import (
    Annotation,
    ClassMetrics,
    ConfusionMatrix,
    confusion,
    cross_validate,
    distribution_tables,
    f1_score,
    latest_annotations,
    photo_interp_recall,
    precision_recall_f1,
    season_of,
    truncated_percent,
)
from eomwatch.features import N_SERIES_FEATURES, FeatureVector
from eomwatch.geodata import ApplicationEvent, EventSet, ParcelSet
from eomwatch.models.config import ModelConfig
from tests.test_geodata import make_parcel


def annotation(pid, visible, annotator="ann", ts="2024-01-01T00:00:00"):
    return Annotation(pid, visible, annotator, ts)


class TestConfusion:
    def test_counting_example(self):
        cm = confusion([1, 0, 1], [1, 0, 0])
        assert (cm.tp, cm.tn, cm.fp, cm.fn) == (1, 1, 1, 0)
        assert cm.total == 3

    def test_perfect_predictions(self):
        cm = confusion([1, 0, 1, 0], [1, 0, 1, 0])
        assert cm.fp == 0 and cm.fn == 0

    def test_all_wrong(self):
        cm = confusion([1, 0], [0, 1])
        assert cm.tp == 0 and cm.tn == 0

    def test_length_mismatch(self):
        with pytest.raises(ValidationError):
            confusion([1, 0], [1])


class TestPrecisionRecallF1:
    def test_table_anchor_class1(self):
        # published Random Forest class-1 row: precision 0.80, recall 0.44
        assert f1_score(0.80, 0.44) == pytest.approx(0.704 / 1.24, abs=1e-12)
        assert round(f1_score(0.80, 0.44), 2) == 0.57  # published F1

    def test_table_anchor_class0(self):
        # published Random Forest class-0 row: precision 0.78, recall 0.95
        assert f1_score(0.78, 0.95) == pytest.approx(1.482 / 1.73, abs=1e-12)

    def test_degenerate_zero_counts(self):
        metrics = precision_recall_f1(ConfusionMatrix(tp=0, fp=0, tn=5, fn=0))
        assert (metrics.precision, metrics.recall, metrics.f1) == (0.0, 0.0, 0.0)
        assert metrics.degenerate

    def test_swapping_positive_class_transforms_consistently(self):
        cm = ConfusionMatrix(tp=7, fp=3, tn=11, fn=2)
        m1 = precision_recall_f1(cm, positive_class=1)
        m0 = precision_recall_f1(cm, positive_class=0)
        assert m1.precision == 7 / 10 and m1.recall == 7 / 9
        assert m0.precision == 11 / 13 and m0.recall == 11 / 14

    def test_counts_to_metrics(self):
        cm = confusion([1, 1, 0, 0, 1], [1, 0, 0, 1, 1])
        metrics = precision_recall_f1(cm)
        assert metrics.precision == pytest.approx(2 / 3)
        assert metrics.recall == pytest.approx(2 / 3)

    @given(
        st.integers(min_value=0, max_value=50),
        st.integers(min_value=0, max_value=50),
        st.integers(min_value=0, max_value=50),
        st.integers(min_value=0, max_value=50),
    )
    def test_f1_between_precision_and_recall(self, tp, fp, tn, fn):
        metrics = precision_recall_f1(ConfusionMatrix(tp, fp, tn, fn))
        if metrics.precision + metrics.recall > 0:
            assert min(metrics.precision, metrics.recall) - 1e-12 <= metrics.f1
            assert metrics.f1 <= max(metrics.precision, metrics.recall) + 1e-12
        assert 0.0 <= metrics.f1 <= 1.0


class TestPhotoInterpretation:
    treated = [f"T{i}" for i in range(97)]

    def test_paper_value_49_of_97(self):
        annotations = [annotation(f"T{i}", i >= 48) for i in range(97)]
        stats = photo_interp_recall(annotations, self.treated)
        assert stats.visible_count == 49
        assert stats.recall == 49 / 97
        assert truncated_percent(stats.recall) == 50.51  # published display form
        assert not stats.partial_coverage

    def test_all_visible(self):
        annotations = [annotation(pid, True) for pid in self.treated]
        assert photo_interp_recall(annotations, self.treated).recall == 1.0

    def test_none_visible(self):
        annotations = [annotation(pid, False) for pid in self.treated]
        assert photo_interp_recall(annotations, self.treated).recall == 0.0

    def test_partial_coverage_flagged(self):
        annotations = [annotation("T0", True), annotation("T1", False)]
        stats = photo_interp_recall(annotations, self.treated)
        assert stats.partial_coverage
        assert stats.recall == 0.5  # over the annotated subset
        assert stats.coverage == pytest.approx(2 / 97)

    def test_zero_annotations(self):
        stats = photo_interp_recall([], self.treated)
        assert stats.recall is None
        assert stats.coverage == 0.0

    def test_latest_annotation_wins(self):
        annotations = [annotation("T0", False), annotation("T0", True)]
        stats = photo_interp_recall(annotations, self.treated)
        assert stats.visible_count == 1
        assert stats.annotated_count == 1

    def test_idempotent_reannotation(self):
        once = [annotation("T0", True)]
        twice = once + [annotation("T0", True)]
        a = photo_interp_recall(once, self.treated)
        b = photo_interp_recall(twice, self.treated)
        assert a.visible_count == b.visible_count
        assert a.annotated_count == b.annotated_count

    def test_order_invariance_of_distinct_parcels(self):
        forward = [annotation("T0", True), annotation("T1", False)]
        backward = list(reversed(forward))
        assert (
            photo_interp_recall(forward, self.treated).visible_count
            == photo_interp_recall(backward, self.treated).visible_count
        )

    def test_control_annotations_rejected(self):
        with pytest.raises(ValidationError, match="non-treated"):
            photo_interp_recall([annotation("C1", True)], self.treated)

    def test_latest_annotations_uses_log_order(self):
        log = [annotation("T0", False, ts="b"), annotation("T0", True, ts="a")]
        assert latest_annotations(log)["T0"].change_visible is True


class TestSeasons:
    def test_paper_august_date_is_summer(self):
        assert season_of(date(2023, 8, 28)) == "summer"

    @pytest.mark.parametrize(
        "month,season",
        [(12, "winter"), (1, "winter"), (2, "winter"), (3, "spring"), (5, "spring"),
         (6, "summer"), (8, "summer"), (9, "autumn"), (11, "autumn")],
    )
    def test_meteorological_boundaries(self, month, season):
        assert season_of(date(2023, month, 15)) == season


def build_parcels_and_events(entries):
    """entries: list of (pid, category, anchor_date)."""
    parcels = [make_parcel(pid, category=cat, treated=True) for pid, cat, _ in entries]
    events = EventSet(
        [ApplicationEvent(pid, anchor, 1.0) for pid, _, anchor in entries]
    )
    return ParcelSet(parcels), events


class TestDistributionTables:
    def test_even_group(self):
        parcels, events = build_parcels_and_events(
            [(f"P{i}", "Cotton", date(2023, 8, 1)) for i in range(4)]
        )
        annotations = [annotation(f"P{i}", i < 2) for i in range(4)]
        tables = distribution_tables(annotations, parcels, events)
        assert tables.by_category["Cotton"].visible_pct == 50.0
        assert tables.by_category["Cotton"].not_visible_pct == 50.0

    def test_single_parcel_group(self):
        parcels, events = build_parcels_and_events([("P1", "Cereals", date(2023, 8, 1))])
        tables = distribution_tables([annotation("P1", True)], parcels, events)
        assert tables.by_category["Cereals"].visible_pct == 100.0
        assert tables.by_category["Cereals"].not_visible_pct == 0.0

    def test_rows_sum_to_100(self):
        parcels, events = build_parcels_and_events(
            [("P1", "Cereals", date(2023, 2, 1)), ("P2", "Cereals", date(2023, 2, 1)),
             ("P3", "Cotton", date(2023, 8, 1))]
        )
        annotations = [annotation("P1", True), annotation("P2", False),
                       annotation("P3", True)]
        tables = distribution_tables(annotations, parcels, events)
        for share in list(tables.by_category.values()) + list(tables.by_season.values()):
            assert share.visible_pct + share.not_visible_pct == pytest.approx(100.0, abs=0.01)

    def test_empty_groups_omitted_with_note(self):
        parcels, events = build_parcels_and_events([("P1", "Cotton", date(2023, 8, 1))])
        tables = distribution_tables([annotation("P1", True)], parcels, events)
        assert "summer" in tables.by_season
        assert "winter" not in tables.by_season
        assert any("winter" in note for note in tables.notes)

    def test_season_grouping_uses_anchor(self):
        parcels, events = build_parcels_and_events(
            [("P1", "Cotton", date(2023, 2, 10)), ("P2", "Cotton", date(2023, 8, 28))]
        )
        annotations = [annotation("P1", True), annotation("P2", False)]
        tables = distribution_tables(annotations, parcels, events)
        assert tables.by_season["winter"].visible_pct == 100.0
        assert tables.by_season["summer"].visible_pct == 0.0


class ConstantClassifier:
    """Always predicts class 1; for fold-invariance tests."""

    def fit(self, X, y):
        return self

    def predict(self, X):
        return np.ones(len(X), dtype=int)


def make_feature_vectors(n, seed=0, separable=False):
    rng = np.random.default_rng(seed)
    vectors = []
    for i in range(n):
        label = i % 2
        values = rng.normal(size=N_SERIES_FEATURES)
        if separable:
            values = values * 0.01 + (3.0 if label else -3.0)
        vectors.append(
            FeatureVector(f"P{i}", values, np.array([1.0, 0, 0, 0]), label)
        )
    return vectors


class TestCrossValidate:
    def test_constant_model_identical_folds(self):
        vectors = make_feature_vectors(100)  # 50/50, folds of 10+10
        result = cross_validate(ConstantClassifier, ModelConfig(), vectors, k=5, seed=0)
        f1s = [f.per_class[1].f1 for f in result.folds]
        assert len(set(f1s)) == 1
        assert result.std[1].f1 == 0.0
        assert result.std[1].precision == 0.0

    def test_perfect_on_separable_data(self):
        vectors = make_feature_vectors(60, seed=1, separable=True)
        result = cross_validate("rf", ModelConfig(seed=0), vectors, k=5, seed=0)
        assert result.mean[0].f1 == 1.0
        assert result.mean[1].f1 == 1.0

    def test_metrics_within_bounds(self):
        vectors = make_feature_vectors(40, seed=2)
        result = cross_validate("knn", ModelConfig(), vectors, k=5, seed=3)
        for fold in result.folds:
            for cls in (0, 1):
                m = fold.per_class[cls]
                assert 0.0 <= m.precision <= 1.0
                assert 0.0 <= m.recall <= 1.0
                assert 0.0 <= m.f1 <= 1.0

    def test_transform_refit_inside_folds(self):
        # A NaN-bearing feature must be imputed from fold-train medians only;
        # cross_validate must not crash and must produce five folds.
        vectors = make_feature_vectors(30, seed=3)
        dirty = []
        for i, fv in enumerate(vectors):
            values = fv.values.copy()
            if i % 3 == 0:
                values[5] = np.nan
            dirty.append(FeatureVector(fv.parcel_id, values, fv.one_hot, fv.label))
        result = cross_validate("knn", ModelConfig(), dirty, k=5, seed=0)
        assert len(result.folds) == 5
