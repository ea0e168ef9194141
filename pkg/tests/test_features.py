from datetime import date

import numpy as np
import pytest

from eomwatch.errors import UnusableParcelError, ValidationError
from eomwatch.features import (
    FEATURE_NAMES,
    N_FEATURES,
    N_SERIES_FEATURES,
    FeatureTransform,
    FeatureVector,
    IndexSeries,
    Observation,
    default_transform,
    extract_feature_table,
    extract_features,
    impute_and_standardize,
)
from eomwatch.geodata import ObservationWindow
from eomwatch.indices import SERIES_NAMES, IndexVector
from tests.test_geodata import make_parcel

ANCHOR = date(2023, 8, 1)
WINDOW = ObservationWindow("P1", ANCHOR)


def vector_with(**values) -> IndexVector:
    base = {name: None for name in SERIES_NAMES}
    base.update(values)
    return IndexVector(values=base)


def series_of(*observations) -> IndexSeries:
    return IndexSeries("P1", WINDOW, tuple(observations))


def obs(day_offset: int, **values) -> Observation:
    from datetime import timedelta

    return Observation(
        date=ANCHOR + timedelta(days=day_offset),
        vector=vector_with(**values),
        valid_fraction=1.0,
    )


def feature_value(fv: FeatureVector, name: str) -> float:
    return fv.full_vector()[FEATURE_NAMES.index(name)]


class TestExtractFeatures:
    def test_hand_computed_statistics(self):
        series = series_of(
            obs(-10, eomi2=0.10),
            obs(-5, eomi2=0.12),
            obs(0, eomi2=0.30),
            obs(5, eomi2=0.28),
        )
        fv = extract_features(series, make_parcel("P1"))
        assert feature_value(fv, "eomi2_mean_pre") == pytest.approx(0.11, abs=1e-12)
        assert feature_value(fv, "eomi2_mean_post") == pytest.approx(0.29, abs=1e-12)
        assert feature_value(fv, "eomi2_delta") == pytest.approx(0.18, abs=1e-12)
        assert feature_value(fv, "eomi2_std_post") == pytest.approx(0.01, abs=1e-12)

    def test_anchor_date_counts_as_post(self):
        series = series_of(obs(-1, ndvi=0.2), obs(0, ndvi=0.6))
        fv = extract_features(series, make_parcel("P1"))
        assert feature_value(fv, "ndvi_mean_post") == pytest.approx(0.6)
        assert feature_value(fv, "ndvi_mean_pre") == pytest.approx(0.2)

    def test_single_post_point_has_zero_std(self):
        series = series_of(obs(-3, ndvi=0.1), obs(2, ndvi=0.3))
        fv = extract_features(series, make_parcel("P1"))
        assert feature_value(fv, "ndvi_std_post") == 0.0

    def test_all_missing_index_gives_missing_statistics(self):
        series = series_of(obs(-3, ndvi=0.1), obs(2, ndvi=0.3))
        fv = extract_features(series, make_parcel("P1"))
        for stat in ("mean_pre", "mean_post", "delta", "std_post"):
            assert np.isnan(feature_value(fv, f"evi_{stat}"))

    def test_delta_is_exact_difference(self):
        series = series_of(obs(-7, nbr2=0.21), obs(-2, nbr2=0.17), obs(4, nbr2=0.33))
        fv = extract_features(series, make_parcel("P1"))
        delta = feature_value(fv, "nbr2_delta")
        pre = feature_value(fv, "nbr2_mean_pre")
        post = feature_value(fv, "nbr2_mean_post")
        assert delta == post - pre

    def test_unusable_when_one_sided(self):
        series = series_of(obs(1, ndvi=0.5), obs(2, ndvi=0.6))
        with pytest.raises(UnusableParcelError):
            extract_features(series, make_parcel("P1"))

    def test_vector_length_and_label(self):
        series = series_of(obs(-1, ndvi=0.2), obs(0, ndvi=0.6))
        fv = extract_features(series, make_parcel("P1", category="Cotton", treated=True))
        assert fv.full_vector().shape == (N_FEATURES,)
        assert N_FEATURES == 72 and N_SERIES_FEATURES == 68
        assert fv.label == 1
        assert fv.one_hot.tolist() == [0, 1, 0, 0]

    def test_missing_values_excluded_per_statistic(self):
        series = series_of(obs(-2, ndvi=0.4), obs(-1, ndvi=None), obs(3, ndvi=0.8))
        fv = extract_features(series, make_parcel("P1"))
        assert feature_value(fv, "ndvi_mean_pre") == pytest.approx(0.4)

    def test_scene_order_cannot_matter(self):
        # IndexSeries enforces strictly increasing dates, so any permutation
        # of the same observations builds back into the identical series.
        observations = [obs(-5, ndvi=0.2), obs(0, ndvi=0.4), obs(5, ndvi=0.6)]
        with pytest.raises(ValidationError):
            IndexSeries("P1", WINDOW, tuple(reversed(observations)))
        a = extract_features(series_of(*observations), make_parcel("P1"))
        b = extract_features(series_of(*observations), make_parcel("P1"))
        assert np.array_equal(a.full_vector(), b.full_vector(), equal_nan=True)


class TestExtractFeatureTable:
    def test_skip_records_are_explicit(self):
        usable = series_of(obs(-1, ndvi=0.2), obs(0, ndvi=0.6))
        one_sided = IndexSeries("P2", ObservationWindow("P2", ANCHOR),
                                (obs(3, ndvi=0.5),))
        parcels = [make_parcel("P1"), make_parcel("P2"), make_parcel("P3")]
        vectors, skipped = extract_feature_table(
            parcels, {"P1": usable, "P2": one_sided}
        )
        assert [fv.parcel_id for fv in vectors] == ["P1"]
        assert {s.parcel_id for s in skipped} == {"P2", "P3"}
        reasons = {s.parcel_id: s.reason for s in skipped}
        assert "anchor" in reasons["P2"]
        assert "series" in reasons["P3"]


class TestFeatureTransform:
    def test_median_imputation(self):
        train = np.array([[1.0], [2.0], [3.0]])
        transform = FeatureTransform().fit(train)
        out = transform.transform(np.array([[np.nan]]))
        # imputed train median 2.0, then standardized with train stats
        expected = (2.0 - 2.0) / np.std([1.0, 2.0, 3.0])
        assert out[0, 0] == pytest.approx(expected)

    def test_standardized_train_has_zero_mean_unit_std(self):
        rng = np.random.default_rng(0)
        train = rng.normal(5.0, 3.0, size=(50, 4))
        out = FeatureTransform().fit(train).transform(train)
        assert np.all(np.abs(out.mean(axis=0)) < 1e-9)
        assert np.all(np.abs(out.std(axis=0) - 1.0) < 1e-9)

    def test_constant_feature_passes_through(self):
        train = np.full((10, 1), 7.5)
        out = FeatureTransform().fit(train).transform(train)
        assert np.all(out == 7.5)

    def test_passthrough_columns_untouched(self):
        train = np.array([[1.0, 1.0], [3.0, 0.0], [5.0, 1.0]])
        transform = FeatureTransform(passthrough=np.array([False, True]))
        out = transform.fit(train).transform(train)
        assert out[:, 1].tolist() == [1.0, 0.0, 1.0]
        assert abs(out[:, 0].mean()) < 1e-12

    def test_parameters_depend_only_on_train(self):
        rng = np.random.default_rng(1)
        train = rng.normal(size=(30, 3))
        train[rng.uniform(size=train.shape) < 0.2] = np.nan
        a = FeatureTransform().fit(train)
        b = FeatureTransform().fit(train)
        assert np.array_equal(a.medians_, b.medians_)
        assert np.array_equal(a.means_, b.means_)
        assert np.array_equal(a.stds_, b.stds_)

    def test_all_missing_train_column_imputes_zero(self):
        train = np.full((5, 1), np.nan)
        transform = FeatureTransform().fit(train)
        out = transform.transform(np.array([[np.nan]]))
        assert out[0, 0] == 0.0

    def test_json_roundtrip(self, tmp_path):
        rng = np.random.default_rng(2)
        train = rng.normal(size=(20, 5))
        transform = default_transform_for(5).fit(train)
        transform.save(tmp_path / "t.json")
        loaded = FeatureTransform.load(tmp_path / "t.json")
        fresh = rng.normal(size=(4, 5))
        assert np.array_equal(transform.transform(fresh), loaded.transform(fresh))

    def test_unfitted_transform_refuses(self):
        with pytest.raises(ValidationError):
            FeatureTransform().transform(np.zeros((1, 1)))


def default_transform_for(n_cols: int) -> FeatureTransform:
    mask = np.zeros(n_cols, dtype=bool)
    return FeatureTransform(passthrough=mask)


class TestImputeAndStandardize:
    def make_fv(self, pid, fill, label=0):
        values = np.full(N_SERIES_FEATURES, fill)
        return FeatureVector(pid, values, np.array([1.0, 0, 0, 0]), label)

    def test_returns_transform_reusable_on_later_batches(self):
        train = [self.make_fv("A", 1.0), self.make_fv("B", 2.0), self.make_fv("C", 3.0)]
        later = [self.make_fv("D", np.nan)]
        train_mat, later_mat, transform = impute_and_standardize(train, later)
        assert train_mat.shape == (3, N_FEATURES)
        assert later_mat.shape == (1, N_FEATURES)
        again = transform.transform(np.vstack([fv.full_vector() for fv in later]))
        assert np.array_equal(later_mat, again)
        # one-hot block untouched
        assert train_mat[:, N_SERIES_FEATURES].tolist() == [1.0, 1.0, 1.0]

    def test_empty_train_is_an_error(self):
        with pytest.raises(ValidationError):
            impute_and_standardize([], [])
