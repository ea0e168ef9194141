"""Per-parcel index time series and their reduction to fixed-length features.

Each of the 17 index series (7 indices + 10 ratios) is reduced to four
statistics around the anchor date:

    mean_pre   mean over observations dated strictly before the anchor
    mean_post  mean over observations dated on or after the anchor
    delta      mean_post - mean_pre
    std_post   population standard deviation of the post values

giving 68 numeric features, followed by the 4 one-hot crop-category
components: 72 features total. Missing observations are excluded from each
statistic; a statistic with no contributing points is missing and later
imputed by the fitted :class:`FeatureTransform`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import date
from pathlib import Path

import numpy as np

from .errors import UnusableParcelError, ValidationError
from .geodata import CROP_CATEGORIES, ObservationWindow, Parcel, PixelMask, one_hot_crop
from .indices import SERIES_NAMES, IndexVector, parcel_index_vector
from .raster import Scene, parcel_band_values, scl_valid_mask

STAT_NAMES = ("mean_pre", "mean_post", "delta", "std_post")
FEATURE_NAMES = tuple(
    f"{series}_{stat}" for series in SERIES_NAMES for stat in STAT_NAMES
) + tuple(f"crop_{c}" for c in CROP_CATEGORIES)
N_SERIES_FEATURES = len(SERIES_NAMES) * len(STAT_NAMES)  # 68
N_FEATURES = len(FEATURE_NAMES)  # 72

#: Observations keeping less than this fraction of parcel pixels are dropped.
DEFAULT_VALID_FRACTION_MIN = 0.5


@dataclass(frozen=True)
class Observation:
    """One dated index vector of one parcel."""

    date: date
    vector: IndexVector
    valid_fraction: float


@dataclass(frozen=True)
class IndexSeries:
    """Chronological in-window observations of one parcel."""

    parcel_id: str
    window: ObservationWindow
    observations: tuple[Observation, ...]

    def __post_init__(self):
        dates = [o.date for o in self.observations]
        if any(b <= a for a, b in zip(dates, dates[1:])):
            raise ValidationError(f"series {self.parcel_id}: dates not strictly increasing")
        if any(not self.window.contains(d) for d in dates):
            raise ValidationError(f"series {self.parcel_id}: observation outside window")

    def __len__(self) -> int:
        return len(self.observations)


def build_series(
    parcel: Parcel,
    window: ObservationWindow,
    scenes: list[Scene],
    parcel_mask: PixelMask,
    valid_fraction_min: float = DEFAULT_VALID_FRACTION_MIN,
) -> IndexSeries:
    """Extract a parcel's index series from already window/cloud-filtered scenes.

    Observations whose valid-pixel fraction falls below ``valid_fraction_min``
    are dropped. The result may be empty.
    """
    observations = []
    for scene in sorted(scenes, key=lambda s: s.acquisition_date):
        valid = scl_valid_mask(scene)
        samples = parcel_band_values(scene, parcel_mask, valid)
        if samples.valid_fraction < valid_fraction_min:
            continue
        observations.append(
            Observation(
                date=scene.acquisition_date,
                vector=parcel_index_vector(samples.samples),
                valid_fraction=samples.valid_fraction,
            )
        )
    return IndexSeries(parcel.parcel_id, window, tuple(observations))


@dataclass(frozen=True)
class FeatureVector:
    """One parcel's features: 68 series statistics + 4 one-hot + label."""

    parcel_id: str
    values: np.ndarray  # shape (68,), NaN = missing
    one_hot: np.ndarray  # shape (4,)
    label: int

    def full_vector(self) -> np.ndarray:
        return np.concatenate([self.values, self.one_hot])


@dataclass(frozen=True)
class SkipRecord:
    """Why a parcel produced no feature vector (reported, never silent)."""

    parcel_id: str
    reason: str


def _series_stats(dates: list[date], values: list[float | None], anchor: date) -> list[float]:
    pre = [v for d, v in zip(dates, values) if d < anchor and v is not None]
    post = [v for d, v in zip(dates, values) if d >= anchor and v is not None]
    mean_pre = float(np.mean(pre)) if pre else np.nan
    mean_post = float(np.mean(post)) if post else np.nan
    delta = mean_post - mean_pre  # NaN propagates when either side is missing
    std_post = float(np.std(post)) if post else np.nan  # population form; 0 for n=1
    return [mean_pre, mean_post, delta, std_post]


def extract_features(series: IndexSeries, parcel: Parcel) -> FeatureVector:
    """Reduce one parcel's series to its feature vector.

    Raises UnusableParcelError when no index has at least one observation on
    each side of the anchor; scene-order permutations cannot change the result
    because the series is date-sorted by construction.
    """
    anchor = series.window.anchor_date
    dates = [o.date for o in series.observations]

    stats: list[float] = []
    usable = False
    for name in SERIES_NAMES:
        values = [o.vector.get(name) for o in series.observations]
        four = _series_stats(dates, values, anchor)
        if not (np.isnan(four[0]) or np.isnan(four[1])):
            usable = True
        stats.extend(four)
    if not usable:
        raise UnusableParcelError(
            series.parcel_id,
            "no index has observations on both sides of the anchor date",
        )
    return FeatureVector(
        parcel_id=series.parcel_id,
        values=np.asarray(stats),
        one_hot=one_hot_crop(parcel.crop_category),
        label=int(parcel.treated),
    )


def extract_feature_table(
    parcels: list[Parcel],
    series_by_id: dict[str, IndexSeries],
) -> tuple[list[FeatureVector], list[SkipRecord]]:
    """Feature vectors for all parcels, with explicit skip records."""
    vectors: list[FeatureVector] = []
    skipped: list[SkipRecord] = []
    for parcel in parcels:
        series = series_by_id.get(parcel.parcel_id)
        if series is None:
            skipped.append(SkipRecord(parcel.parcel_id, "no extracted series"))
            continue
        try:
            vectors.append(extract_features(series, parcel))
        except UnusableParcelError as exc:
            skipped.append(SkipRecord(parcel.parcel_id, exc.reason))
    return vectors, skipped


class FeatureTransform:
    """Median imputation followed by z-score standardization, fit on train only.

    Sklearn-style: ``fit`` learns per-feature medians, means and standard
    deviations from the training matrix; ``transform`` applies them to any
    matrix with the same columns. Columns marked as passthrough (the one-hot
    block by default) are never touched, and near-constant columns
    (std < 1e-12) skip scaling entirely so constant features stay constant.
    """

    STD_EPS = 1e-12

    def __init__(self, passthrough: np.ndarray | None = None):
        self.passthrough = passthrough

    def get_params(self, deep: bool = True) -> dict:
        return {"passthrough": self.passthrough}

    def fit(self, X: np.ndarray) -> "FeatureTransform":
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[0] == 0:
            raise ValidationError("fit requires a nonempty 2-D matrix")
        n_cols = X.shape[1]
        mask = (
            np.zeros(n_cols, dtype=bool)
            if self.passthrough is None
            else np.asarray(self.passthrough, dtype=bool)
        )
        if mask.shape != (n_cols,):
            raise ValidationError("passthrough mask length does not match columns")

        medians = np.zeros(n_cols)
        for j in range(n_cols):
            col = X[:, j]
            finite = col[~np.isnan(col)]
            # An all-missing training column has no median; impute 0.
            medians[j] = float(np.median(finite)) if finite.size else 0.0

        imputed = np.where(np.isnan(X), medians, X)
        means = imputed.mean(axis=0)
        stds = imputed.std(axis=0)
        scale = ~mask & (stds >= self.STD_EPS)

        self.medians_ = medians
        self.means_ = means
        self.stds_ = stds
        self.scale_mask_ = scale
        self.passthrough_mask_ = mask
        self.n_features_ = n_cols
        return self

    def transform(self, X: np.ndarray) -> np.ndarray:
        if not hasattr(self, "medians_"):
            raise ValidationError("FeatureTransform is not fitted")
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features_:
            raise ValidationError(
                f"transform expects {self.n_features_} columns, got {X.shape}"
            )
        out = np.where(np.isnan(X), self.medians_, X)
        s = self.scale_mask_
        out[:, s] = (out[:, s] - self.means_[s]) / self.stds_[s]
        return out

    def fit_transform(self, X: np.ndarray) -> np.ndarray:
        return self.fit(X).transform(X)

    def to_dict(self) -> dict:
        return {
            "medians": self.medians_.tolist(),
            "means": self.means_.tolist(),
            "stds": self.stds_.tolist(),
            "scale_mask": self.scale_mask_.astype(int).tolist(),
            "passthrough_mask": self.passthrough_mask_.astype(int).tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureTransform":
        t = cls(passthrough=np.asarray(d["passthrough_mask"], dtype=bool))
        t.medians_ = np.asarray(d["medians"], dtype=float)
        t.means_ = np.asarray(d["means"], dtype=float)
        t.stds_ = np.asarray(d["stds"], dtype=float)
        t.scale_mask_ = np.asarray(d["scale_mask"], dtype=bool)
        t.passthrough_mask_ = np.asarray(d["passthrough_mask"], dtype=bool)
        t.n_features_ = len(t.medians_)
        return t

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "FeatureTransform":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def default_transform() -> FeatureTransform:
    """Transform for the standard 72-column layout (one-hot block passthrough)."""
    mask = np.zeros(N_FEATURES, dtype=bool)
    mask[N_SERIES_FEATURES:] = True
    return FeatureTransform(passthrough=mask)


def impute_and_standardize(
    train: list[FeatureVector],
    apply_to: list[FeatureVector],
) -> tuple[np.ndarray, np.ndarray, FeatureTransform]:
    """Fit the standard transform on `train`, apply it to both lists."""
    if not train:
        raise ValidationError("impute_and_standardize requires a nonempty training list")
    transform = default_transform()
    train_mat = np.vstack([fv.full_vector() for fv in train])
    transform.fit(train_mat)
    applied = (
        transform.transform(np.vstack([fv.full_vector() for fv in apply_to]))
        if apply_to
        else np.empty((0, N_FEATURES))
    )
    return transform.transform(train_mat), applied, transform
