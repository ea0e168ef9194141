"""Spectral indices for exogenous-organic-matter detection, plus aggregation.

Seven indices are computed from the six reflectance bands:

    eomi1 = (B11 - B8A) / (B11 + B8A)
    eomi2 = (B12 - B04) / (B12 + B04)
    eomi3 = ((B11 - B8A) + (B12 - B04)) / ((B11 + B8A) + (B12 + B04))
    eomi4 = (B11 - B04) / (B11 + B04)
    nbr2  = (B11 - B12) / (B11 + B12)
    ndvi  = (B08 - B04) / (B08 + B04)
    evi   = 2.5 * (B08 - B04) / (B08 + 6*B04 - 7.5*B02 + 1)

plus the ten ratios of each EOM index (eomi1..4, nbr2) over each vegetation
index (ndvi, evi). A value can be *missing* (None / NaN) when a denominator
guard trips; missing is an explicit state, never a silent zero.

Per-parcel aggregation computes every index per pixel first and then averages
over the parcel's valid pixels; the ratios are taken between the aggregated
indices. The order matters because the indices are nonlinear.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .raster import BAND_IDS

INDEX_NAMES = ("eomi1", "eomi2", "eomi3", "eomi4", "nbr2", "ndvi", "evi")
EOM_INDEX_NAMES = ("eomi1", "eomi2", "eomi3", "eomi4", "nbr2")
VEG_INDEX_NAMES = ("ndvi", "evi")
RATIO_NAMES = tuple(f"r_{e}_{v}" for e in EOM_INDEX_NAMES for v in VEG_INDEX_NAMES)
SERIES_NAMES = INDEX_NAMES + RATIO_NAMES  # the 17 per-parcel time series

#: EVI is dropped when |B08 + 6*B04 - 7.5*B02 + 1| falls below this.
EVI_DENOM_EPS = 1e-6
#: EOM/vegetation ratios are dropped when |vegetation index| falls below this.
RATIO_DENOM_MIN = 1e-3


@dataclass(frozen=True)
class BandSample:
    """Reflectance of the six bands at one pixel (or one aggregate)."""

    b02: float
    b04: float
    b08: float
    b8a: float
    b11: float
    b12: float


def _nd(a: float, b: float) -> float | None:
    denom = a + b
    if denom == 0:
        return None
    return (a - b) / denom


def eomi1(s: BandSample) -> float | None:
    """(B11 - B8A) / (B11 + B8A); None when the denominator is zero."""
    return _nd(s.b11, s.b8a)


def eomi2(s: BandSample) -> float | None:
    """(B12 - B04) / (B12 + B04); None when the denominator is zero."""
    return _nd(s.b12, s.b04)


def eomi3(s: BandSample) -> float | None:
    """Combined SWIR/red index; the mediant of eomi1 and eomi2."""
    denom = (s.b11 + s.b8a) + (s.b12 + s.b04)
    if denom == 0:
        return None
    return ((s.b11 - s.b8a) + (s.b12 - s.b04)) / denom


def eomi4(s: BandSample) -> float | None:
    """(B11 - B04) / (B11 + B04); None when the denominator is zero."""
    return _nd(s.b11, s.b04)


def nbr2(s: BandSample) -> float | None:
    """(B11 - B12) / (B11 + B12); None when the denominator is zero."""
    return _nd(s.b11, s.b12)


def ndvi(s: BandSample) -> float | None:
    """(B08 - B04) / (B08 + B04); None when the denominator is zero."""
    return _nd(s.b08, s.b04)


def evi(s: BandSample) -> float | None:
    """2.5 * (B08 - B04) / (B08 + 6*B04 - 7.5*B02 + 1).

    The +1 soil term makes EVI the one index here that is not invariant to
    scaling all bands. Denominators below EVI_DENOM_EPS in magnitude yield
    None.
    """
    denom = s.b08 + 6.0 * s.b04 - 7.5 * s.b02 + 1.0
    if abs(denom) < EVI_DENOM_EPS:
        return None
    return 2.5 * (s.b08 - s.b04) / denom


_INDEX_FUNCS = {
    "eomi1": eomi1,
    "eomi2": eomi2,
    "eomi3": eomi3,
    "eomi4": eomi4,
    "nbr2": nbr2,
    "ndvi": ndvi,
    "evi": evi,
}


def compute_indices(s: BandSample) -> dict[str, float | None]:
    """All seven indices for one band sample."""
    return {name: fn(s) for name, fn in _INDEX_FUNCS.items()}


def eom_veg_ratios(indices: dict[str, float | None]) -> dict[str, float | None]:
    """The ten EOM/vegetation ratios from already-computed indices.

    A ratio is present only when both operands are present and the vegetation
    index has magnitude >= RATIO_DENOM_MIN; otherwise it is missing (never
    clamped).
    """
    ratios: dict[str, float | None] = {}
    for e in EOM_INDEX_NAMES:
        for v in VEG_INDEX_NAMES:
            ev, vv = indices.get(e), indices.get(v)
            if ev is None or vv is None or abs(vv) < RATIO_DENOM_MIN:
                ratios[f"r_{e}_{v}"] = None
            else:
                ratios[f"r_{e}_{v}"] = ev / vv
    return ratios


@dataclass(frozen=True)
class IndexVector:
    """The 7 indices + 10 ratios of one parcel at one date; None = missing."""

    values: dict[str, float | None]

    def __post_init__(self):
        missing_keys = set(SERIES_NAMES) - set(self.values)
        if missing_keys:
            raise ValueError(f"IndexVector missing entries: {sorted(missing_keys)}")

    def get(self, name: str) -> float | None:
        return self.values[name]

    @classmethod
    def all_missing(cls) -> "IndexVector":
        return cls(values={name: None for name in SERIES_NAMES})


# --- grid (per-pixel, NaN-for-missing) versions used for aggregation/chips ---

def _nd_grid(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    denom = a + b
    out = np.full(np.broadcast(a, b).shape, np.nan)
    ok = denom != 0
    np.divide(a - b, denom, out=out, where=ok)
    return out


def index_grid(name: str, bands: dict[str, np.ndarray]) -> np.ndarray:
    """Per-pixel index values over band arrays; NaN where undefined."""
    b02, b04, b08 = bands["B02"], bands["B04"], bands["B08"]
    b8a, b11, b12 = bands["B8A"], bands["B11"], bands["B12"]
    if name == "eomi1":
        return _nd_grid(b11, b8a)
    if name == "eomi2":
        return _nd_grid(b12, b04)
    if name == "eomi3":
        denom = (b11 + b8a) + (b12 + b04)
        out = np.full(denom.shape, np.nan)
        np.divide((b11 - b8a) + (b12 - b04), denom, out=out, where=denom != 0)
        return out
    if name == "eomi4":
        return _nd_grid(b11, b04)
    if name == "nbr2":
        return _nd_grid(b11, b12)
    if name == "ndvi":
        return _nd_grid(b08, b04)
    if name == "evi":
        denom = b08 + 6.0 * b04 - 7.5 * b02 + 1.0
        out = np.full(denom.shape, np.nan)
        np.divide(2.5 * (b08 - b04), denom, out=out, where=np.abs(denom) >= EVI_DENOM_EPS)
        return out
    raise KeyError(f"unknown index {name!r}")


def parcel_index_vector(samples: dict[str, np.ndarray]) -> IndexVector:
    """Aggregate per-pixel indices over a parcel's valid pixels.

    Each of the seven indices is the arithmetic mean of its per-pixel values
    where defined (an index with no defined pixel is missing). The ten ratios
    are then computed from the aggregated indices. With zero valid pixels the
    whole vector is missing.
    """
    n = len(samples[BAND_IDS[0]]) if samples else 0
    if n == 0:
        return IndexVector.all_missing()

    values: dict[str, float | None] = {}
    for name in INDEX_NAMES:
        per_pixel = index_grid(name, samples)
        defined = per_pixel[~np.isnan(per_pixel)]
        values[name] = float(np.mean(defined)) if defined.size else None
    values.update(eom_veg_ratios(values))
    return IndexVector(values=values)
