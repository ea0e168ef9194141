"""Parcel geometries, application events, observation windows, pixel masks.

Parcels arrive as a GeoJSON FeatureCollection, application events as a CSV
with header ``parcel_id,application_date,quantity``. All geometry is assumed
to live in one shared projected CRS with coordinates in meters; reprojection
is out of scope.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path
from typing import Iterator

import numpy as np

from .errors import DataConsistencyError, EmptyMaskError, ParseError, ValidationError

CROP_CATEGORIES = ("Cereals", "Cotton", "IndustrialCrops", "LeguminousCrops")

#: Days before/after the anchor date covered by an observation window.
WINDOW_DAYS = 30

# A ring is a closed sequence of (x, y); a polygon is (exterior, *holes);
# a parcel geometry is one or more polygons (MultiPolygon => unioned mask).
Ring = tuple[tuple[float, float], ...]
Polygon = tuple[Ring, ...]


@dataclass(frozen=True)
class Parcel:
    """One agricultural parcel: geometry plus crop metadata and label."""

    parcel_id: str
    polygons: tuple[Polygon, ...]
    crop_code: str
    crop_category: str
    treated: bool

    def __post_init__(self):
        if self.crop_category not in CROP_CATEGORIES:
            raise ValidationError(
                f"parcel {self.parcel_id}: unknown crop_category "
                f"{self.crop_category!r} (expected one of {CROP_CATEGORIES})"
            )
        if not self.polygons:
            raise ParseError(f"parcel {self.parcel_id}: geometry has no polygons")
        for poly in self.polygons:
            if not poly:
                raise ParseError(f"parcel {self.parcel_id}: polygon has no rings")
            for ring in poly:
                if len(ring) < 4:
                    raise ParseError(
                        f"parcel {self.parcel_id}: ring has {len(ring)} points, need >= 4"
                    )
                if ring[0] != ring[-1]:
                    raise ParseError(
                        f"parcel {self.parcel_id}: ring is not closed (first != last)"
                    )

    def bounds(self) -> tuple[float, float, float, float]:
        """(min_x, min_y, max_x, max_y) over all rings."""
        xs = [p[0] for poly in self.polygons for ring in poly for p in ring]
        ys = [p[1] for poly in self.polygons for ring in poly for p in ring]
        return min(xs), min(ys), max(xs), max(ys)


class ParcelSet:
    """All parcels of one dataset, indexed by parcel_id."""

    def __init__(self, parcels: list[Parcel]):
        self._by_id: dict[str, Parcel] = {}
        for p in parcels:
            if p.parcel_id in self._by_id:
                raise ValidationError(f"duplicate parcel_id {p.parcel_id!r}")
            self._by_id[p.parcel_id] = p
        self._parcels = tuple(parcels)

    def __len__(self) -> int:
        return len(self._parcels)

    def __iter__(self) -> Iterator[Parcel]:
        return iter(self._parcels)

    def __contains__(self, parcel_id: str) -> bool:
        return parcel_id in self._by_id

    def __getitem__(self, parcel_id: str) -> Parcel:
        try:
            return self._by_id[parcel_id]
        except KeyError:
            raise KeyError(f"unknown parcel_id {parcel_id!r}") from None

    @property
    def n_treated(self) -> int:
        return sum(1 for p in self._parcels if p.treated)

    def treated(self) -> list[Parcel]:
        return [p for p in self._parcels if p.treated]


@dataclass(frozen=True)
class ApplicationEvent:
    """One digestate application on one parcel."""

    parcel_id: str
    application_date: date
    quantity: float

    def __post_init__(self):
        if self.quantity < 0:
            raise ValidationError(
                f"event for {self.parcel_id}: quantity must be >= 0, got {self.quantity}"
            )


class EventSet:
    """Application events grouped by parcel, dates ascending within a parcel."""

    def __init__(self, events: list[ApplicationEvent]):
        by_parcel: dict[str, list[ApplicationEvent]] = {}
        for ev in events:
            by_parcel.setdefault(ev.parcel_id, []).append(ev)
        for evs in by_parcel.values():
            evs.sort(key=lambda e: e.application_date)
        self._by_parcel = {pid: tuple(evs) for pid, evs in by_parcel.items()}
        self._n = len(events)

    def __len__(self) -> int:
        return self._n

    @property
    def parcel_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self._by_parcel))

    def for_parcel(self, parcel_id: str) -> tuple[ApplicationEvent, ...]:
        return self._by_parcel.get(parcel_id, ())

    def latest_date(self, parcel_id: str) -> date | None:
        evs = self._by_parcel.get(parcel_id)
        return evs[-1].application_date if evs else None


@dataclass(frozen=True)
class ObservationWindow:
    """The +-30-day span around a parcel's anchor date (61 days inclusive)."""

    parcel_id: str
    anchor_date: date
    days: int = WINDOW_DAYS

    @property
    def start(self) -> date:
        return self.anchor_date - timedelta(days=self.days)

    @property
    def end(self) -> date:
        return self.anchor_date + timedelta(days=self.days)

    def contains(self, d: date) -> bool:
        return self.start <= d <= self.end


def load_parcels(path: str | Path) -> ParcelSet:
    """Load a GeoJSON FeatureCollection of parcels.

    Each feature must carry properties ``parcel_id``, ``crop_code``,
    ``crop_category`` and ``treated`` (bool or 0/1) and a Polygon or
    MultiPolygon geometry. Duplicate parcel_ids are rejected.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read parcel file {path}: {exc}") from exc
    if doc.get("type") != "FeatureCollection":
        raise ParseError(f"{path}: expected a GeoJSON FeatureCollection")

    parcels = []
    for i, feature in enumerate(doc.get("features", [])):
        props = feature.get("properties") or {}
        pid = props.get("parcel_id")
        if not pid:
            raise ParseError(f"{path}: feature #{i} has no parcel_id")
        geometry = feature.get("geometry") or {}
        polygons = _geojson_polygons(geometry, str(pid))
        treated = props.get("treated")
        if treated not in (0, 1, True, False):
            raise ValidationError(
                f"parcel {pid}: treated must be a boolean or 0/1, got {treated!r}"
            )
        parcels.append(
            Parcel(
                parcel_id=str(pid),
                polygons=polygons,
                crop_code=str(props.get("crop_code", "")),
                crop_category=props.get("crop_category", ""),
                treated=bool(treated),
            )
        )
    return ParcelSet(parcels)


def _geojson_polygons(geometry: dict, parcel_id: str) -> tuple[Polygon, ...]:
    gtype = geometry.get("type")
    coords = geometry.get("coordinates")
    if gtype == "Polygon":
        raw_polys = [coords]
    elif gtype == "MultiPolygon":
        raw_polys = coords
    else:
        raise ParseError(f"parcel {parcel_id}: unsupported geometry type {gtype!r}")
    if not isinstance(raw_polys, list) or not raw_polys:
        raise ParseError(f"parcel {parcel_id}: malformed coordinates")
    polygons = []
    for poly in raw_polys:
        if not isinstance(poly, list) or not poly:
            raise ParseError(f"parcel {parcel_id}: malformed polygon")
        rings = []
        for ring in poly:
            try:
                rings.append(tuple((float(x), float(y)) for x, y in ring))
            except (TypeError, ValueError) as exc:
                raise ParseError(f"parcel {parcel_id}: malformed ring: {exc}") from exc
        polygons.append(tuple(rings))
    return tuple(polygons)


def load_events(path: str | Path) -> EventSet:
    """Load the application-event CSV (``parcel_id,application_date,quantity``)."""
    path = Path(path)
    events = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        expected = ["parcel_id", "application_date", "quantity"]
        if reader.fieldnames != expected:
            raise ParseError(
                f"{path}: expected header {','.join(expected)}, got {reader.fieldnames}"
            )
        for rownum, row in enumerate(reader, start=2):
            try:
                when = date.fromisoformat(row["application_date"].strip())
            except ValueError as exc:
                raise ParseError(f"{path} row {rownum}: bad date: {exc}") from exc
            try:
                quantity = float(row["quantity"])
            except ValueError as exc:
                raise ParseError(f"{path} row {rownum}: bad quantity: {exc}") from exc
            try:
                events.append(ApplicationEvent(row["parcel_id"].strip(), when, quantity))
            except ValidationError as exc:
                raise ValidationError(f"{path} row {rownum}: {exc}") from exc
    return EventSet(events)


def category_median_dates(parcels: ParcelSet, events: EventSet) -> dict[str, date]:
    """Median anchor (latest-event) date of treated parcels per crop category.

    Categories without any treated parcel fall back to the global median so
    control parcels of such categories still receive a window. The median of
    an even-sized sample is the lower of the two central dates (deterministic).
    """
    anchors_by_cat: dict[str, list[date]] = {c: [] for c in CROP_CATEGORIES}
    all_anchors: list[date] = []
    for parcel in parcels.treated():
        latest = events.latest_date(parcel.parcel_id)
        if latest is None:
            raise DataConsistencyError(
                f"treated parcel {parcel.parcel_id} has no application events"
            )
        anchors_by_cat[parcel.crop_category].append(latest)
        all_anchors.append(latest)
    if not all_anchors:
        raise DataConsistencyError("no treated parcels with events; cannot anchor controls")

    def lower_median(dates: list[date]) -> date:
        ordered = sorted(dates)
        return ordered[(len(ordered) - 1) // 2]

    global_median = lower_median(all_anchors)
    return {
        cat: lower_median(dates) if dates else global_median
        for cat, dates in anchors_by_cat.items()
    }


def assign_window(
    parcel: Parcel,
    events: EventSet,
    category_medians: dict[str, date],
    window_days: int = WINDOW_DAYS,
) -> ObservationWindow:
    """Anchor a parcel's observation window.

    Treated parcels anchor at their latest application date; controls anchor
    at the median treatment date of their crop category, which keeps window
    placement independent of the label.
    """
    if parcel.treated:
        anchor = events.latest_date(parcel.parcel_id)
        if anchor is None:
            raise DataConsistencyError(
                f"treated parcel {parcel.parcel_id} has no application events"
            )
    else:
        try:
            anchor = category_medians[parcel.crop_category]
        except KeyError:
            raise DataConsistencyError(
                f"no median anchor date for category {parcel.crop_category!r}"
            ) from None
    return ObservationWindow(parcel.parcel_id, anchor, days=window_days)


@dataclass(frozen=True)
class PixelMask:
    """Boolean membership bitmap of a parcel on a raster grid."""

    bitmap: np.ndarray  # bool, shape (height, width)
    origin_x: float
    origin_y: float
    pixel_size: float
    pixel_count: int = field(default=0)

    def __post_init__(self):
        object.__setattr__(self, "pixel_count", int(self.bitmap.sum()))

    def grid_signature(self) -> tuple:
        return (self.origin_x, self.origin_y, self.pixel_size, self.bitmap.shape)


def _evenodd_inside(poly: Polygon, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Vectorized even-odd point-in-polygon test over a meshgrid of centers."""
    inside = np.zeros(ys.shape[0:1] + xs.shape[-1:], dtype=bool)
    px = xs[np.newaxis, :]
    py = ys[:, np.newaxis]
    for ring in poly:
        pts = np.asarray(ring, dtype=float)
        x1, y1 = pts[:-1, 0], pts[:-1, 1]
        x2, y2 = pts[1:, 0], pts[1:, 1]
        for i in range(len(x1)):
            if y1[i] == y2[i]:
                continue  # horizontal edges never cross the ray
            crosses = (y1[i] > py) != (y2[i] > py)
            x_at = x1[i] + (py - y1[i]) * (x2[i] - x1[i]) / (y2[i] - y1[i])
            inside ^= crosses & (px < x_at)
    return inside


def rasterize_parcel(
    parcel: Parcel,
    origin_x: float,
    origin_y: float,
    pixel_size: float,
    width: int,
    height: int,
) -> PixelMask:
    """Rasterize a parcel: a pixel is set iff its center is inside the polygon.

    Uses the even-odd rule, so holes punch out and multi-polygons union.
    The grid origin is the top-left corner; rows grow southwards.
    """
    if pixel_size <= 0:
        raise ValidationError(f"pixel_size must be positive, got {pixel_size}")
    min_x, min_y, max_x, max_y = parcel.bounds()
    # Restrict the test to rows/cols whose centers can fall inside the bbox.
    col_lo = max(0, int(np.floor((min_x - origin_x) / pixel_size - 0.5)))
    col_hi = min(width, int(np.ceil((max_x - origin_x) / pixel_size + 0.5)))
    row_lo = max(0, int(np.floor((origin_y - max_y) / pixel_size - 0.5)))
    row_hi = min(height, int(np.ceil((origin_y - min_y) / pixel_size + 0.5)))

    bitmap = np.zeros((height, width), dtype=bool)
    if col_lo < col_hi and row_lo < row_hi:
        xs = origin_x + (np.arange(col_lo, col_hi) + 0.5) * pixel_size
        ys = origin_y - (np.arange(row_lo, row_hi) + 0.5) * pixel_size
        inside = np.zeros((len(ys), len(xs)), dtype=bool)
        for poly in parcel.polygons:
            inside |= _evenodd_inside(poly, xs, ys)
        bitmap[row_lo:row_hi, col_lo:col_hi] = inside

    mask = PixelMask(bitmap=bitmap, origin_x=origin_x, origin_y=origin_y, pixel_size=pixel_size)
    if mask.pixel_count == 0:
        raise EmptyMaskError(
            f"parcel {parcel.parcel_id}: no pixel centers fall inside the polygon"
        )
    return mask


def one_hot_crop(category: str) -> np.ndarray:
    """One-hot encode a crop category in the fixed CROP_CATEGORIES order."""
    if category not in CROP_CATEGORIES:
        raise ValidationError(f"unknown crop_category {category!r}")
    vec = np.zeros(len(CROP_CATEGORIES))
    vec[CROP_CATEGORIES.index(category)] = 1.0
    return vec
