"""Deterministic synthetic corpus: parcels, events, scenes with a known response.

Treated parcels darken after their application date: the visible bands
(B02/B04) drop to ``visible_dip`` of their base reflectance and the SWIR
bands (B11/B12) to ``swir_dip``, both recovering linearly to 1.0 over
``recovery_days``. Because the injected response is known in closed form,
the generated corpus doubles as an end-to-end oracle for the extraction and
classification pipeline.

Output formats are exactly those the ingestion modules consume: GeoJSON
parcels, the event CSV, per-scene JSON manifests and single-band GeoTIFFs
(B02/B04/B08 at 10 m; B8A/B11/B12 and the SCL at native 20 m). Generation is
byte-reproducible under a fixed seed.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, replace
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from .artifacts import ARTIFACT_VERSION, config_hash, write_json
from .errors import ValidationError
from .geodata import CROP_CATEGORIES
from .gtiff import write_geotiff

BANDS_10M = ("B02", "B04", "B08")
BANDS_20M = ("B8A", "B11", "B12")

#: Reflectance of parcel surfaces before any response is injected. The
#: vegetated profile (low red, high NIR) reproduces the study's narrative:
#: the visible-band dip barely moves NDVI but clearly moves EOMI2.
DEFAULT_BAND_BASE = {
    "B02": 0.035,
    "B04": 0.030,
    "B08": 0.450,
    "B8A": 0.470,
    "B11": 0.180,
    "B12": 0.100,
}

#: Reflectance of the soil background between parcels.
BACKGROUND = {
    "B02": 0.10,
    "B04": 0.12,
    "B08": 0.22,
    "B8A": 0.23,
    "B11": 0.20,
    "B12": 0.16,
}

_SCL_CLOUD = 9


@dataclass(frozen=True)
class SynthConfig:
    n_parcels: int = 40
    treated_fraction: float = 0.5
    parcel_px: int = 4  # 10 m pixels per parcel side; even, to nest 20 m blocks
    gap_px: int = 2
    pixel_size: float = 10.0
    origin_x: float = 500000.0
    origin_y: float = 4200000.0
    start: date = date(2023, 6, 1)
    end: date = date(2023, 9, 30)
    scene_cadence_days: int = 5
    visible_dip: float = 0.7
    swir_dip: float = 0.9
    recovery_days: int = 20
    noise_std: float = 0.01
    parcel_jitter: float = 0.05
    cloud_discard_fraction: float = 0.1
    cloud_partial_fraction: float = 0.15
    band_base: dict = field(default_factory=lambda: dict(DEFAULT_BAND_BASE))
    epsg: int = 32634
    seed: int = 0

    def __post_init__(self):
        if self.n_parcels < 1:
            raise ValidationError("n_parcels must be >= 1")
        if not 0.0 <= self.treated_fraction <= 1.0:
            raise ValidationError("treated_fraction must be in [0, 1]")
        if not (0.0 < self.visible_dip <= 1.0 and 0.0 < self.swir_dip <= 1.0):
            raise ValidationError("dip multipliers must lie in (0, 1]")
        if self.scene_cadence_days < 1:
            raise ValidationError("scene_cadence_days must be >= 1")
        if self.noise_std < 0:
            raise ValidationError("noise_std must be >= 0")
        if self.recovery_days < 0:
            raise ValidationError("recovery_days must be >= 0")
        if self.parcel_px < 2 or self.parcel_px % 2 or self.gap_px % 2:
            raise ValidationError(
                "parcel_px must be even >= 2 and gap_px even, so parcels align "
                "with the native 20 m grid"
            )
        if self.end <= self.start + timedelta(days=70):
            raise ValidationError("date range must span more than 70 days")
        if set(self.band_base) != set(DEFAULT_BAND_BASE):
            raise ValidationError(f"band_base must define exactly {sorted(DEFAULT_BAND_BASE)}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["start"] = self.start.isoformat()
        d["end"] = self.end.isoformat()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SynthConfig":
        d = dict(d)
        d["start"] = date.fromisoformat(d["start"])
        d["end"] = date.fromisoformat(d["end"])
        return cls(**d)


def response_factors(config: SynthConfig, days_since_event: int) -> dict[str, float]:
    """Per-band multipliers applied to a treated parcel at a given lag."""
    factors = {b: 1.0 for b in DEFAULT_BAND_BASE}
    d = days_since_event
    if 0 <= d <= config.recovery_days:
        t = d / config.recovery_days if config.recovery_days else 1.0
        vis = config.visible_dip + (1.0 - config.visible_dip) * t
        swir = config.swir_dip + (1.0 - config.swir_dip) * t
        factors["B02"] = factors["B04"] = vis
        factors["B11"] = factors["B12"] = swir
    return factors


@dataclass(frozen=True)
class CorpusPaths:
    root: Path
    parcels: Path
    events: Path
    manifests: tuple[Path, ...]
    config: SynthConfig


@dataclass(frozen=True)
class _ParcelPlan:
    parcel_id: str
    row: int
    col: int
    category: str
    treated: bool
    jitter: dict[str, float]
    event_date: date | None
    quantity: float | None


def _plan_parcels(config: SynthConfig) -> list[_ParcelPlan]:
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, 1]))
    n = config.n_parcels
    n_treated = int(math.floor(n * config.treated_fraction + 0.5))
    treated_ids = set(rng.permutation(n)[:n_treated].tolist())

    ncols = math.ceil(math.sqrt(n))
    event_lo = config.start + timedelta(days=35)
    event_hi = config.end - timedelta(days=35)
    event_span = (event_hi - event_lo).days

    plans = []
    for i in range(n):
        category = CROP_CATEGORIES[int(rng.integers(0, len(CROP_CATEGORIES)))]
        jitter = {
            b: float(rng.uniform(-config.parcel_jitter, config.parcel_jitter))
            for b in sorted(DEFAULT_BAND_BASE)
        }
        treated = i in treated_ids
        event_date = quantity = None
        if treated:
            event_date = event_lo + timedelta(days=int(rng.integers(0, event_span + 1)))
            quantity = round(float(rng.uniform(5.0, 20.0)), 2)
        plans.append(
            _ParcelPlan(
                parcel_id=f"P{i + 1:04d}",
                row=i // ncols,
                col=i % ncols,
                category=category,
                treated=treated,
                jitter=jitter,
                event_date=event_date,
                quantity=quantity,
            )
        )
    return plans


def _grid_dims(config: SynthConfig) -> tuple[int, int]:
    ncols = math.ceil(math.sqrt(config.n_parcels))
    nrows = math.ceil(config.n_parcels / ncols)
    cell = config.parcel_px + config.gap_px
    return ncols * cell + config.gap_px, nrows * cell + config.gap_px  # (width, height)


def _parcel_pixel_rect(config: SynthConfig, plan: _ParcelPlan) -> tuple[int, int, int, int]:
    """(row0, col0, row1, col1) of the parcel's 10 m pixels, half-open."""
    cell = config.parcel_px + config.gap_px
    r0 = config.gap_px + plan.row * cell
    c0 = config.gap_px + plan.col * cell
    return r0, c0, r0 + config.parcel_px, c0 + config.parcel_px


def _parcel_polygon(config: SynthConfig, plan: _ParcelPlan) -> list[list[float]]:
    r0, c0, r1, c1 = _parcel_pixel_rect(config, plan)
    px = config.pixel_size
    x0 = config.origin_x + c0 * px
    x1 = config.origin_x + c1 * px
    y_top = config.origin_y - r0 * px
    y_bot = config.origin_y - r1 * px
    return [[x0, y_bot], [x1, y_bot], [x1, y_top], [x0, y_top], [x0, y_bot]]


def _scene_dates(config: SynthConfig) -> list[date]:
    dates = []
    d = config.start
    while d <= config.end:
        dates.append(d)
        d += timedelta(days=config.scene_cadence_days)
    return dates


def generate_corpus(config: SynthConfig, out_dir: str | Path) -> CorpusPaths:
    """Write the full synthetic corpus under ``out_dir``.

    Scene cloudiness comes in three flavors: "discard" scenes whose
    cloud_percent exceeds the 20% threshold, "partial" scenes that pass the
    threshold but carry a cloudy SCL stripe knocking out some parcels, and
    clear scenes. Regeneration with the same config is byte-identical.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    plans = _plan_parcels(config)
    width10, height10 = _grid_dims(config)
    width20, height20 = width10 // 2, height10 // 2

    parcels_path = out_dir / "parcels.geojson"
    features = []
    for plan in plans:
        features.append(
            {
                "type": "Feature",
                "geometry": {
                    "type": "Polygon",
                    "coordinates": [_parcel_polygon(config, plan)],
                },
                "properties": {
                    "parcel_id": plan.parcel_id,
                    "crop_code": f"{plan.category[:3].upper()}-{plan.col:02d}",
                    "crop_category": plan.category,
                    "treated": 1 if plan.treated else 0,
                },
            }
        )
    parcels_path.write_text(
        json.dumps({"type": "FeatureCollection", "features": features}, sort_keys=True, indent=1)
        + "\n",
        encoding="utf-8",
    )

    events_path = out_dir / "events.csv"
    with open(events_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["parcel_id", "application_date", "quantity"])
        for plan in plans:
            if plan.treated:
                writer.writerow([plan.parcel_id, plan.event_date.isoformat(), plan.quantity])

    # Per-band parcel base maps at both resolutions (response/noise applied later).
    base10 = {b: np.full((height10, width10), BACKGROUND[b]) for b in BANDS_10M}
    base20 = {b: np.full((height20, width20), BACKGROUND[b]) for b in BANDS_20M}
    rects = {}
    for plan in plans:
        r0, c0, r1, c1 = _parcel_pixel_rect(config, plan)
        rects[plan.parcel_id] = (r0, c0, r1, c1)
        for b in BANDS_10M:
            base10[b][r0:r1, c0:c1] = config.band_base[b] * (1.0 + plan.jitter[b])
        for b in BANDS_20M:
            base20[b][r0 // 2 : r1 // 2, c0 // 2 : c1 // 2] = config.band_base[b] * (
                1.0 + plan.jitter[b]
            )

    flag_rng = np.random.default_rng(np.random.SeedSequence([config.seed, 2]))
    manifests = []
    scenes_dir = out_dir / "scenes"
    for scene_idx, scene_date in enumerate(_scene_dates(config)):
        roll = float(flag_rng.uniform())
        if roll < config.cloud_discard_fraction:
            kind = "discard"
            cloud_percent = round(float(flag_rng.uniform(25.0, 80.0)), 1)
        elif roll < config.cloud_discard_fraction + config.cloud_partial_fraction:
            kind = "partial"
            cloud_percent = round(float(flag_rng.uniform(10.0, 20.0)), 1)
        else:
            kind = "clear"
            cloud_percent = round(float(flag_rng.uniform(0.0, 15.0)), 1)

        scl_rng = np.random.default_rng(np.random.SeedSequence([config.seed, 3, scene_idx]))
        scl = np.where(scl_rng.uniform(size=(height20, width20)) < 0.7, 4, 5).astype(np.uint8)
        if kind == "partial":
            stripe = max(1, int(0.4 * height20))
            top = int(scl_rng.integers(0, height20 - stripe + 1))
            scl[top : top + stripe, :] = _SCL_CLOUD

        scene_dir = scenes_dir / scene_date.isoformat()
        scene_dir.mkdir(parents=True, exist_ok=True)

        for band_idx, band in enumerate(BANDS_10M + BANDS_20M):
            at20 = band in BANDS_20M
            data = (base20[band] if at20 else base10[band]).copy()
            for plan in plans:
                if not plan.treated:
                    continue
                lag = (scene_date - plan.event_date).days
                factor = response_factors(config, lag)[band]
                if factor != 1.0:
                    r0, c0, r1, c1 = rects[plan.parcel_id]
                    if at20:
                        r0, c0, r1, c1 = r0 // 2, c0 // 2, r1 // 2, c1 // 2
                    data[r0:r1, c0:c1] *= factor
            if config.noise_std > 0:
                noise_rng = np.random.default_rng(
                    np.random.SeedSequence([config.seed, 4, scene_idx, band_idx])
                )
                data = np.clip(data + noise_rng.normal(0.0, config.noise_std, data.shape), 0.0, None)
            write_geotiff(
                scene_dir / f"{band}.tif",
                data.astype(np.float32),
                config.origin_x,
                config.origin_y,
                config.pixel_size * (2 if at20 else 1),
                epsg=config.epsg,
            )
        write_geotiff(
            scene_dir / "SCL.tif", scl, config.origin_x, config.origin_y,
            config.pixel_size * 2, epsg=config.epsg,
        )

        manifest = {
            "acquisition_date": scene_date.isoformat(),
            "cloud_percent": cloud_percent,
            "bands": {b: f"{b}.tif" for b in BANDS_10M + BANDS_20M},
            "scl": "SCL.tif",
            "crs": f"EPSG:{config.epsg}",
        }
        manifest_path = scene_dir / "manifest.json"
        write_json(manifest_path, manifest)
        manifests.append(manifest_path)

    write_json(
        out_dir / "synth_config.json",
        {
            "version": ARTIFACT_VERSION,
            "stage": "synth",
            "seed": config.seed,
            "config": config.to_dict(),
            "config_hash": config_hash(config.to_dict()),
            "scenes": [str(p.relative_to(out_dir)) for p in manifests],
        },
    )
    return CorpusPaths(
        root=out_dir,
        parcels=parcels_path,
        events=events_path,
        manifests=tuple(manifests),
        config=config,
    )


def oracle_labels(corpus_dir: str | Path) -> dict[str, int]:
    """Ground-truth labels straight from the generated files.

    Reads parcels.geojson and events.csv and checks they agree: a parcel is
    labeled 1 iff it has at least one application event.
    """
    corpus_dir = Path(corpus_dir)
    doc = json.loads((corpus_dir / "parcels.geojson").read_text(encoding="utf-8"))
    labels = {
        f["properties"]["parcel_id"]: int(f["properties"]["treated"])
        for f in doc["features"]
    }
    with_events = set()
    with open(corpus_dir / "events.csv", newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            with_events.add(row["parcel_id"])
    for pid, label in labels.items():
        if bool(label) != (pid in with_events):
            raise ValidationError(f"label/event mismatch for parcel {pid}")
    return labels


def null_response(config: SynthConfig) -> SynthConfig:
    """The same corpus with identity multipliers (no injected signal)."""
    return replace(config, visible_dip=1.0, swir_dip=1.0)
