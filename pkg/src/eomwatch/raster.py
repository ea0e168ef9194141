"""Scene loading, resolution harmonization, SCL/cloud filtering, zonal access.

A scene is one acquisition: six surface-reflectance bands plus the scene
classification layer (SCL). Bands arrive at their native 10 m or 20 m
resolution and are harmonized onto the 10 m grid by nearest-neighbor
replication, which preserves radiometry exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from datetime import date
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError
from .geodata import ObservationWindow, PixelMask
from .gtiff import read_geotiff

BAND_IDS = ("B02", "B04", "B08", "B8A", "B11", "B12")

#: SCL classes kept for index computation: vegetation, not vegetated, water.
SCL_VEGETATION = 4
SCL_NOT_VEGETATED = 5
SCL_WATER = 6
VALID_SCL_CLASSES = frozenset({SCL_VEGETATION, SCL_NOT_VEGETATED, SCL_WATER})

#: Integer inputs are digital numbers on this scale; floats are reflectance.
DN_SCALE = 10000.0

DEFAULT_CLOUD_MAX = 20.0


@dataclass(frozen=True)
class GridSpec:
    """Axis-aligned north-up raster grid; origin is the top-left corner."""

    origin_x: float
    origin_y: float
    pixel_size: float
    width: int
    height: int

    def pixel_center(self, row: int, col: int) -> tuple[float, float]:
        return (
            self.origin_x + (col + 0.5) * self.pixel_size,
            self.origin_y - (row + 0.5) * self.pixel_size,
        )


@dataclass(frozen=True)
class Raster:
    data: np.ndarray
    grid: GridSpec


@dataclass(frozen=True)
class ValidMask:
    """Per-pixel usability derived from the SCL band."""

    mask: np.ndarray  # bool
    grid: GridSpec
    note: str


@dataclass(frozen=True)
class Scene:
    """One acquisition: reflectance bands, SCL, date, scene cloud percentage."""

    acquisition_date: date
    cloud_percent: float
    bands: dict[str, Raster]
    scl: Raster
    epsg: int | None = None

    @property
    def is_harmonized(self) -> bool:
        grids = {r.grid for r in self.bands.values()} | {self.scl.grid}
        return len(grids) == 1

    @property
    def grid(self) -> GridSpec:
        if not self.is_harmonized:
            raise ValidationError("scene is not harmonized; call harmonize() first")
        return self.scl.grid


def load_scene(manifest_path: str | Path) -> Scene:
    """Load one scene from its JSON manifest.

    The manifest lists ``acquisition_date`` (ISO-8601), ``cloud_percent``,
    ``bands`` (band_id -> GeoTIFF path) and ``scl`` (path); relative paths
    resolve against the manifest's directory. Integer rasters are DN on a
    1/10000 scale and are converted to reflectance at load.
    """
    manifest_path = Path(manifest_path)
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read scene manifest {manifest_path}: {exc}") from exc

    try:
        acq = date.fromisoformat(manifest["acquisition_date"])
    except (KeyError, ValueError) as exc:
        raise ParseError(f"{manifest_path}: bad acquisition_date: {exc}") from exc
    cloud = float(manifest.get("cloud_percent", -1))
    if not 0.0 <= cloud <= 100.0:
        raise ValidationError(
            f"{manifest_path}: cloud_percent must be in [0, 100], got {cloud}"
        )

    band_paths = manifest.get("bands", {})
    missing = [b for b in BAND_IDS if b not in band_paths]
    if missing:
        raise ValidationError(f"{manifest_path}: missing band {missing[0]}")
    if "scl" not in manifest:
        raise ValidationError(f"{manifest_path}: missing scl path")

    base = manifest_path.parent

    def resolve(p: str) -> Path:
        p = Path(p)
        return p if p.is_absolute() else base / p

    epsgs: set[int] = set()
    bands: dict[str, Raster] = {}
    for band_id in BAND_IDS:
        tif = read_geotiff(resolve(band_paths[band_id]))
        data = np.asarray(tif.data)
        if np.issubdtype(data.dtype, np.integer):
            data = data.astype(np.float64) / DN_SCALE
        else:
            data = data.astype(np.float64)
        if not np.all(np.isfinite(data)):
            raise ValidationError(f"{manifest_path}: band {band_id} has non-finite values")
        if data.min() < 0:
            raise ValidationError(f"{manifest_path}: band {band_id} has negative reflectance")
        grid = GridSpec(tif.origin_x, tif.origin_y, tif.pixel_size, data.shape[1], data.shape[0])
        bands[band_id] = Raster(data, grid)
        if tif.epsg is not None:
            epsgs.add(tif.epsg)

    scl_tif = read_geotiff(resolve(manifest["scl"]))
    scl_data = np.asarray(scl_tif.data).astype(np.int64)
    if scl_data.min() < 0 or scl_data.max() > 11:
        raise ValidationError(f"{manifest_path}: SCL codes must be in [0, 11]")
    if scl_tif.epsg is not None:
        epsgs.add(scl_tif.epsg)
    if len(epsgs) > 1:
        raise ValidationError(f"{manifest_path}: rasters disagree on CRS: {sorted(epsgs)}")
    scl_grid = GridSpec(
        scl_tif.origin_x, scl_tif.origin_y, scl_tif.pixel_size,
        scl_data.shape[1], scl_data.shape[0],
    )

    return Scene(
        acquisition_date=acq,
        cloud_percent=cloud,
        bands=bands,
        scl=Raster(scl_data, scl_grid),
        epsg=next(iter(epsgs)) if epsgs else None,
    )


def _replicate(raster: Raster, target: GridSpec) -> Raster:
    """Nearest-neighbor upsample onto the target grid (integer factor)."""
    grid = raster.grid
    if grid.pixel_size == target.pixel_size:
        if (grid.width, grid.height) != (target.width, target.height):
            raise ValidationError("grids share pixel size but differ in extent")
        return raster
    factor = grid.pixel_size / target.pixel_size
    if abs(factor - round(factor)) > 1e-9 or factor < 1:
        raise ValidationError(
            f"unsupported pixel size {grid.pixel_size} (not an integer multiple "
            f"of {target.pixel_size})"
        )
    factor = int(round(factor))
    if abs(grid.origin_x - target.origin_x) > 1e-6 or abs(grid.origin_y - target.origin_y) > 1e-6:
        raise ValidationError("band grids have mismatched origins")
    data = np.repeat(np.repeat(raster.data, factor, axis=0), factor, axis=1)
    if data.shape != (target.height, target.width):
        raise ValidationError(
            f"upsampled grid {data.shape} does not match target "
            f"({target.height}, {target.width})"
        )
    return Raster(data, target)


def harmonize(scene: Scene) -> Scene:
    """Bring all bands and the SCL onto the finest (10 m) grid.

    Coarser rasters are upsampled by replicating each value over its block of
    fine pixels; a scene already on one grid is returned unchanged. Calling
    this twice is bit-exactly the same as calling it once.
    """
    if scene.is_harmonized:
        return scene
    rasters = list(scene.bands.values()) + [scene.scl]
    target_grid = min(rasters, key=lambda r: r.grid.pixel_size).grid
    bands = {b: _replicate(r, target_grid) for b, r in scene.bands.items()}
    scl = _replicate(scene.scl, target_grid)
    return replace(scene, bands=bands, scl=scl)


def scl_valid_mask(scene: Scene) -> ValidMask:
    """Pixels usable for index math: SCL in {vegetation, not-vegetated, water}."""
    scl = scene.scl
    mask = np.isin(scl.data, tuple(sorted(VALID_SCL_CLASSES)))
    return ValidMask(mask=mask, grid=scl.grid, note="kept SCL classes 4, 5, 6")


def filter_scenes(
    scenes: list[Scene],
    window: ObservationWindow,
    cloud_max: float = DEFAULT_CLOUD_MAX,
) -> list[Scene]:
    """Scenes inside the window with cloud_percent <= cloud_max, date-sorted.

    Both comparisons are inclusive; an empty result is allowed.
    """
    kept = [
        s
        for s in scenes
        if window.contains(s.acquisition_date) and s.cloud_percent <= cloud_max
    ]
    kept.sort(key=lambda s: s.acquisition_date)
    return kept


@dataclass(frozen=True)
class BandSamples:
    """Reflectance samples of one parcel under one scene's valid mask."""

    samples: dict[str, np.ndarray]
    valid_fraction: float
    n_valid: int


def parcel_band_values(scene: Scene, parcel_mask: PixelMask, valid: ValidMask) -> BandSamples:
    """Per-band reflectance at pixels in (parcel AND valid), row-major order.

    valid_fraction is |parcel AND valid| / |parcel|. Zero valid pixels yield
    empty sample arrays with valid_fraction 0; the caller decides what to do.
    """
    grid = scene.grid
    if parcel_mask.grid_signature() != (grid.origin_x, grid.origin_y, grid.pixel_size,
                                        (grid.height, grid.width)):
        raise ValidationError("parcel mask grid does not match scene grid")
    if valid.grid != grid:
        raise ValidationError("valid mask grid does not match scene grid")

    sel = parcel_mask.bitmap & valid.mask
    n_valid = int(sel.sum())
    fraction = n_valid / parcel_mask.pixel_count if parcel_mask.pixel_count else 0.0
    samples = {b: scene.bands[b].data[sel] for b in BAND_IDS}
    return BandSamples(samples=samples, valid_fraction=fraction, n_valid=n_valid)
