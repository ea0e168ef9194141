"""PNG chip rendering for the photo-interpretation review views.

Three layers per parcel and date:

* ``rgb`` - approximate true color. The study's band set has no green band,
  so the green channel is synthesized as mean(B02, B04); each channel gets a
  2%/98% percentile stretch over the chip.
* ``ndvi`` / ``eomi2`` - the per-pixel index under a fixed diverging
  blue-white-red colormap over [-1, 1], so chips stay comparable across
  dates. Pixels that are SCL-invalid or have an undefined index are
  transparent.

Rendering is deterministic: identical inputs produce identical PNG bytes.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import ValidationError
from .geodata import Parcel
from .indices import index_grid
from .raster import Scene, scl_valid_mask

CHIP_LAYERS = ("rgb", "ndvi", "eomi2")
COLORMAP_NAME = "blue-white-red"
INDEX_RANGE = (-1.0, 1.0)
PAD_FRACTION = 0.2
DEFAULT_SCALE = 8
MAX_SCALE = 64


@dataclass(frozen=True)
class ChipMeta:
    parcel_id: str
    date: str
    layer: str
    value_range: tuple[float, float] | None
    colormap: str
    scale: int


def diverging_rgb(t: np.ndarray) -> np.ndarray:
    """Map values in [-1, 1] to blue-white-red, midpoint 0 -> white."""
    t = np.clip(t, -1.0, 1.0)
    r = np.where(t >= 0, 255.0, 255.0 * (1.0 + t))
    g = 255.0 * (1.0 - np.abs(t))
    b = np.where(t <= 0, 255.0, 255.0 * (1.0 - t))
    return np.stack([r, g, b], axis=-1).round().astype(np.uint8)


def _chip_window(parcel: Parcel, scene: Scene) -> tuple[int, int, int, int]:
    """Padded pixel rect (row0, col0, row1, col1) covering the parcel bbox."""
    grid = scene.grid
    min_x, min_y, max_x, max_y = parcel.bounds()
    pad_x = (max_x - min_x) * PAD_FRACTION
    pad_y = (max_y - min_y) * PAD_FRACTION
    col0 = int(np.floor((min_x - pad_x - grid.origin_x) / grid.pixel_size))
    col1 = int(np.ceil((max_x + pad_x - grid.origin_x) / grid.pixel_size))
    row0 = int(np.floor((grid.origin_y - (max_y + pad_y)) / grid.pixel_size))
    row1 = int(np.ceil((grid.origin_y - (min_y - pad_y)) / grid.pixel_size))
    col0, row0 = max(col0, 0), max(row0, 0)
    col1, row1 = min(col1, grid.width), min(row1, grid.height)
    if col0 >= col1 or row0 >= row1:
        raise ValidationError(f"parcel {parcel.parcel_id} does not intersect the scene")
    return row0, col0, row1, col1


def _stretch(channel: np.ndarray) -> np.ndarray:
    lo, hi = np.percentile(channel, (2.0, 98.0))
    if hi - lo < 1e-12:
        return np.full(channel.shape, 128, dtype=np.uint8)  # constant chip
    scaled = (channel - lo) / (hi - lo)
    return (np.clip(scaled, 0.0, 1.0) * 255.0).round().astype(np.uint8)


def render_chip(
    scene: Scene,
    parcel: Parcel,
    layer: str,
    scale: int = DEFAULT_SCALE,
) -> tuple[bytes, ChipMeta]:
    """Render one chip as PNG bytes plus its rendering metadata."""
    if layer not in CHIP_LAYERS:
        raise ValidationError(f"unknown chip layer {layer!r} (expected one of {CHIP_LAYERS})")
    if not 1 <= scale <= MAX_SCALE:
        raise ValidationError(f"scale must be in [1, {MAX_SCALE}]")
    row0, col0, row1, col1 = _chip_window(parcel, scene)
    crop = {b: r.data[row0:row1, col0:col1] for b, r in scene.bands.items()}

    if layer == "rgb":
        red = _stretch(crop["B04"])
        green = _stretch((crop["B02"] + crop["B04"]) / 2.0)
        blue = _stretch(crop["B02"])
        alpha = np.full(red.shape, 255, dtype=np.uint8)
        rgba = np.stack([red, green, blue, alpha], axis=-1)
        value_range = None
        colormap = "approximate true color (green = mean(B02, B04))"
    else:
        values = index_grid(layer, crop)
        valid = scl_valid_mask(scene).mask[row0:row1, col0:col1]
        shown = valid & ~np.isnan(values)
        rgb = diverging_rgb(np.nan_to_num(values, nan=0.0))
        alpha = np.where(shown, 255, 0).astype(np.uint8)
        rgba = np.concatenate([rgb, alpha[..., None]], axis=-1)
        value_range = INDEX_RANGE
        colormap = COLORMAP_NAME

    if scale > 1:
        rgba = np.repeat(np.repeat(rgba, scale, axis=0), scale, axis=1)
    buffer = io.BytesIO()
    Image.fromarray(rgba, mode="RGBA").save(buffer, format="PNG")
    meta = ChipMeta(
        parcel_id=parcel.parcel_id,
        date=scene.acquisition_date.isoformat(),
        layer=layer,
        value_range=value_range,
        colormap=colormap,
        scale=scale,
    )
    return buffer.getvalue(), meta
