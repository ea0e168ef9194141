"""Minimal single-band GeoTIFF reader/writer built on Pillow.

Supports the subset of GeoTIFF this package produces and consumes:
axis-aligned, north-up rasters georeferenced by a pixel-scale tag and a
single (0, 0) tiepoint, with an optional EPSG code. Sample formats:
uint8, uint16, int32, float32 (float64 input is stored as float32).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image
from PIL import TiffTags
from PIL.TiffImagePlugin import ImageFileDirectory_v2

from .errors import ParseError, ValidationError

MODEL_PIXEL_SCALE_TAG = 33550
MODEL_TIEPOINT_TAG = 33922
GEOKEY_DIRECTORY_TAG = 34735
_PROJECTED_CRS_GEOKEY = 3072

_MODE_FOR_DTYPE = {
    np.dtype(np.uint8): "L",
    np.dtype(np.uint16): "I;16",
    np.dtype(np.int32): "I",
    np.dtype(np.float32): "F",
}


@dataclass(frozen=True)
class GeoTiff:
    """In-memory single-band raster with its georeferencing."""

    data: np.ndarray
    origin_x: float
    origin_y: float
    pixel_size: float
    epsg: int | None = None


def write_geotiff(
    path: str | Path,
    data: np.ndarray,
    origin_x: float,
    origin_y: float,
    pixel_size: float,
    epsg: int | None = None,
) -> None:
    """Write a 2-D array as a single-band GeoTIFF.

    ``origin_x``/``origin_y`` locate the outer corner of the top-left pixel,
    ``pixel_size`` is the square pixel edge in CRS units.
    """
    if data.ndim != 2:
        raise ValidationError(f"raster must be 2-D, got shape {data.shape}")
    if pixel_size <= 0:
        raise ValidationError(f"pixel_size must be positive, got {pixel_size}")
    if data.dtype == np.float64:
        data = data.astype(np.float32)
    if data.dtype not in _MODE_FOR_DTYPE:
        raise ValidationError(f"unsupported raster dtype {data.dtype}")

    ifd = ImageFileDirectory_v2()
    ifd[MODEL_PIXEL_SCALE_TAG] = (float(pixel_size), float(pixel_size), 0.0)
    ifd.tagtype[MODEL_PIXEL_SCALE_TAG] = TiffTags.DOUBLE
    ifd[MODEL_TIEPOINT_TAG] = (0.0, 0.0, 0.0, float(origin_x), float(origin_y), 0.0)
    ifd.tagtype[MODEL_TIEPOINT_TAG] = TiffTags.DOUBLE
    if epsg is not None:
        # Minimal GeoKey directory: header + one ProjectedCRS key.
        ifd[GEOKEY_DIRECTORY_TAG] = (1, 1, 0, 1, _PROJECTED_CRS_GEOKEY, 0, 1, int(epsg))
        ifd.tagtype[GEOKEY_DIRECTORY_TAG] = TiffTags.SHORT

    Image.fromarray(data).save(str(path), format="TIFF", tiffinfo=ifd)


def read_geotiff(path: str | Path) -> GeoTiff:
    """Read a single-band GeoTIFF written by :func:`write_geotiff` or compatible."""
    path = Path(path)
    try:
        with Image.open(path) as im:
            tags = dict(im.tag_v2)
            data = np.asarray(im)
    except (OSError, SyntaxError) as exc:
        raise ParseError(f"cannot read GeoTIFF {path}: {exc}") from exc

    scale = tags.get(MODEL_PIXEL_SCALE_TAG)
    tiepoint = tags.get(MODEL_TIEPOINT_TAG)
    if scale is None or tiepoint is None:
        raise ParseError(f"{path}: missing georeferencing tags (33550/33922)")
    sx, sy = float(scale[0]), float(scale[1])
    if abs(sx - sy) > 1e-9:
        raise ValidationError(f"{path}: non-square pixels ({sx} x {sy}) unsupported")
    if len(tiepoint) < 6 or tiepoint[0] != 0 or tiepoint[1] != 0:
        raise ParseError(f"{path}: only (0,0)-anchored tiepoints are supported")

    epsg = None
    geokeys = tags.get(GEOKEY_DIRECTORY_TAG)
    if geokeys is not None:
        for i in range(4, len(geokeys) - 3, 4):
            if geokeys[i] == _PROJECTED_CRS_GEOKEY:
                epsg = int(geokeys[i + 3])
                break

    return GeoTiff(
        data=data,
        origin_x=float(tiepoint[3]),
        origin_y=float(tiepoint[4]),
        pixel_size=sx,
        epsg=epsg,
    )
