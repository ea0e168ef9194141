import json
from datetime import date

import numpy as np
import pytest

from eomwatch.errors import ValidationError
from eomwatch.geodata import ObservationWindow, PixelMask
from eomwatch.gtiff import write_geotiff
from eomwatch.raster import (
    BAND_IDS,
    GridSpec,
    Raster,
    Scene,
    filter_scenes,
    harmonize,
    load_scene,
    parcel_band_values,
    scl_valid_mask,
)


def write_scene(tmp_path, *, cloud=12.0, scl=None, overrides=None, drop_band=None,
                epsg_for=None, acquisition="2023-08-01"):
    """Write a 4x4 (10 m) / 2x2 (20 m) scene and return its manifest path."""
    scene_dir = tmp_path / "scene"
    scene_dir.mkdir(exist_ok=True)
    data10 = {
        "B02": np.full((4, 4), 0.05, dtype=np.float32),
        "B04": np.full((4, 4), 0.10, dtype=np.float32),
        "B08": np.full((4, 4), 0.40, dtype=np.float32),
    }
    data20 = {
        "B8A": np.full((2, 2), 0.42, dtype=np.float32),
        "B11": np.full((2, 2), 0.30, dtype=np.float32),
        "B12": np.full((2, 2), 0.20, dtype=np.float32),
    }
    if overrides:
        for band, arr in overrides.items():
            (data10 if band in data10 else data20)[band] = arr
    for band, arr in data10.items():
        write_geotiff(scene_dir / f"{band}.tif", arr, 0.0, 0.0, 10.0,
                      epsg=(epsg_for or {}).get(band, 32634))
    for band, arr in data20.items():
        write_geotiff(scene_dir / f"{band}.tif", arr, 0.0, 0.0, 20.0,
                      epsg=(epsg_for or {}).get(band, 32634))
    if scl is None:
        scl = np.full((2, 2), 4, dtype=np.uint8)
    write_geotiff(scene_dir / "SCL.tif", scl, 0.0, 0.0, 20.0, epsg=32634)

    bands = {b: f"{b}.tif" for b in BAND_IDS}
    if drop_band:
        del bands[drop_band]
    manifest = {
        "acquisition_date": acquisition,
        "cloud_percent": cloud,
        "bands": bands,
        "scl": "SCL.tif",
    }
    path = scene_dir / "manifest.json"
    path.write_text(json.dumps(manifest))
    return path


def scene_on_grid(acquisition_date=date(2023, 8, 1), cloud=10.0, size=4, fill=0.2,
                  scl_value=4):
    grid = GridSpec(0.0, 0.0, 10.0, size, size)
    bands = {b: Raster(np.full((size, size), fill), grid) for b in BAND_IDS}
    scl = Raster(np.full((size, size), scl_value, dtype=np.int64), grid)
    return Scene(acquisition_date=acquisition_date, cloud_percent=cloud, bands=bands, scl=scl)


class TestLoadScene:
    def test_fields_pass_through(self, tmp_path):
        scene = load_scene(write_scene(tmp_path, cloud=12.0))
        assert scene.cloud_percent == 12.0
        assert scene.acquisition_date == date(2023, 8, 1)
        assert set(scene.bands) == set(BAND_IDS)
        assert scene.epsg == 32634
        assert not scene.is_harmonized  # 10 m and 20 m bands still native

    def test_missing_band_names_it(self, tmp_path):
        with pytest.raises(ValidationError, match="B8A"):
            load_scene(write_scene(tmp_path, drop_band="B8A"))

    def test_cloud_percent_range(self, tmp_path):
        with pytest.raises(ValidationError, match="cloud_percent"):
            load_scene(write_scene(tmp_path, cloud=105.0))

    def test_integer_dn_scaled_to_reflectance(self, tmp_path):
        dn = np.full((4, 4), 1234, dtype=np.uint16)
        manifest = write_scene(tmp_path, overrides={"B04": dn})
        scene = load_scene(manifest)
        assert np.allclose(scene.bands["B04"].data, 0.1234)

    def test_scl_code_range_is_checked(self, tmp_path):
        bad = np.full((2, 2), 12, dtype=np.uint8)
        with pytest.raises(ValidationError, match="SCL"):
            load_scene(write_scene(tmp_path, scl=bad))

    def test_crs_mismatch(self, tmp_path):
        manifest = write_scene(tmp_path, epsg_for={"B02": 32635})
        with pytest.raises(ValidationError, match="CRS"):
            load_scene(manifest)


class TestHarmonize:
    def test_20m_values_replicate_to_2x2_blocks(self, tmp_path):
        b11 = np.array([[0.1, 0.2], [0.3, 0.4]], dtype=np.float32)
        scene = harmonize(load_scene(write_scene(tmp_path, overrides={"B11": b11})))
        out = scene.bands["B11"].data
        expected = np.repeat(np.repeat(b11.astype(np.float64), 2, 0), 2, 1)
        assert np.array_equal(out, expected)
        assert scene.grid.pixel_size == 10.0
        assert scene.grid.width == 4

    def test_already_harmonized_scene_unchanged(self):
        scene = scene_on_grid()
        assert harmonize(scene) is scene

    def test_replication_preserves_mean(self, tmp_path):
        b12 = np.array([[0.11, 0.27], [0.05, 0.33]], dtype=np.float32)
        scene = harmonize(load_scene(write_scene(tmp_path, overrides={"B12": b12})))
        assert scene.bands["B12"].data.mean() == pytest.approx(b12.astype(np.float64).mean())

    def test_idempotent_bit_exact(self, tmp_path):
        scene = harmonize(load_scene(write_scene(tmp_path)))
        again = harmonize(scene)
        assert again is scene
        for band in BAND_IDS:
            assert np.array_equal(again.bands[band].data, scene.bands[band].data)

    def test_unsupported_pixel_size(self, tmp_path):
        manifest = write_scene(tmp_path)
        write_geotiff(tmp_path / "scene" / "B11.tif",
                      np.full((2, 2), 0.3, dtype=np.float32), 0.0, 0.0, 15.0, epsg=32634)
        with pytest.raises(ValidationError, match="pixel size"):
            harmonize(load_scene(manifest))


class TestSclValidMask:
    def test_code_table(self):
        scene = scene_on_grid(size=2)
        scene = Scene(
            acquisition_date=scene.acquisition_date,
            cloud_percent=scene.cloud_percent,
            bands=scene.bands,
            scl=Raster(np.array([[4, 5], [6, 8]]), scene.scl.grid),
        )
        mask = scl_valid_mask(scene)
        assert mask.mask.tolist() == [[True, True], [True, False]]
        assert "4, 5, 6" in mask.note

    def test_all_cloud_empty(self):
        assert not scl_valid_mask(scene_on_grid(scl_value=9)).mask.any()

    def test_all_vegetation_full(self):
        assert scl_valid_mask(scene_on_grid(scl_value=4)).mask.all()

    def test_depends_only_on_scl(self):
        scene_a = scene_on_grid(fill=0.2)
        scene_b = scene_on_grid(fill=0.9)
        assert np.array_equal(scl_valid_mask(scene_a).mask, scl_valid_mask(scene_b).mask)


class TestFilterScenes:
    window = ObservationWindow("P1", date(2023, 8, 1))

    def test_date_boundaries(self):
        inside = scene_on_grid(date(2023, 8, 31))  # anchor + 30
        outside = scene_on_grid(date(2023, 9, 1))  # anchor + 31
        kept = filter_scenes([outside, inside], self.window)
        assert [s.acquisition_date for s in kept] == [date(2023, 8, 31)]

    def test_cloud_threshold_inclusive(self):
        at_threshold = scene_on_grid(cloud=20.0)
        above = scene_on_grid(cloud=35.0)
        kept = filter_scenes([at_threshold, above], self.window)
        assert kept == [at_threshold]

    def test_subset_sorted_idempotent(self):
        scenes = [
            scene_on_grid(date(2023, 8, 20)),
            scene_on_grid(date(2023, 7, 10)),
            scene_on_grid(date(2023, 8, 5), cloud=50.0),
        ]
        kept = filter_scenes(scenes, self.window)
        assert [s.acquisition_date for s in kept] == [date(2023, 7, 10), date(2023, 8, 20)]
        assert all(s in scenes for s in kept)
        assert filter_scenes(kept, self.window) == kept

    def test_empty_result_allowed(self):
        assert filter_scenes([scene_on_grid(date(2020, 1, 1))], self.window) == []


def mask_from_bitmap(bitmap):
    return PixelMask(bitmap=np.asarray(bitmap, dtype=bool),
                     origin_x=0.0, origin_y=0.0, pixel_size=10.0)


class TestParcelBandValues:
    def make_scene(self, scl_grid):
        grid = GridSpec(0.0, 0.0, 10.0, 2, 2)
        bands = {
            b: Raster(np.arange(4, dtype=float).reshape(2, 2) / 10 + i, grid)
            for i, b in enumerate(BAND_IDS)
        }
        return Scene(date(2023, 8, 1), 5.0, bands, Raster(np.asarray(scl_grid), grid))

    def test_counts_and_fraction(self):
        scene = self.make_scene([[4, 8], [9, 5]])
        parcel = mask_from_bitmap([[1, 1], [1, 1]])
        result = parcel_band_values(scene, parcel, scl_valid_mask(scene))
        assert result.valid_fraction == 0.5
        assert len(result.samples["B02"]) == 2
        assert result.samples["B02"].tolist() == [0.0, 0.3]  # row-major order

    def test_full_validity(self):
        scene = self.make_scene([[4, 4], [5, 6]])
        parcel = mask_from_bitmap([[1, 1], [0, 0]])
        result = parcel_band_values(scene, parcel, scl_valid_mask(scene))
        assert result.valid_fraction == 1.0

    def test_disjoint_masks_empty(self):
        scene = self.make_scene([[8, 8], [4, 4]])
        parcel = mask_from_bitmap([[1, 1], [0, 0]])
        result = parcel_band_values(scene, parcel, scl_valid_mask(scene))
        assert result.valid_fraction == 0.0
        assert result.samples["B11"].size == 0

    def test_adding_invalid_pixel_changes_only_fraction(self):
        scene = self.make_scene([[4, 8], [4, 4]])
        small = mask_from_bitmap([[1, 0], [1, 1]])
        grown = mask_from_bitmap([[1, 1], [1, 1]])  # adds the SCL=8 pixel
        a = parcel_band_values(scene, small, scl_valid_mask(scene))
        b = parcel_band_values(scene, grown, scl_valid_mask(scene))
        for band in BAND_IDS:
            assert np.array_equal(a.samples[band], b.samples[band])
        assert a.valid_fraction == 1.0
        assert b.valid_fraction == 0.75

    def test_grid_mismatch_is_an_error(self):
        scene = self.make_scene([[4, 4], [4, 4]])
        parcel = PixelMask(bitmap=np.ones((2, 2), dtype=bool),
                           origin_x=5.0, origin_y=0.0, pixel_size=10.0)
        with pytest.raises(ValidationError, match="grid"):
            parcel_band_values(scene, parcel, scl_valid_mask(scene))
