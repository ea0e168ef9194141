import hashlib
from dataclasses import replace
from datetime import date
from pathlib import Path

import numpy as np
import pytest

from eomwatch import pipeline, synth
from eomwatch.errors import ValidationError
from tests.conftest import make_extracted_dir


def tree_hashes(root: Path) -> dict[str, str]:
    return {
        str(p.relative_to(root)): hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


class TestConfigValidation:
    def test_bad_multiplier(self):
        with pytest.raises(ValidationError):
            synth.SynthConfig(visible_dip=0.0)
        with pytest.raises(ValidationError):
            synth.SynthConfig(swir_dip=1.5)

    def test_bad_cadence_and_noise(self):
        with pytest.raises(ValidationError):
            synth.SynthConfig(scene_cadence_days=0)
        with pytest.raises(ValidationError):
            synth.SynthConfig(noise_std=-0.1)

    def test_odd_parcel_px_rejected(self):
        with pytest.raises(ValidationError, match="20 m"):
            synth.SynthConfig(parcel_px=3)


class TestGeneration:
    def test_same_seed_byte_identical(self, tmp_path):
        config = synth.SynthConfig(n_parcels=6, seed=21)
        synth.generate_corpus(config, tmp_path / "a")
        synth.generate_corpus(config, tmp_path / "b")
        assert tree_hashes(tmp_path / "a") == tree_hashes(tmp_path / "b")

    def test_different_seed_differs(self, tmp_path):
        synth.generate_corpus(synth.SynthConfig(n_parcels=6, seed=1), tmp_path / "a")
        synth.generate_corpus(synth.SynthConfig(n_parcels=6, seed=2), tmp_path / "b")
        assert tree_hashes(tmp_path / "a") != tree_hashes(tmp_path / "b")

    def test_treated_counts_exact(self, tmp_path):
        config = synth.SynthConfig(n_parcels=100, treated_fraction=0.5, seed=3)
        synth.generate_corpus(config, tmp_path / "c")
        labels = synth.oracle_labels(tmp_path / "c")
        assert sum(labels.values()) == 50
        assert len(labels) == 100

    def test_single_treated_parcel(self, tmp_path):
        config = synth.SynthConfig(n_parcels=1, treated_fraction=1.0, seed=4)
        synth.generate_corpus(config, tmp_path / "one")
        assert list(synth.oracle_labels(tmp_path / "one").values()) == [1]

    def test_labels_match_event_file(self, tmp_path):
        config = synth.SynthConfig(n_parcels=12, treated_fraction=0.25, seed=5)
        paths = synth.generate_corpus(config, tmp_path / "m")
        labels = synth.oracle_labels(paths.root)
        events = {line.split(",")[0] for line in
                  (paths.events.read_text().splitlines()[1:])}
        assert {pid for pid, lab in labels.items() if lab} == events


class TestInjectedResponse:
    def test_response_factors_shape(self):
        config = synth.SynthConfig()
        at_zero = synth.response_factors(config, 0)
        assert at_zero["B04"] == config.visible_dip
        assert at_zero["B12"] == config.swir_dip
        assert at_zero["B08"] == 1.0
        at_end = synth.response_factors(config, config.recovery_days)
        assert at_end["B04"] == 1.0
        before = synth.response_factors(config, -1)
        assert all(v == 1.0 for v in before.values())

    def test_eomi2_increases_at_application(self, clean_extracted_dir, clean_corpus_config):
        records = pipeline.load_index_series(clean_extracted_dir)
        windows = pipeline.load_windows(clean_extracted_dir)
        labels = synth.oracle_labels(clean_extracted_dir / "corpus")
        treated = [pid for pid, lab in labels.items() if lab]
        checked = 0
        for pid in treated:
            anchor = windows[pid].anchor_date
            pre = [v["eomi2"] for d, v, _ in records[pid] if d < anchor]
            post = [
                (d, v["eomi2"])
                for d, v, _ in records[pid]
                if 0 <= (d - anchor).days <= clean_corpus_config.recovery_days // 2
            ]
            if not pre or not post:
                continue
            for _, value in post:
                assert value > max(pre)
            checked += 1
        assert checked >= 2

    def test_closed_form_match_with_zero_noise(self, clean_extracted_dir, clean_corpus_config):
        config = clean_corpus_config
        records = pipeline.load_index_series(clean_extracted_dir)
        windows = pipeline.load_windows(clean_extracted_dir)
        labels = synth.oracle_labels(clean_extracted_dir / "corpus")
        base = config.band_base
        for pid, recs in records.items():
            anchor = windows[pid].anchor_date
            for d, values, _ in recs:
                lag = (d - anchor).days if labels[pid] else -1
                factors = synth.response_factors(config, lag)
                # mirror float32 GeoTIFF storage, then exact index arithmetic
                b04 = float(np.float32(base["B04"] * factors["B04"]))
                b12 = float(np.float32(base["B12"] * factors["B12"]))
                expected = (b12 - b04) / (b12 + b04)
                assert values["eomi2"] == pytest.approx(expected, abs=1e-6)

    def test_null_response_series_are_flat(self, tmp_path):
        config = synth.SynthConfig(
            n_parcels=4,
            noise_std=0.0,
            parcel_jitter=0.0,
            visible_dip=1.0,
            swir_dip=1.0,
            cloud_discard_fraction=0.0,
            cloud_partial_fraction=0.0,
            seed=6,
        )
        out = make_extracted_dir(tmp_path, config)
        records = pipeline.load_index_series(out)
        all_values = {
            name: {v[name] for recs in records.values() for _, v, _ in recs}
            for name in ("eomi2", "ndvi", "nbr2")
        }
        for name, distinct in all_values.items():
            assert len(distinct) == 1, f"{name} varies under the null response"


class TestScl:
    def test_partial_cloud_scenes_drop_observations(self, tmp_path):
        with_clouds = synth.SynthConfig(
            n_parcels=9, seed=7, cloud_discard_fraction=0.0, cloud_partial_fraction=0.5
        )
        without = replace(with_clouds, cloud_partial_fraction=0.0)
        out_a = make_extracted_dir(tmp_path / "a", with_clouds)
        out_b = make_extracted_dir(tmp_path / "b", without)
        count_a = sum(len(r) for r in pipeline.load_index_series(out_a).values())
        count_b = sum(len(r) for r in pipeline.load_index_series(out_b).values())
        assert count_a < count_b

    def test_scene_dates_respect_cadence(self, tmp_path):
        config = synth.SynthConfig(n_parcels=4, scene_cadence_days=7, seed=8,
                                   start=date(2023, 5, 1), end=date(2023, 8, 30))
        paths = synth.generate_corpus(config, tmp_path / "c")
        dates = sorted(date.fromisoformat(m.parent.name) for m in paths.manifests)
        gaps = {(b - a).days for a, b in zip(dates, dates[1:])}
        assert gaps == {7}
