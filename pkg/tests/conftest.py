"""Shared fixtures: synthetic corpora and extracted artifact directories."""

from __future__ import annotations

from pathlib import Path

import pytest

from eomwatch import pipeline, synth


def make_extracted_dir(root: Path, config: synth.SynthConfig) -> Path:
    """Generate a corpus under root/corpus and run extraction into root."""
    paths = synth.generate_corpus(config, root / "corpus")
    pipeline.run_extract(paths.parcels, paths.events, paths.root / "scenes", root)
    return root


@pytest.fixture(scope="session")
def clean_corpus_config() -> synth.SynthConfig:
    """Noise-free, jitter-free, cloud-free corpus: closed-form oracle territory."""
    return synth.SynthConfig(
        n_parcels=9,
        treated_fraction=0.5,
        noise_std=0.0,
        parcel_jitter=0.0,
        cloud_discard_fraction=0.0,
        cloud_partial_fraction=0.0,
        seed=11,
    )


@pytest.fixture(scope="session")
def clean_extracted_dir(tmp_path_factory, clean_corpus_config) -> Path:
    return make_extracted_dir(tmp_path_factory.mktemp("clean"), clean_corpus_config)


@pytest.fixture(scope="session")
def default_corpus_config() -> synth.SynthConfig:
    return synth.SynthConfig(n_parcels=16, seed=3)


@pytest.fixture(scope="session")
def default_extracted_dir(tmp_path_factory, default_corpus_config) -> Path:
    return make_extracted_dir(tmp_path_factory.mktemp("default"), default_corpus_config)
