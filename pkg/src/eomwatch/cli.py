"""Command-line pipeline: synth -> extract -> features -> train -> eval -> report,
plus the review service (`serve`).

Every stage writes versioned artifacts into the output directory (flag
``--out`` or environment variable ``EOMWATCH_OUT``) and refuses to run before
its prerequisite stage.
"""

from __future__ import annotations

import functools
import sys
from datetime import date
from pathlib import Path

import click

from . import pipeline, synth
from .errors import EomwatchError

_out_option = click.option(
    "--out",
    envvar="EOMWATCH_OUT",
    required=True,
    type=click.Path(file_okay=False, path_type=Path),
    help="Artifact directory (or set EOMWATCH_OUT).",
)


def _surface_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except EomwatchError as exc:
            raise click.ClickException(str(exc)) from exc

    return wrapper


@click.group()
@click.version_option(package_name="eomwatch")
def main():
    """Detect digestate application from Sentinel-2 parcel time series."""


@main.command("synth")
@_out_option
@click.option("--n-parcels", default=40, show_default=True)
@click.option("--treated-fraction", default=0.5, show_default=True)
@click.option("--noise-std", default=0.01, show_default=True)
@click.option("--parcel-jitter", default=0.05, show_default=True)
@click.option("--visible-dip", default=0.7, show_default=True)
@click.option("--swir-dip", default=0.9, show_default=True)
@click.option("--cadence", default=5, show_default=True, help="Days between scenes.")
@click.option("--start", default="2023-06-01", show_default=True)
@click.option("--end", default="2023-09-30", show_default=True)
@click.option("--seed", default=0, show_default=True)
@_surface_errors
def cmd_synth(out, n_parcels, treated_fraction, noise_std, parcel_jitter,
              visible_dip, swir_dip, cadence, start, end, seed):
    """Generate a synthetic corpus under OUT/corpus."""
    config = synth.SynthConfig(
        n_parcels=n_parcels,
        treated_fraction=treated_fraction,
        noise_std=noise_std,
        parcel_jitter=parcel_jitter,
        visible_dip=visible_dip,
        swir_dip=swir_dip,
        scene_cadence_days=cadence,
        start=date.fromisoformat(start),
        end=date.fromisoformat(end),
        seed=seed,
    )
    paths = synth.generate_corpus(config, Path(out) / "corpus")
    click.echo(
        f"synth: {n_parcels} parcels, {len(paths.manifests)} scenes -> {paths.root}"
    )


@main.command("extract")
@_out_option
@click.option("--parcels", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--events", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--scenes", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--cloud-max", default=20.0, show_default=True)
@click.option("--window-days", default=30, show_default=True)
@_surface_errors
def cmd_extract(out, parcels, events, scenes, cloud_max, window_days):
    """Compute windows and per-parcel index series."""
    summary = pipeline.run_extract(
        parcels, events, scenes, out, cloud_max=cloud_max, window_days=window_days
    )
    click.echo(
        f"extract: {summary['parcels']} parcels, {summary['observations']} observations"
    )


@main.command("features")
@_out_option
@_surface_errors
def cmd_features(out):
    """Reduce index series to the 72-column feature table."""
    summary = pipeline.run_features(out)
    click.echo(f"features: {summary['features']} vectors, {summary['skipped']} skipped")


@main.command("train")
@_out_option
@click.option("--model", default="all", show_default=True,
              type=click.Choice(["rf", "knn", "gb", "nn", "all"]))
@click.option("--seed", default=0, show_default=True)
@click.option("--test-fraction", default=0.2, show_default=True)
@_surface_errors
def cmd_train(out, model, seed, test_fraction):
    """Stratified 80/20 split and model training."""
    summary = pipeline.run_train(out, model=model, seed=seed, test_fraction=test_fraction)
    click.echo(
        f"train: {summary['train']} train / {summary['test']} test rows, "
        f"models {','.join(summary['models'])}"
    )


@main.command("eval")
@_out_option
@click.option("--model", default="all", show_default=True,
              type=click.Choice(["rf", "knn", "gb", "nn", "all"]))
@click.option("--cv", "cv_mode", default="train", show_default=True,
              type=click.Choice(["train", "full"]),
              help="Run 5-fold CV over the train split or the full dataset.")
@click.option("--seed", default=0, show_default=True)
@_surface_errors
def cmd_eval(out, model, cv_mode, seed):
    """Held-out metrics plus 5-fold cross-validation."""
    summary = pipeline.run_eval(out, model=model, cv_mode=cv_mode, seed=seed)
    click.echo(f"eval: models {','.join(summary['models'])} (cv over {summary['cv_mode']})")


@main.command("report")
@_out_option
@_surface_errors
def cmd_report(out):
    """Render report.md/report.json and the distribution charts."""
    summary = pipeline.run_report(out)
    click.echo(f"report: written ({summary['annotations']} annotations)")


@main.command("serve")
@_out_option
@click.option("--port", default=8080, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--ui-dir", default=None, type=click.Path(file_okay=False, path_type=Path),
              help="Static UI bundle to serve at / (defaults to a frontend/dist sibling).")
@_surface_errors
def cmd_serve(out, port, host, ui_dir):
    """Serve the photo-interpretation review API (and UI when built)."""
    import uvicorn

    from .service import create_app

    app = create_app(out, ui_dir=ui_dir)
    try:
        uvicorn.run(app, host=host, port=port, log_level="info")
    except SystemExit as exc:  # uvicorn startup failure (e.g. port in use)
        sys.exit(exc.code or 1)


if __name__ == "__main__":
    main()
