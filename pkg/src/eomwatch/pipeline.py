"""Pipeline stages operating on an artifact directory.

Each stage reads its predecessor's artifacts, writes versioned outputs
embedding the stage config hash and seed, and fails with a clear
"run <stage> first" error when a prerequisite is missing. All outputs are
byte-reproducible given identical inputs and seeds.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from datetime import date
from pathlib import Path

import numpy as np

from .artifacts import ARTIFACT_VERSION, config_hash, fmt_cell, parse_cell, read_json, write_json
from .errors import DataConsistencyError, MissingArtifactError, ValidationError
from .evaluation import (
    Annotation,
    cross_validate,
    distribution_tables,
    evaluate_predictions,
    photo_interp_recall,
)
from .features import (
    DEFAULT_VALID_FRACTION_MIN,
    FEATURE_NAMES,
    N_SERIES_FEATURES,
    FeatureTransform,
    FeatureVector,
    IndexSeries,
    Observation,
    build_series,
    default_transform,
    extract_feature_table,
)
from .geodata import (
    ObservationWindow,
    ParcelSet,
    assign_window,
    category_median_dates,
    load_events,
    load_parcels,
    rasterize_parcel,
)
from .indices import SERIES_NAMES, IndexVector
from .models.config import MODEL_KINDS, ModelConfig, make_model
from .models.io import load_model, save_model
from .models.selection import stratified_split_indices
from .raster import DEFAULT_CLOUD_MAX, filter_scenes, harmonize, load_scene
from .report import (
    render_distribution_svg,
    render_report_markdown,
)

INDEX_CSV_HEADER = ["parcel_id", "date", *SERIES_NAMES, "valid_fraction"]
FEATURES_CSV_HEADER = ["parcel_id", *FEATURE_NAMES, "label"]


def _require(path: Path, stage: str) -> Path:
    if not path.exists():
        raise MissingArtifactError(f"{path.name} not found in {path.parent}; run {stage} first")
    return path


def _relpath(path: str | Path, out_dir: Path) -> str:
    return os.path.relpath(Path(path).resolve(), out_dir.resolve())


def discover_manifests(scenes_dir: str | Path) -> list[Path]:
    scenes_dir = Path(scenes_dir)
    manifests = sorted(scenes_dir.rglob("manifest.json"))
    if not manifests:
        raise MissingArtifactError(f"no scene manifests under {scenes_dir}")
    return manifests


def load_harmonized_scenes(scenes_dir: str | Path):
    scenes = [harmonize(load_scene(m)) for m in discover_manifests(scenes_dir)]
    grids = {s.grid for s in scenes}
    if len(grids) != 1:
        raise ValidationError("scenes do not share one harmonized grid")
    return scenes


def run_extract(
    parcels_path: str | Path,
    events_path: str | Path,
    scenes_dir: str | Path,
    out_dir: str | Path,
    cloud_max: float = DEFAULT_CLOUD_MAX,
    window_days: int = 30,
    valid_fraction_min: float = DEFAULT_VALID_FRACTION_MIN,
) -> dict:
    """Windows + per-parcel per-date index records -> index_series.csv."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    parcels = load_parcels(parcels_path)
    events = load_events(events_path)
    unknown = [pid for pid in events.parcel_ids if pid not in parcels]
    if unknown:
        raise DataConsistencyError(
            f"events refer to unknown parcels: {', '.join(unknown[:5])}"
        )

    medians = category_median_dates(parcels, events)
    scenes = load_harmonized_scenes(scenes_dir)
    grid = scenes[0].grid

    windows: dict[str, ObservationWindow] = {}
    rows: list[list[str]] = []
    for parcel in sorted(parcels, key=lambda p: p.parcel_id):
        window = assign_window(parcel, events, medians, window_days=window_days)
        windows[parcel.parcel_id] = window
        mask = rasterize_parcel(
            parcel, grid.origin_x, grid.origin_y, grid.pixel_size, grid.width, grid.height
        )
        kept = filter_scenes(scenes, window, cloud_max=cloud_max)
        series = build_series(parcel, window, kept, mask, valid_fraction_min=valid_fraction_min)
        for obs in series.observations:
            rows.append(
                [parcel.parcel_id, obs.date.isoformat()]
                + [fmt_cell(obs.vector.get(name)) for name in SERIES_NAMES]
                + [fmt_cell(obs.valid_fraction)]
            )

    with open(out_dir / "index_series.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(INDEX_CSV_HEADER)
        writer.writerows(rows)

    write_json(
        out_dir / "windows.json",
        {
            "version": ARTIFACT_VERSION,
            "window_days": window_days,
            "category_medians": {c: d.isoformat() for c, d in medians.items()},
            "windows": {
                pid: {
                    "anchor": w.anchor_date.isoformat(),
                    "start": w.start.isoformat(),
                    "end": w.end.isoformat(),
                    "treated": int(parcels[pid].treated),
                }
                for pid, w in sorted(windows.items())
            },
        },
    )

    config = {
        "parcels": _relpath(parcels_path, out_dir),
        "events": _relpath(events_path, out_dir),
        "scenes": _relpath(scenes_dir, out_dir),
        "cloud_max": cloud_max,
        "window_days": window_days,
        "valid_fraction_min": valid_fraction_min,
    }
    write_json(
        out_dir / "extract_config.json",
        {
            "version": ARTIFACT_VERSION,
            "stage": "extract",
            "seed": None,
            "config": config,
            "config_hash": config_hash(config),
        },
    )
    return {"parcels": len(parcels), "observations": len(rows)}


def load_windows(out_dir: Path) -> dict[str, ObservationWindow]:
    doc = read_json(_require(out_dir / "windows.json", "extract"))
    return {
        pid: ObservationWindow(
            pid, date.fromisoformat(w["anchor"]), days=doc.get("window_days", 30)
        )
        for pid, w in doc["windows"].items()
    }


def load_index_series(out_dir: Path) -> dict[str, list[tuple[date, dict, float]]]:
    """Raw index records per parcel, as (date, name->value, valid_fraction)."""
    path = _require(out_dir / "index_series.csv", "extract")
    records: dict[str, list[tuple[date, dict, float]]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != INDEX_CSV_HEADER:
            raise ValidationError(f"{path}: unexpected header")
        for row in reader:
            values = {name: parse_cell(row[name]) for name in SERIES_NAMES}
            records.setdefault(row["parcel_id"], []).append(
                (date.fromisoformat(row["date"]), values, float(row["valid_fraction"]))
            )
    return records


def _resolve_extract_paths(out_dir: Path) -> tuple[Path, Path, Path]:
    doc = read_json(_require(out_dir / "extract_config.json", "extract"))
    cfg = doc["config"]
    return (
        (out_dir / cfg["parcels"]).resolve(),
        (out_dir / cfg["events"]).resolve(),
        (out_dir / cfg["scenes"]).resolve(),
    )


def run_features(out_dir: str | Path) -> dict:
    """Reduce extracted series to the 72-feature table -> features.csv."""
    out_dir = Path(out_dir)
    parcels_path, _, _ = _resolve_extract_paths(out_dir)
    parcels = load_parcels(parcels_path)
    windows = load_windows(out_dir)
    records = load_index_series(out_dir)

    series_by_id: dict[str, IndexSeries] = {}
    for pid, recs in records.items():
        observations = tuple(
            Observation(date=d, vector=IndexVector(values=v), valid_fraction=vf)
            for d, v, vf in sorted(recs, key=lambda r: r[0])
        )
        series_by_id[pid] = IndexSeries(pid, windows[pid], observations)

    ordered = sorted(parcels, key=lambda p: p.parcel_id)
    vectors, skipped = extract_feature_table(ordered, series_by_id)

    with open(out_dir / "features.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(FEATURES_CSV_HEADER)
        for fv in vectors:
            full = fv.full_vector()
            writer.writerow(
                [fv.parcel_id]
                + [fmt_cell(None if np.isnan(v) else float(v)) for v in full]
                + [fv.label]
            )

    write_json(
        out_dir / "skipped.json",
        [{"parcel_id": s.parcel_id, "reason": s.reason} for s in skipped],
    )
    config = {"feature_names": list(FEATURE_NAMES)}
    write_json(
        out_dir / "features_config.json",
        {
            "version": ARTIFACT_VERSION,
            "stage": "features",
            "seed": None,
            "config": config,
            "config_hash": config_hash(config),
        },
    )
    return {"features": len(vectors), "skipped": len(skipped)}


def load_feature_vectors(out_dir: Path) -> list[FeatureVector]:
    path = _require(out_dir / "features.csv", "features")
    vectors = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != FEATURES_CSV_HEADER:
            raise ValidationError(f"{path}: unexpected header")
        for row in reader:
            full = np.array(
                [np.nan if row[name] == "" else float(row[name]) for name in FEATURE_NAMES]
            )
            vectors.append(
                FeatureVector(
                    parcel_id=row["parcel_id"],
                    values=full[:N_SERIES_FEATURES],
                    one_hot=full[N_SERIES_FEATURES:],
                    label=int(row["label"]),
                )
            )
    return vectors


def _selected_kinds(model: str) -> list[str]:
    if model == "all":
        return list(MODEL_KINDS)
    if model not in MODEL_KINDS:
        raise ValidationError(f"unknown model {model!r} (expected one of {MODEL_KINDS} or 'all')")
    return [model]


def run_train(
    out_dir: str | Path,
    model: str = "all",
    seed: int = 0,
    test_fraction: float = 0.2,
) -> dict:
    """Stratified split, transform fit on train only, train selected models."""
    out_dir = Path(out_dir)
    vectors = load_feature_vectors(out_dir)
    kinds = _selected_kinds(model)

    y = np.array([fv.label for fv in vectors], dtype=np.int64)
    X_raw = np.vstack([fv.full_vector() for fv in vectors])
    train_idx, test_idx = stratified_split_indices(y, test_fraction=test_fraction, seed=seed)

    transform = default_transform().fit(X_raw[train_idx])
    transform.save(out_dir / "transform.json")
    X_train = transform.transform(X_raw[train_idx])

    models_dir = out_dir / "models"
    models_dir.mkdir(exist_ok=True)
    config = ModelConfig(seed=seed)
    for kind in kinds:
        estimator = make_model(kind, config)
        estimator.fit(X_train, y[train_idx])
        save_model(
            estimator,
            models_dir / f"model_{kind}.json",
            seed=seed,
            feature_transform_ref="../transform.json",
        )

    write_json(
        out_dir / "split.json",
        {
            "version": ARTIFACT_VERSION,
            "seed": seed,
            "test_fraction": test_fraction,
            "train_ids": [vectors[i].parcel_id for i in train_idx],
            "test_ids": [vectors[i].parcel_id for i in test_idx],
        },
    )
    stage_config = {
        "model": model,
        "test_fraction": test_fraction,
        "model_config": config.to_dict(),
    }
    write_json(
        out_dir / "train_config.json",
        {
            "version": ARTIFACT_VERSION,
            "stage": "train",
            "seed": seed,
            "config": stage_config,
            "config_hash": config_hash(stage_config),
        },
    )
    return {"train": len(train_idx), "test": len(test_idx), "models": kinds}


def run_eval(
    out_dir: str | Path,
    model: str = "all",
    cv_mode: str = "train",
    k: int = 5,
    seed: int = 0,
) -> dict:
    """Held-out test metrics + k-fold CV (folds over train split or full data)."""
    out_dir = Path(out_dir)
    if cv_mode not in ("train", "full"):
        raise ValidationError(f"cv_mode must be 'train' or 'full', got {cv_mode!r}")
    vectors = load_feature_vectors(out_dir)
    split = read_json(_require(out_dir / "split.json", "train"))
    transform = FeatureTransform.load(_require(out_dir / "transform.json", "train"))
    kinds = _selected_kinds(model)

    by_id = {fv.parcel_id: fv for fv in vectors}
    train_vectors = [by_id[pid] for pid in split["train_ids"]]
    test_vectors = [by_id[pid] for pid in split["test_ids"]]
    X_test = transform.transform(np.vstack([fv.full_vector() for fv in test_vectors]))
    y_test = np.array([fv.label for fv in test_vectors], dtype=np.int64)

    cv_vectors = train_vectors if cv_mode == "train" else vectors
    config = ModelConfig(seed=seed)

    models_doc = {}
    for kind in kinds:
        estimator = load_model(
            _require(out_dir / "models" / f"model_{kind}.json", "train")
        )
        holdout = evaluate_predictions(estimator.predict(X_test), y_test)
        cv = cross_validate(kind, config, cv_vectors, k=k, seed=seed)
        models_doc[kind] = {"holdout": holdout.as_dict(), "cv": cv.as_dict()}

    stage_config = {"model": model, "cv_mode": cv_mode, "k": k}
    write_json(
        out_dir / "eval.json",
        {
            "version": ARTIFACT_VERSION,
            "stage": "eval",
            "seed": seed,
            "config": stage_config,
            "config_hash": config_hash(stage_config),
            "cv_mode": cv_mode,
            "models": models_doc,
        },
    )
    return {"models": kinds, "cv_mode": cv_mode}


@dataclass(frozen=True)
class _MetricsView:
    """Rebuilds report-side metric objects from eval.json dictionaries."""

    per_class: dict

    @classmethod
    def from_dict(cls, d: dict):
        from .evaluation import ClassMetrics, ConfusionMatrix, CVResult, FoldMetrics

        def fold(fd: dict) -> FoldMetrics:
            return FoldMetrics(
                per_class={
                    0: ClassMetrics(**fd["class_0"]),
                    1: ClassMetrics(**fd["class_1"]),
                },
                confusion_matrix=ConfusionMatrix(**fd["confusion"]),
            )

        holdout = fold(d["holdout"])
        cv = CVResult(
            folds=tuple(fold(f) for f in d["cv"]["folds"]),
            mean={
                0: ClassMetrics(**d["cv"]["mean"]["class_0"]),
                1: ClassMetrics(**d["cv"]["mean"]["class_1"]),
            },
            std={
                0: ClassMetrics(**d["cv"]["std"]["class_0"]),
                1: ClassMetrics(**d["cv"]["std"]["class_1"]),
            },
        )
        return holdout, cv


def read_annotations(path: Path) -> list[Annotation]:
    import json as _json

    if not path.exists():
        return []
    annotations = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            doc = _json.loads(line)
            annotations.append(
                Annotation(
                    parcel_id=doc["parcel_id"],
                    change_visible=bool(doc["change_visible"]),
                    annotator=doc.get("annotator", ""),
                    timestamp=doc.get("timestamp", ""),
                )
            )
    return annotations


def run_report(out_dir: str | Path) -> dict:
    """Render eval.json (+ any annotations) to report.md/json and SVG charts."""
    out_dir = Path(out_dir)
    eval_doc = read_json(_require(out_dir / "eval.json", "eval"))

    holdout = {}
    cv = {}
    kind_order = sorted(
        eval_doc["models"],
        key=lambda k: MODEL_KINDS.index(k) if k in MODEL_KINDS else len(MODEL_KINDS),
    )
    for kind in kind_order:
        holdout[kind], cv[kind] = _MetricsView.from_dict(eval_doc["models"][kind])

    photo = None
    tables = None
    annotations = read_annotations(out_dir / "annotations.jsonl")
    report_doc: dict = {
        "version": ARTIFACT_VERSION,
        "stage": "report",
        "seed": eval_doc["seed"],
        "config_hash": eval_doc["config_hash"],
        "models": eval_doc["models"],
        "photo_interpretation": None,
        "distribution": None,
    }
    if annotations:
        parcels_path, events_path, _ = _resolve_extract_paths(out_dir)
        parcels = load_parcels(parcels_path)
        events = load_events(events_path)
        treated_ids = [p.parcel_id for p in parcels.treated()]
        photo = photo_interp_recall(annotations, treated_ids)
        tables = distribution_tables(annotations, parcels, events)
        report_doc["photo_interpretation"] = photo.as_dict()
        report_doc["distribution"] = tables.as_dict()

        charts_dir = out_dir / "charts"
        charts_dir.mkdir(exist_ok=True)
        (charts_dir / "by_category.svg").write_text(
            render_distribution_svg(tables.by_category, "Change visibility per crop category"),
            encoding="utf-8",
        )
        (charts_dir / "by_season.svg").write_text(
            render_distribution_svg(tables.by_season, "Change visibility per season"),
            encoding="utf-8",
        )

    write_json(out_dir / "report.json", report_doc)
    markdown = render_report_markdown(
        holdout,
        cv,
        eval_doc["cv_mode"],
        photo,
        tables,
        eval_doc["config_hash"],
        eval_doc["seed"],
    )
    (out_dir / "report.md").write_text(markdown, encoding="utf-8")
    return {"annotations": len(annotations)}
