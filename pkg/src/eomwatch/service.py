"""HTTP API for the photo-interpretation review workflow.

Read-only endpoints serve parcel summaries, index time series and rendered
chips straight from the extraction artifacts; the one write endpoint appends
annotations to a JSONL log (last write wins at read time, so replaying the
log always reconstructs the same statistics).
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from functools import lru_cache
from pathlib import Path

from fastapi import FastAPI, Query, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .artifacts import read_json
from .chips import CHIP_LAYERS, DEFAULT_SCALE, MAX_SCALE, render_chip
from .errors import EomwatchError, ValidationError
from .evaluation import distribution_tables, photo_interp_recall
from .geodata import EventSet, ObservationWindow, ParcelSet, load_events, load_parcels
from .pipeline import load_index_series, load_windows, read_annotations
from .raster import Scene, harmonize, load_scene


@dataclass
class ServiceState:
    out_dir: Path
    parcels: ParcelSet
    events: EventSet
    windows: dict[str, ObservationWindow]
    series: dict[str, list]  # parcel_id -> [(date, values, valid_fraction)]
    manifest_for_date: dict[str, Path]
    annotations_path: Path
    write_lock: threading.Lock


def load_state(out_dir: str | Path) -> ServiceState:
    """Load extraction artifacts; raises when the extract stage has not run."""
    out_dir = Path(out_dir)
    doc = read_json(out_dir / "extract_config.json")
    cfg = doc["config"]
    parcels = load_parcels((out_dir / cfg["parcels"]).resolve())
    events = load_events((out_dir / cfg["events"]).resolve())
    scenes_dir = (out_dir / cfg["scenes"]).resolve()
    manifest_for_date = {}
    for manifest in sorted(scenes_dir.rglob("manifest.json")):
        date_str = json.loads(manifest.read_text(encoding="utf-8"))["acquisition_date"]
        manifest_for_date.setdefault(date_str, manifest)
    return ServiceState(
        out_dir=out_dir,
        parcels=parcels,
        events=events,
        windows=load_windows(out_dir),
        series=load_index_series(out_dir),
        manifest_for_date=manifest_for_date,
        annotations_path=out_dir / "annotations.jsonl",
        write_lock=threading.Lock(),
    )


@lru_cache(maxsize=8)
def _scene_cache(manifest_path: str) -> Scene:
    return harmonize(load_scene(manifest_path))


def create_app(out_dir: str | Path, ui_dir: str | Path | None = None) -> FastAPI:
    """Build the review app; missing artifacts yield 503s rather than a crash."""
    app = FastAPI(title="eomwatch review service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    try:
        state: ServiceState | None = load_state(out_dir)
    except (EomwatchError, OSError, KeyError, json.JSONDecodeError):
        state = None

    @app.exception_handler(RequestValidationError)
    async def malformed_body(_request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": str(exc.errors()[:1])})

    def _err(status: int, detail: str) -> JSONResponse:
        return JSONResponse(status_code=status, content={"detail": detail})

    def _unavailable() -> JSONResponse:
        return _err(503, f"extraction artifacts not found under {out_dir}; run extract first")

    def _annotations() -> list:
        return read_annotations(state.annotations_path)

    def _latest_by_parcel() -> dict:
        latest = {}
        for a in _annotations():
            latest[a.parcel_id] = a
        return latest

    def _chip_dates(pid: str) -> list[str]:
        window = state.windows.get(pid)
        if window is None:
            return sorted(state.manifest_for_date)
        return [d for d in sorted(state.manifest_for_date)
                if window.contains(_iso_date(d))]

    @app.get("/api/parcels")
    def list_parcels():
        if state is None:
            return _unavailable()
        latest = _latest_by_parcel()
        out = []
        for parcel in sorted(state.parcels, key=lambda p: p.parcel_id):
            pid = parcel.parcel_id
            window = state.windows.get(pid)
            annotation = latest.get(pid)
            out.append(
                {
                    "parcel_id": pid,
                    "crop_category": parcel.crop_category,
                    "crop_code": parcel.crop_code,
                    "treated": parcel.treated,
                    "anchor": window.anchor_date.isoformat() if window else None,
                    "window": {
                        "start": window.start.isoformat(),
                        "end": window.end.isoformat(),
                    }
                    if window
                    else None,
                    "annotation_status": "annotated" if annotation else "unannotated",
                    "change_visible": annotation.change_visible if annotation else None,
                    "n_observations": len(state.series.get(pid, [])),
                    "chip_dates": _chip_dates(pid),
                }
            )
        return out

    @app.get("/api/parcels/{parcel_id}/timeseries")
    def timeseries(parcel_id: str):
        if state is None:
            return _unavailable()
        if parcel_id not in state.parcels:
            return _err(404, f"unknown parcel {parcel_id}")
        window = state.windows[parcel_id]
        records = state.series.get(parcel_id, [])
        return {
            "parcel_id": parcel_id,
            "anchor": window.anchor_date.isoformat(),
            "window": {"start": window.start.isoformat(), "end": window.end.isoformat()},
            "series": [
                {
                    "date": d.isoformat(),
                    "valid_fraction": vf,
                    "values": values,  # None serializes as null
                }
                for d, values, vf in records
            ],
        }

    @app.get("/api/parcels/{parcel_id}/chip")
    def chip(
        parcel_id: str,
        date: str = Query(...),
        layer: str = Query(...),
        scale: int = Query(DEFAULT_SCALE, ge=1, le=MAX_SCALE),
    ):
        if state is None:
            return _unavailable()
        if parcel_id not in state.parcels:
            return _err(404, f"unknown parcel {parcel_id}")
        if layer not in CHIP_LAYERS:
            return _err(400, f"bad layer {layer!r}; expected one of {', '.join(CHIP_LAYERS)}")
        manifest = state.manifest_for_date.get(date)
        if manifest is None:
            return _err(404, f"no scene for date {date}")
        scene = _scene_cache(str(manifest))
        try:
            png, meta = render_chip(scene, state.parcels[parcel_id], layer, scale=scale)
        except ValidationError as exc:
            return _err(400, str(exc))
        headers = {
            "X-Chip-Layer": meta.layer,
            "X-Chip-Colormap": meta.colormap,
            "X-Chip-Date": meta.date,
        }
        if meta.value_range is not None:
            headers["X-Chip-Value-Range"] = f"{meta.value_range[0]},{meta.value_range[1]}"
        return Response(content=png, media_type="image/png", headers=headers)

    @app.post("/api/parcels/{parcel_id}/annotation")
    def annotate(parcel_id: str, body: dict):
        if state is None:
            return _unavailable()
        if parcel_id not in state.parcels:
            return _err(404, f"unknown parcel {parcel_id}")
        parcel = state.parcels[parcel_id]
        if not parcel.treated:
            return _err(409, f"parcel {parcel_id} is a control parcel; annotations apply "
                             "to treated parcels only")
        if not isinstance(body.get("change_visible"), bool):
            return _err(400, "body must include boolean 'change_visible'")
        annotator = body.get("annotator", "")
        if not isinstance(annotator, str):
            return _err(400, "'annotator' must be a string")
        record = {
            "parcel_id": parcel_id,
            "change_visible": body["change_visible"],
            "annotator": annotator,
            "timestamp": datetime.now(timezone.utc).isoformat(),
        }
        with state.write_lock:  # single writer; the log is append-only
            with open(state.annotations_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, sort_keys=True) + "\n")
        return record

    @app.get("/api/stats/photo-interpretation")
    def stats():
        if state is None:
            return _unavailable()
        annotations = _annotations()
        treated_ids = [p.parcel_id for p in state.parcels.treated()]
        photo = photo_interp_recall(annotations, treated_ids)
        doc = photo.as_dict()
        if annotations:
            tables = distribution_tables(annotations, state.parcels, state.events)
            doc.update(tables.as_dict())
        else:
            doc.update({"by_category": {}, "by_season": {}, "notes": []})
        return doc

    if ui_dir is None:
        candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        ui_dir = candidate if candidate.is_dir() else None
    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def _iso_date(text: str):
    from datetime import date as _date

    return _date.fromisoformat(text)
