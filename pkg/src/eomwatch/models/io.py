"""Model serialization: self-describing JSON documents with a version field."""

from __future__ import annotations

import json
from pathlib import Path

from ..errors import ParseError, ValidationError
from .boosting import GradientBoostingClassifier
from .forest import RandomForestClassifier
from .neighbors import KNeighborsClassifier
from .network import FeedForwardClassifier

MODEL_FORMAT_VERSION = 1

_KIND_FOR_CLASS = {
    RandomForestClassifier: "random_forest",
    KNeighborsClassifier: "knn",
    GradientBoostingClassifier: "gradient_boosting",
    FeedForwardClassifier: "feedforward_nn",
}
_CLASS_FOR_KIND = {v: k for k, v in _KIND_FOR_CLASS.items()}


def model_to_document(model, seed: int | None = None, feature_transform_ref: str | None = None) -> dict:
    cls = type(model)
    if cls not in _KIND_FOR_CLASS:
        raise ValidationError(f"cannot serialize model of type {cls.__name__}")
    return {
        "version": MODEL_FORMAT_VERSION,
        "kind": _KIND_FOR_CLASS[cls],
        "config": model.get_params(),
        "seed": seed,
        "feature_transform": feature_transform_ref,
        "params": model.to_dict(),
    }


def model_from_document(doc: dict):
    if "version" not in doc:
        raise ParseError("model document has no version field")
    if doc["version"] != MODEL_FORMAT_VERSION:
        raise ParseError(f"unsupported model format version {doc['version']}")
    kind = doc.get("kind")
    cls = _CLASS_FOR_KIND.get(kind)
    if cls is None:
        raise ParseError(f"unknown model kind {kind!r}")
    return cls.from_dict(doc["params"])


def save_model(model, path: str | Path, seed: int | None = None,
               feature_transform_ref: str | None = None) -> None:
    doc = model_to_document(model, seed=seed, feature_transform_ref=feature_transform_ref)
    Path(path).write_text(json.dumps(doc, sort_keys=True), encoding="utf-8")


def load_model(path: str | Path):
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read model file {path}: {exc}") from exc
    return model_from_document(doc)
