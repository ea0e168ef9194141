"""Canonical serialization helpers shared by pipeline stages.

Every stage artifact embeds the stage config hash and seed, and all writers
here are timestamp-free and key-sorted so that reruns with identical inputs
produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

ARTIFACT_VERSION = 1


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def config_hash(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()[:16]


def write_json(path: str | Path, obj) -> None:
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=1) + "\n", encoding="utf-8")


def read_json(path: str | Path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def fmt_cell(value: float | None) -> str:
    """CSV cell for an optional float: shortest round-trip repr, '' when missing."""
    if value is None:
        return ""
    return repr(float(value))


def parse_cell(text: str) -> float | None:
    return float(text) if text else None
