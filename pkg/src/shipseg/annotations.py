"""Canonical JSON for annotation records and sparse-label export documents.

Canonical form means sorted keys, no insignificant whitespace, and integer
coordinates, so serialization is byte-stable and deserialize(serialize(x))
re-serializes to the same bytes.
"""

from __future__ import annotations

import json
from typing import Any

from .errors import SchemaError
from .types import AnnotationRecord, Scheme, SparseLabel, SquiggleSet, Stroke, parse_rfc3339

_REQUIRED_KEYS = ("annotator_id", "created_at", "image_id", "scheme", "version")
_POINT_KEYS = set(_REQUIRED_KEYS) | {"points"}
_SQUIGGLE_KEYS = set(_REQUIRED_KEYS) | {"strokes"}


def _canonical_bytes(doc: Any) -> bytes:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")


def record_to_dict(record: AnnotationRecord) -> dict:
    doc = {
        "image_id": record.image_id,
        "annotator_id": record.annotator_id,
        "scheme": record.scheme.value,
        "version": record.version,
        "created_at": record.created_at,
    }
    if record.scheme == Scheme.POINT_N10:
        doc["points"] = [[r, c, k] for r, c, k in record.payload.points]
    else:
        doc["strokes"] = [
            {
                "class": stroke.class_id,
                "radius": stroke.radius,
                "polyline": [[r, c] for r, c in stroke.polyline],
            }
            for stroke in record.payload.strokes
        ]
    return doc


def serialize_annotation(record: AnnotationRecord) -> bytes:
    return _canonical_bytes(record_to_dict(record))


def _require_str(doc: dict, key: str) -> str:
    value = doc[key]
    if not isinstance(value, str) or not value:
        raise SchemaError("must be a non-empty string", path=f"/{key}")
    return value


def _parse_point(entry: Any, path: str) -> tuple[int, int, int]:
    if (
        not isinstance(entry, list)
        or len(entry) != 3
        or not all(isinstance(v, int) and not isinstance(v, bool) for v in entry)
    ):
        raise SchemaError("point must be an integer [row, col, class] triple", path=path)
    return entry[0], entry[1], entry[2]


def _parse_stroke(entry: Any, path: str) -> Stroke:
    if not isinstance(entry, dict):
        raise SchemaError("stroke must be an object", path=path)
    for key in ("class", "radius", "polyline"):
        if key not in entry:
            raise SchemaError("missing required field", path=f"{path}/{key}")
    extra = set(entry) - {"class", "radius", "polyline"}
    if extra:
        raise SchemaError("unknown field", path=f"{path}/{sorted(extra)[0]}")
    if not isinstance(entry["class"], int) or isinstance(entry["class"], bool):
        raise SchemaError("must be an integer", path=f"{path}/class")
    if not isinstance(entry["radius"], int) or isinstance(entry["radius"], bool):
        raise SchemaError("must be an integer", path=f"{path}/radius")
    polyline = entry["polyline"]
    if not isinstance(polyline, list) or not polyline:
        raise SchemaError("must be a non-empty list of [row, col] pairs", path=f"{path}/polyline")
    vertices = []
    for i, vertex in enumerate(polyline):
        if (
            not isinstance(vertex, list)
            or len(vertex) != 2
            or not all(isinstance(v, int) and not isinstance(v, bool) for v in vertex)
        ):
            raise SchemaError("vertex must be an integer [row, col] pair", path=f"{path}/polyline/{i}")
        vertices.append((vertex[0], vertex[1]))
    try:
        return Stroke(class_id=entry["class"], polyline=vertices, radius=entry["radius"])
    except ValueError as exc:
        raise SchemaError(str(exc), path=path) from None


def deserialize_annotation(data: bytes) -> AnnotationRecord:
    """Parse and validate one annotation document.

    Raises SchemaError with a JSON pointer to the offending field.
    """
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaError(f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise SchemaError("document must be a JSON object")
    for key in _REQUIRED_KEYS:
        if key not in doc:
            raise SchemaError("missing required field", path=f"/{key}")
    image_id = _require_str(doc, "image_id")
    annotator_id = _require_str(doc, "annotator_id")
    scheme = doc["scheme"]
    if scheme not in (Scheme.POINT_N10.value, Scheme.SQUIGGLE_N32.value):
        raise SchemaError(f"unknown scheme {scheme!r}", path="/scheme")
    version = doc["version"]
    if not isinstance(version, int) or isinstance(version, bool) or version < 0:
        raise SchemaError("must be a non-negative integer", path="/version")
    created_at = _require_str(doc, "created_at")
    try:
        parse_rfc3339(created_at)
    except ValueError as exc:
        raise SchemaError(str(exc), path="/created_at") from None

    if scheme == Scheme.POINT_N10.value:
        allowed = _POINT_KEYS
        if "points" not in doc:
            raise SchemaError("missing required field", path="/points")
        entries = doc["points"]
        if not isinstance(entries, list) or not entries:
            raise SchemaError("must be a non-empty list", path="/points")
        points = [_parse_point(e, f"/points/{i}") for i, e in enumerate(entries)]
        try:
            payload: SparseLabel | SquiggleSet = SparseLabel(points, scheme=Scheme.POINT_N10)
        except ValueError as exc:
            raise SchemaError(str(exc), path="/points") from None
    else:
        allowed = _SQUIGGLE_KEYS
        if "strokes" not in doc:
            raise SchemaError("missing required field", path="/strokes")
        entries = doc["strokes"]
        if not isinstance(entries, list) or not entries:
            raise SchemaError("must be a non-empty list", path="/strokes")
        strokes = [_parse_stroke(e, f"/strokes/{i}") for i, e in enumerate(entries)]
        payload = SquiggleSet(strokes, image_id=image_id)

    extra = set(doc) - allowed
    if extra:
        raise SchemaError("unknown field", path=f"/{sorted(extra)[0]}")
    return AnnotationRecord(
        image_id=image_id,
        annotator_id=annotator_id,
        scheme=Scheme(scheme),
        payload=payload,
        created_at=created_at,
        version=version,
    )


def build_export_document(entries: list[tuple[str, SparseLabel]]) -> dict:
    """Assemble the per-dataset sparse-label export document."""
    return {
        "images": [
            {"image_id": image_id, "points": [[r, c, k] for r, c, k in label.points]}
            for image_id, label in entries
        ]
    }


def serialize_export(doc: dict) -> bytes:
    return _canonical_bytes(doc)


def parse_export_document(data: bytes | dict, scheme: Scheme = Scheme.MASKED_DENSE) -> list[tuple[str, SparseLabel]]:
    """Read an export document back into (image_id, SparseLabel) pairs."""
    doc = json.loads(data.decode("utf-8")) if isinstance(data, bytes) else data
    if not isinstance(doc, dict) or "images" not in doc or not isinstance(doc["images"], list):
        raise SchemaError("export document must be an object with an 'images' list", path="/images")
    entries = []
    for i, item in enumerate(doc["images"]):
        if not isinstance(item, dict) or "image_id" not in item or "points" not in item:
            raise SchemaError("entry must carry image_id and points", path=f"/images/{i}")
        points = [_parse_point(p, f"/images/{i}/points/{j}") for j, p in enumerate(item["points"])]
        try:
            label = SparseLabel(points, scheme=scheme)
        except ValueError as exc:
            raise SchemaError(str(exc), path=f"/images/{i}/points") from None
        entries.append((item["image_id"], label))
    return entries
