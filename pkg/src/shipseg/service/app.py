"""HTTP annotation service.

Serves dataset images to annotators, validates and persists point and
squiggle submissions, reports progress, and exports sparse-label
documents. Point submissions must carry exactly 5 points per class;
squiggle submissions at least one stroke per class.
"""

from __future__ import annotations

import io
import zlib
from pathlib import Path
from typing import Literal, Optional

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from PIL import Image
from pydantic import BaseModel, ConfigDict, Field, StrictInt

from ..annotations import build_export_document, serialize_export
from ..datasets import load_dataset
from ..errors import BoundsError, IncompleteError, UnknownImageError, ValidationError
from ..sampling import sample_from_squiggles
from ..types import (
    AnnotationRecord,
    ImageSample,
    Scheme,
    SparseLabel,
    SquiggleSet,
    Stroke,
    parse_rfc3339,
)
from .log import AnnotationLog

POINTS_PER_CLASS = 5
DEFAULT_SQUIGGLE_N = 32


def derive_export_seed(seed: int, image_id: str) -> int:
    return (seed ^ zlib.crc32(image_id.encode("utf-8"))) & 0xFFFFFFFF


class StrokeIn(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    class_id: StrictInt = Field(alias="class")
    radius: StrictInt
    polyline: list[list[StrictInt]]


class AnnotationIn(BaseModel):
    image_id: str
    annotator_id: str
    scheme: Literal["point_n10", "squiggle_n32"]
    created_at: str
    version: Optional[int] = None  # informational; the log assigns versions
    points: Optional[list[list[StrictInt]]] = None
    strokes: Optional[list[StrokeIn]] = None


class SubmitResult(BaseModel):
    accepted: bool
    version: int


class ImageInfo(BaseModel):
    image_id: str
    status: Literal["unlabeled", "point_done", "squiggle_done"]
    dimensions: tuple[int, int]


class Progress(BaseModel):
    total: int
    point_done: int
    squiggle_done: int


def _parse_points(entries: list[list[int]], image: ImageSample) -> SparseLabel:
    points = []
    for i, entry in enumerate(entries):
        if len(entry) != 3:
            raise ValidationError(
                f"points: entry {i} must be a [row, col, class] triple", path=f"/points/{i}"
            )
        r, c, k = entry
        if k not in (0, 1):
            raise ValidationError(f"points: entry {i} class must be 0 or 1", path=f"/points/{i}")
        points.append((r, c, k))
    counts = {0: 0, 1: 0}
    for _, _, k in points:
        counts[k] += 1
    for k in (1, 0):
        if counts[k] != POINTS_PER_CLASS:
            raise ValidationError(
                f"points: class {k} count {counts[k]}, expected {POINTS_PER_CLASS}",
                path="/points",
            )
    try:
        label = SparseLabel(points, scheme=Scheme.POINT_N10)
        label.check_bounds(image.height, image.width)
    except (ValueError, BoundsError) as exc:
        raise ValidationError(f"points: {exc}", path="/points") from None
    return label


def _parse_strokes(entries: list[StrokeIn], image: ImageSample) -> SquiggleSet:
    strokes = []
    for i, entry in enumerate(entries):
        vertices = []
        for j, vertex in enumerate(entry.polyline):
            if len(vertex) != 2:
                raise ValidationError(
                    f"strokes: stroke {i} vertex {j} must be a [row, col] pair",
                    path=f"/strokes/{i}/polyline/{j}",
                )
            vertices.append((vertex[0], vertex[1]))
        try:
            strokes.append(Stroke(class_id=entry.class_id, polyline=vertices, radius=entry.radius))
        except ValueError as exc:
            raise ValidationError(f"strokes: {exc}", path=f"/strokes/{i}") from None
    try:
        squiggles = SquiggleSet(strokes, image_id=image.id)
        squiggles.check_bounds(image.height, image.width)
    except (ValueError, BoundsError) as exc:
        raise ValidationError(f"strokes: {exc}", path="/strokes") from None
    present = squiggles.classes_present()
    for k, name in ((1, "ship"), (0, "background")):
        if k not in present:
            raise ValidationError(f"strokes: missing {name} stroke", path="/strokes")
    return squiggles


def validate_submission(body: AnnotationIn, image: ImageSample) -> AnnotationRecord:
    """Turn a request body into a validated, unversioned record."""
    if not body.annotator_id:
        raise ValidationError("annotator_id: must be non-empty", path="/annotator_id")
    try:
        parse_rfc3339(body.created_at)
    except ValueError as exc:
        raise ValidationError(f"created_at: {exc}", path="/created_at") from None
    if body.scheme == Scheme.POINT_N10.value:
        if body.points is None:
            raise ValidationError("points: required for the point scheme", path="/points")
        if body.strokes is not None:
            raise ValidationError("strokes: not allowed for the point scheme", path="/strokes")
        payload: SparseLabel | SquiggleSet = _parse_points(body.points, image)
    else:
        if body.strokes is None:
            raise ValidationError("strokes: required for the squiggle scheme", path="/strokes")
        if body.points is not None:
            raise ValidationError("points: not allowed for the squiggle scheme", path="/points")
        payload = _parse_strokes(body.strokes, image)
    try:
        return AnnotationRecord(
            image_id=body.image_id,
            annotator_id=body.annotator_id,
            scheme=Scheme(body.scheme),
            payload=payload,
            created_at=body.created_at,
            version=0,
        )
    except ValueError as exc:
        raise ValidationError(str(exc)) from None


def render_png(image: ImageSample) -> bytes:
    quantized = np.clip(np.round(image.pixels * 255.0), 0, 255).astype(np.uint8)
    mode = "L" if quantized.ndim == 2 else "RGB"
    buf = io.BytesIO()
    Image.fromarray(quantized, mode=mode).save(buf, format="PNG")
    return buf.getvalue()


def create_app(
    images_dir: str | Path, log_path: str | Path, frontend_dir: str | Path | None = None
) -> FastAPI:
    pairs = load_dataset(images_dir)
    images = {image.id: image for image, _ in pairs}
    listing_order = [image.id for image, _ in pairs]
    log = AnnotationLog(log_path)

    app = FastAPI(title="ship annotation service")
    app.state.log = log
    app.state.images = images

    @app.exception_handler(ValidationError)
    async def _validation_error(request: Request, exc: ValidationError):
        return JSONResponse(status_code=400, content={"error": exc.message, "path": exc.path})

    @app.exception_handler(UnknownImageError)
    async def _unknown_image(request: Request, exc: UnknownImageError):
        return JSONResponse(status_code=404, content={"error": str(exc), "path": "/image_id"})

    @app.exception_handler(IncompleteError)
    async def _incomplete(request: Request, exc: IncompleteError):
        return JSONResponse(status_code=400, content={"error": str(exc), "path": ""})

    @app.exception_handler(RequestValidationError)
    async def _request_invalid(request: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        loc = "/" + "/".join(str(p) for p in first.get("loc", ()) if p != "body")
        return JSONResponse(
            status_code=400, content={"error": first.get("msg", "invalid request"), "path": loc}
        )

    def status_of(image_id: str) -> str:
        if log.latest_for_image(image_id, Scheme.SQUIGGLE_N32) is not None:
            return "squiggle_done"
        if log.latest_for_image(image_id, Scheme.POINT_N10) is not None:
            return "point_done"
        return "unlabeled"

    @app.get("/api/images", response_model=list[ImageInfo])
    def list_images(status: Optional[str] = None):
        infos = []
        for image_id in listing_order:
            image = images[image_id]
            current = status_of(image_id)
            if status is not None and current != status:
                continue
            infos.append(
                ImageInfo(
                    image_id=image_id,
                    status=current,
                    dimensions=(image.height, image.width),
                )
            )
        return infos

    @app.get("/api/images/{image_id}/raster")
    def image_raster(image_id: str):
        if image_id not in images:
            raise UnknownImageError(f"unknown image id {image_id!r}")
        return Response(content=render_png(images[image_id]), media_type="image/png")

    @app.post("/api/annotations", response_model=SubmitResult)
    def submit_annotation(body: AnnotationIn):
        if body.image_id not in images:
            raise UnknownImageError(f"unknown image id {body.image_id!r}")
        record = validate_submission(body, images[body.image_id])
        accepted, version = log.submit(record)
        return SubmitResult(accepted=accepted, version=version)

    @app.get("/api/progress", response_model=Progress)
    def progress():
        point_done = sum(
            1 for i in listing_order if log.latest_for_image(i, Scheme.POINT_N10) is not None
        )
        squiggle_done = sum(
            1 for i in listing_order if log.latest_for_image(i, Scheme.SQUIGGLE_N32) is not None
        )
        return Progress(total=len(listing_order), point_done=point_done, squiggle_done=squiggle_done)

    @app.get("/api/export")
    def export(scheme: str, n: int = DEFAULT_SQUIGGLE_N, seed: int = 0):
        if scheme not in (Scheme.POINT_N10.value, Scheme.SQUIGGLE_N32.value):
            raise ValidationError(f"unknown export scheme {scheme!r}", path="/scheme")
        wanted = Scheme(scheme)
        missing = [i for i in listing_order if log.latest_for_image(i, wanted) is None]
        if missing:
            raise IncompleteError(missing)
        entries = []
        for image_id in sorted(listing_order):
            record = log.latest_for_image(image_id, wanted)
            image = images[image_id]
            if wanted == Scheme.POINT_N10:
                label = record.payload
            else:
                label = sample_from_squiggles(
                    record.payload,
                    n,
                    image.height,
                    image.width,
                    derive_export_seed(seed, image_id),
                )
            entries.append((image_id, label))
        return Response(
            content=serialize_export(build_export_document(entries)),
            media_type="application/json",
        )

    if frontend_dir is not None and Path(frontend_dir).exists():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(frontend_dir), html=True), name="frontend")

    return app
