"""Core domain types: images, masks, sparse labels, squiggles, predictions."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from enum import Enum

import numpy as np

from .errors import BoundsError

BACKGROUND = 0
SHIP = 1
CLASS_IDS = (BACKGROUND, SHIP)

Point = tuple[int, int, int]  # (row, col, class)


class Polarity(str, Enum):
    WHITE_HOT = "white_hot"
    BLACK_HOT = "black_hot"
    VISIBLE = "visible"


class Source(str, Enum):
    AIRBUS_LIKE = "airbus_like"
    IR_LIKE = "ir_like"
    SYNTHETIC = "synthetic"


class Scheme(str, Enum):
    POINT_N10 = "point_n10"
    SQUIGGLE_N32 = "squiggle_n32"
    MASKED_DENSE = "masked_dense"


@dataclass
class ImageSample:
    """A single raster with intensity polarity metadata.

    ``pixels`` is HxW (single channel) or HxWx3 (visible-domain inputs),
    float32, intensities in [0, 1].
    """

    id: str
    pixels: np.ndarray
    polarity: Polarity = Polarity.WHITE_HOT
    source: Source = Source.SYNTHETIC

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.float32)
        if self.pixels.ndim not in (2, 3) or (
            self.pixels.ndim == 3 and self.pixels.shape[2] != 3
        ):
            raise ValueError("pixels must be HxW or HxWx3")
        if self.height < 16 or self.width < 16:
            raise ValueError(f"image must be at least 16x16, got {self.height}x{self.width}")
        if not self.id:
            raise ValueError("image id must be non-empty")
        lo = float(self.pixels.min())
        hi = float(self.pixels.max())
        if lo < 0.0 or hi > 1.0:
            raise ValueError(f"intensities must lie in [0, 1], got [{lo:.4g}, {hi:.4g}]")
        self.polarity = Polarity(self.polarity)
        self.source = Source(self.source)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return 1 if self.pixels.ndim == 2 else self.pixels.shape[2]


@dataclass
class DenseMask:
    """Per-pixel class raster: 0 = background, 1 = ship."""

    classes: np.ndarray

    def __post_init__(self):
        self.classes = np.asarray(self.classes, dtype=np.uint8)
        if self.classes.ndim != 2:
            raise ValueError("mask must be a 2-D raster")
        if not np.isin(self.classes, CLASS_IDS).all():
            raise ValueError("mask values must be 0 or 1")

    @property
    def height(self) -> int:
        return self.classes.shape[0]

    @property
    def width(self) -> int:
        return self.classes.shape[1]


@dataclass
class SparseLabel:
    """An ordered list of annotated (row, col, class) points."""

    points: list[Point]
    scheme: Scheme = Scheme.MASKED_DENSE

    def __post_init__(self):
        self.scheme = Scheme(self.scheme)
        self.points = [(int(r), int(c), int(k)) for r, c, k in self.points]
        if not self.points:
            raise ValueError("a sparse label needs at least one point")
        seen = set()
        for r, c, k in self.points:
            if k not in CLASS_IDS:
                raise ValueError(f"point class must be 0 or 1, got {k}")
            if (r, c) in seen:
                raise ValueError(f"duplicate coordinate ({r}, {c})")
            seen.add((r, c))

    def check_bounds(self, height: int, width: int) -> None:
        for r, c, _ in self.points:
            if not (0 <= r < height and 0 <= c < width):
                raise BoundsError(f"point ({r}, {c}) outside {height}x{width} raster")

    def class_counts(self) -> dict[int, int]:
        counts = {BACKGROUND: 0, SHIP: 0}
        for _, _, k in self.points:
            counts[k] += 1
        return counts


@dataclass
class EvaluationMask:
    """Boolean raster selecting which pixels enter the loss."""

    selected: np.ndarray

    def __post_init__(self):
        self.selected = np.asarray(self.selected, dtype=bool)
        if self.selected.ndim != 2:
            raise ValueError("evaluation mask must be a 2-D raster")

    @property
    def popcount(self) -> int:
        return int(self.selected.sum())


def build_eval_mask(label: SparseLabel, height: int, width: int) -> EvaluationMask:
    """Boolean raster that is true exactly at the label's coordinates."""
    label.check_bounds(height, width)
    selected = np.zeros((height, width), dtype=bool)
    rows = [p[0] for p in label.points]
    cols = [p[1] for p in label.points]
    selected[rows, cols] = True
    return EvaluationMask(selected)


@dataclass
class Stroke:
    """One free-hand polyline drawn over a single class."""

    class_id: int
    polyline: list[tuple[int, int]]
    radius: int = 1

    def __post_init__(self):
        if self.class_id not in CLASS_IDS:
            raise ValueError(f"stroke class must be 0 or 1, got {self.class_id}")
        self.polyline = [(int(r), int(c)) for r, c in self.polyline]
        if not self.polyline:
            raise ValueError("a stroke needs at least one vertex")
        self.radius = int(self.radius)
        if self.radius < 0:
            raise ValueError("stroke radius must be >= 0")


@dataclass
class SquiggleSet:
    """Per-class strokes for one image. Sampling requires a stroke per class."""

    strokes: list[Stroke]
    image_id: str = ""

    def __post_init__(self):
        if not self.strokes:
            raise ValueError("a squiggle set needs at least one stroke")

    def classes_present(self) -> set[int]:
        return {s.class_id for s in self.strokes}

    def check_bounds(self, height: int, width: int) -> None:
        for i, stroke in enumerate(self.strokes):
            for r, c in stroke.polyline:
                if not (0 <= r < height and 0 <= c < width):
                    raise BoundsError(
                        f"stroke {i} vertex ({r}, {c}) outside {height}x{width} raster"
                    )


def parse_rfc3339(text: str) -> datetime:
    """Parse an RFC 3339 timestamp; 'Z' suffixes are accepted."""
    normalized = text[:-1] + "+00:00" if text.endswith(("Z", "z")) else text
    stamp = datetime.fromisoformat(normalized)
    if stamp.tzinfo is None:
        raise ValueError(f"timestamp {text!r} lacks a UTC offset")
    return stamp


@dataclass
class AnnotationRecord:
    """One submitted annotation, versioned per (image_id, annotator_id).

    The payload matches the scheme: point annotations carry a SparseLabel,
    squiggle annotations a SquiggleSet. ``created_at`` is kept verbatim as
    the RFC 3339 string the annotator submitted.
    """

    image_id: str
    annotator_id: str
    scheme: Scheme
    payload: SparseLabel | SquiggleSet
    created_at: str
    version: int = 0

    def __post_init__(self):
        self.scheme = Scheme(self.scheme)
        if not self.image_id:
            raise ValueError("image_id must be non-empty")
        if not self.annotator_id:
            raise ValueError("annotator_id must be non-empty")
        if self.scheme == Scheme.POINT_N10:
            if not isinstance(self.payload, SparseLabel):
                raise ValueError("point records must carry a SparseLabel payload")
            if self.payload.scheme != Scheme.POINT_N10:
                raise ValueError("payload scheme does not match record scheme")
        elif self.scheme == Scheme.SQUIGGLE_N32:
            if not isinstance(self.payload, SquiggleSet):
                raise ValueError("squiggle records must carry a SquiggleSet payload")
        else:
            raise ValueError("annotation records only store point or squiggle schemes")
        parse_rfc3339(self.created_at)
        self.version = int(self.version)
        if self.version < 0:
            raise ValueError("version must be non-negative")


@dataclass
class Prediction:
    """Per-pixel class probabilities, HxWx2, rows summing to one."""

    probs: np.ndarray

    def __post_init__(self):
        self.probs = np.asarray(self.probs)
        if self.probs.ndim != 3 or self.probs.shape[2] != 2:
            raise ValueError("probabilities must be HxWx2")
        if float(self.probs.min()) < 0.0:
            raise ValueError("probabilities must be non-negative")
        sums = self.probs.sum(axis=2)
        if float(np.abs(sums - 1.0).max()) > 1e-6:
            raise ValueError("per-pixel probabilities must sum to 1 within 1e-6")

    @property
    def height(self) -> int:
        return self.probs.shape[0]

    @property
    def width(self) -> int:
        return self.probs.shape[1]
