"""Segmentation metrics and the evaluation report.

Jaccard is intersection-over-union on the ship class. Precision/recall
come in two conventions: ``ship_class`` counts TP/FP/FN over ship pixels,
``micro_all_pixels`` micro-averages both classes per pixel (which makes
precision = recall = pixel accuracy). Set-level scores pool counts over
all images before dividing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import LengthMismatchError, ShapeError
from .types import SHIP, DenseMask, Prediction

PR_MODES = ("ship_class", "micro_all_pixels")

REPORT_COLUMNS = ("Supervision", "Augmentations", "Precision", "Recall", "Jaccard Score")


def threshold_prediction(pred: Prediction, t: float = 0.5) -> DenseMask:
    """A pixel is ship iff its ship probability is >= t."""
    if not 0.0 < t < 1.0:
        raise ValueError("threshold must lie in (0, 1)")
    return DenseMask((pred.probs[:, :, SHIP] >= t).astype(np.uint8))


def _ship_sets(pred: DenseMask, truth: DenseMask) -> tuple[np.ndarray, np.ndarray]:
    if pred.classes.shape != truth.classes.shape:
        raise ShapeError(
            f"prediction {pred.classes.shape} and truth {truth.classes.shape} differ"
        )
    return pred.classes == SHIP, truth.classes == SHIP


def jaccard(pred: DenseMask, truth: DenseMask) -> float:
    """Ship-class intersection over union; 1.0 when both ship sets are empty."""
    a, b = _ship_sets(pred, truth)
    union = int((a | b).sum())
    if union == 0:
        return 1.0
    return int((a & b).sum()) / union


def precision_recall(pred: DenseMask, truth: DenseMask, mode: str = "ship_class") -> tuple[float, float]:
    """Precision and recall under the chosen convention.

    Empty denominators yield 1.0 by convention.
    """
    a, b = _ship_sets(pred, truth)
    if mode == "ship_class":
        tp = int((a & b).sum())
        fp = int((a & ~b).sum())
        fn = int((~a & b).sum())
        precision = tp / (tp + fp) if tp + fp else 1.0
        recall = tp / (tp + fn) if tp + fn else 1.0
        return precision, recall
    if mode == "micro_all_pixels":
        accuracy = float((pred.classes == truth.classes).mean())
        return accuracy, accuracy
    raise ValueError(f"unknown precision/recall mode {mode!r}")


def _fmt(value: float) -> str:
    text = f"{value:.3f}"
    return text[1:] if text.startswith("0.") else text


@dataclass
class MetricsRow:
    supervision: str
    augmentations: str
    precision: float
    recall: float
    jaccard: float
    pr_mode: str = "ship_class"

    def __post_init__(self):
        for name in ("precision", "recall", "jaccard"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")


@dataclass
class MetricsReport:
    rows: list[MetricsRow]
    per_image: Optional[list[tuple[float, float, float]]] = None

    def render_table(self) -> str:
        """Aligned plain-text table in the Supervision/Augmentations/
        Precision/Recall/Jaccard Score layout."""
        cells = [list(REPORT_COLUMNS)]
        for row in self.rows:
            cells.append(
                [
                    row.supervision,
                    row.augmentations,
                    _fmt(row.precision),
                    _fmt(row.recall),
                    _fmt(row.jaccard),
                ]
            )
        widths = [max(len(line[i]) for line in cells) for i in range(len(REPORT_COLUMNS))]
        lines = [" | ".join(cell.ljust(w) for cell, w in zip(line, widths)).rstrip() for line in cells]
        return "\n".join(lines)

    def to_dict(self) -> dict:
        doc = {
            "columns": list(REPORT_COLUMNS),
            "rows": [
                {
                    "supervision": r.supervision,
                    "augmentations": r.augmentations,
                    "precision": r.precision,
                    "recall": r.recall,
                    "jaccard": r.jaccard,
                    "pr_mode": r.pr_mode,
                }
                for r in self.rows
            ],
        }
        if self.per_image is not None:
            doc["per_image"] = [list(t) for t in self.per_image]
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def evaluate_set(
    preds: list[Prediction],
    truths: list[DenseMask],
    t: float = 0.5,
    supervision: str = "",
    augmentations: str = "None",
    mode: str = "ship_class",
) -> MetricsReport:
    """Threshold each prediction and pool counts over the whole set.

    Pools TP/FP/FN and intersection/union over all pixels of all images
    (micro aggregation), then emits one row plus per-image triples.
    """
    if len(preds) != len(truths):
        raise LengthMismatchError(f"{len(preds)} predictions vs {len(truths)} truths")
    if not preds:
        raise LengthMismatchError("need at least one prediction")
    if mode not in PR_MODES:
        raise ValueError(f"unknown precision/recall mode {mode!r}")
    tp = fp = fn = inter = union = correct = total = 0
    per_image = []
    for pred, truth in zip(preds, truths):
        hard = threshold_prediction(pred, t)
        a, b = _ship_sets(hard, truth)
        tp += int((a & b).sum())
        fp += int((a & ~b).sum())
        fn += int((~a & b).sum())
        inter += int((a & b).sum())
        union += int((a | b).sum())
        correct += int((hard.classes == truth.classes).sum())
        total += hard.classes.size
        p_i, r_i = precision_recall(hard, truth, mode=mode)
        per_image.append((p_i, r_i, jaccard(hard, truth)))
    if mode == "ship_class":
        precision = tp / (tp + fp) if tp + fp else 1.0
        recall = tp / (tp + fn) if tp + fn else 1.0
    else:
        precision = recall = correct / total
    pooled_jaccard = inter / union if union else 1.0
    row = MetricsRow(supervision, augmentations, precision, recall, pooled_jaccard, pr_mode=mode)
    return MetricsReport([row], per_image=per_image)
