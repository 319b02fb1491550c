"""Masked pixel-wise cross-entropy over annotated points.

The loss is the mean negative log-likelihood of the annotated class over
the pixels the evaluation mask selects; everything outside the mask
contributes exactly zero, including its gradient. Probabilities are
clamped to [1e-12, 1] before the log.
"""

from __future__ import annotations

import numpy as np
import torch

from .errors import EmptyMaskError
from .types import EvaluationMask, Prediction, SparseLabel

PROB_CLAMP = 1e-12


def _check_alignment(pred: Prediction, target: SparseLabel, mask: EvaluationMask) -> None:
    if (mask.selected.shape[0], mask.selected.shape[1]) != (pred.height, pred.width):
        raise ValueError("evaluation mask shape must match the prediction")
    if mask.popcount == 0:
        raise EmptyMaskError("evaluation mask selects no pixels")
    if mask.popcount != len(target.points):
        raise ValueError("mask popcount must equal the number of annotated points")
    for r, c, _ in target.points:
        if not mask.selected[r, c]:
            raise ValueError(f"annotated point ({r}, {c}) is not selected by the mask")


def pwce_loss(pred: Prediction, target: SparseLabel, mask: EvaluationMask) -> float:
    """Masked cross-entropy: -(1/|M|) sum over selected pixels of log p(class)."""
    _check_alignment(pred, target, mask)
    rows = np.array([p[0] for p in target.points])
    cols = np.array([p[1] for p in target.points])
    classes = np.array([p[2] for p in target.points])
    picked = pred.probs[rows, cols, classes].astype(np.float64)
    return float(-np.log(np.clip(picked, PROB_CLAMP, 1.0)).mean())


def pwce_loss_grad(pred: Prediction, target: SparseLabel, mask: EvaluationMask) -> np.ndarray:
    """Analytic gradient of pwce_loss w.r.t. the probability raster.

    Zero everywhere except (r, c, annotated class) for selected pixels,
    where it is -1 / (|M| * p); zero where the clamp is active.
    """
    _check_alignment(pred, target, mask)
    grad = np.zeros(pred.probs.shape, dtype=np.float64)
    n = len(target.points)
    for r, c, k in target.points:
        p = float(pred.probs[r, c, k])
        if p > PROB_CLAMP:
            grad[r, c, k] = -1.0 / (n * min(p, 1.0))
    return grad


def masked_cross_entropy(
    probs: torch.Tensor, classes: torch.Tensor, mask: torch.Tensor
) -> torch.Tensor:
    """Batched differentiable form of the masked cross-entropy.

    probs: (B, 2, H, W) per-pixel class probabilities.
    classes: (B, H, W) integer class raster; values outside the mask are
        ignored (and may be anything >= 0 after clamping).
    mask: (B, H, W) boolean loss mask.

    Items are normalized by their own selected-pixel count, then averaged
    over the items with a non-empty mask.
    """
    if probs.ndim != 4 or probs.shape[1] != 2:
        raise ValueError("probs must be (B, 2, H, W)")
    picked = probs.gather(1, classes.long().clamp(min=0, max=1).unsqueeze(1)).squeeze(1)
    logp = torch.log(picked.clamp(PROB_CLAMP, 1.0))
    m = mask.to(logp.dtype)
    counts = m.sum(dim=(1, 2))
    if not (counts > 0).any():
        raise EmptyMaskError("every item in the batch has an empty mask")
    item_loss = -(logp * m).sum(dim=(1, 2)) / counts.clamp(min=1.0)
    return item_loss[counts > 0].mean()
