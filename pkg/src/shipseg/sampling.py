"""Sparse-supervision generators.

Three ways to turn dense ground truth or annotator strokes into the sparse
(points, evaluation-mask) pairs the loss consumes:

* random masking that keeps a fixed fraction of dense labels,
* evenly distributed per-class point picks,
* weighted subsampling of rasterized squiggle strokes.

All samplers are pure functions of (inputs, seed).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError, InsufficientClassError, MissingClassError
from .types import (
    BACKGROUND,
    CLASS_IDS,
    SHIP,
    DenseMask,
    EvaluationMask,
    Scheme,
    SparseLabel,
    SquiggleSet,
    build_eval_mask,
)


@dataclass
class SamplerConfig:
    """Knobs for the three samplers; defaults follow the 5+5 point and
    32-point squiggle schemes."""

    seed: int = 0
    points_per_class: int = 5
    squiggle_sample_n: int = 32
    mask_fraction: float = 0.90

    def __post_init__(self):
        if self.points_per_class < 1:
            raise ValueError("points_per_class must be >= 1")
        if self.squiggle_sample_n < 2:
            raise ValueError("squiggle_sample_n must be >= 2")
        if not 0.0 <= self.mask_fraction < 1.0:
            raise ValueError("mask_fraction must lie in [0, 1)")


def mask_dense_labels(
    mask: DenseMask, fraction: float, seed: int
) -> tuple[SparseLabel, EvaluationMask]:
    """Keep a uniformly random (1 - fraction) share of dense pixel labels.

    Retains exactly round((1 - fraction) * H * W) pixels, sampled without
    replacement; each retained point carries the dense mask's class.
    """
    if not 0.0 <= fraction < 1.0:
        raise ValueError("fraction must lie in [0, 1)")
    total = mask.height * mask.width
    retained = int(round((1.0 - fraction) * total))
    if retained == 0:
        raise DegenerateError(
            f"fraction {fraction} retains no labels on a {mask.height}x{mask.width} mask"
        )
    rng = np.random.default_rng(seed)
    flat = rng.choice(total, size=retained, replace=False)
    flat.sort()
    rows, cols = np.unravel_index(flat, (mask.height, mask.width))
    points = [(int(r), int(c), int(mask.classes[r, c])) for r, c in zip(rows, cols)]
    label = SparseLabel(points, scheme=Scheme.MASKED_DENSE)
    return label, build_eval_mask(label, mask.height, mask.width)


def sample_points_per_class(mask: DenseMask, k: int, seed: int) -> SparseLabel:
    """Pick k pixels of each class uniformly without replacement."""
    if k < 1:
        raise ValueError("k must be >= 1")
    rng = np.random.default_rng(seed)
    flat_classes = mask.classes.reshape(-1)
    points = []
    for class_id in CLASS_IDS:
        pool = np.flatnonzero(flat_classes == class_id)
        if pool.size < k:
            raise InsufficientClassError(class_id, int(pool.size), k)
        chosen = rng.choice(pool, size=k, replace=False)
        chosen.sort()
        rows, cols = np.unravel_index(chosen, mask.classes.shape)
        points.extend((int(r), int(c), class_id) for r, c in zip(rows, cols))
    return SparseLabel(points, scheme=Scheme.POINT_N10)


def _line_pixels(r0: int, c0: int, r1: int, c1: int) -> list[tuple[int, int]]:
    """8-connected Bresenham walk from (r0, c0) to (r1, c1), inclusive."""
    pixels = []
    dr = -abs(r1 - r0)
    dc = abs(c1 - c0)
    sr = 1 if r0 < r1 else -1
    sc = 1 if c0 < c1 else -1
    err = dc + dr
    r, c = r0, c0
    while True:
        pixels.append((r, c))
        if r == r1 and c == c1:
            break
        e2 = 2 * err
        if e2 >= dr:
            err += dr
            c += sc
        if e2 <= dc:
            err += dc
            r += sr
    return pixels


def _dilate_chebyshev(pixels: set[tuple[int, int]], radius: int) -> set[tuple[int, int]]:
    out = set()
    offsets = range(-radius, radius + 1)
    for r, c in pixels:
        for dr in offsets:
            for dc in offsets:
                out.add((r + dr, c + dc))
    return out


def rasterize_squiggles(
    squiggles: SquiggleSet, height: int, width: int
) -> dict[int, set[tuple[int, int]]]:
    """Rasterize strokes to per-class pixel sets.

    Each polyline is walked segment by segment with an 8-connected line,
    dilated by the stroke radius (Chebyshev disc), and clipped to bounds.
    A pixel claimed by strokes of both classes goes to the later stroke.
    """
    squiggles.check_bounds(height, width)
    claim: dict[tuple[int, int], int] = {}
    for stroke in squiggles.strokes:
        covered = {stroke.polyline[0]}
        for (r0, c0), (r1, c1) in zip(stroke.polyline, stroke.polyline[1:]):
            covered.update(_line_pixels(r0, c0, r1, c1))
        if stroke.radius > 0:
            covered = _dilate_chebyshev(covered, stroke.radius)
        for r, c in covered:
            if 0 <= r < height and 0 <= c < width:
                claim[(r, c)] = stroke.class_id
    out: dict[int, set[tuple[int, int]]] = {BACKGROUND: set(), SHIP: set()}
    for pixel, class_id in claim.items():
        out[class_id].add(pixel)
    return out


def _largest_remainder_quotas(n: int, counts: dict[int, int]) -> dict[int, int]:
    """Split n across classes proportionally to counts.

    Largest-remainder rounding so quotas sum to n, with a floor of one per
    class and quotas capped by each class's pixel count.
    """
    total = sum(counts.values())
    quotas = {k: (n * c) // total for k, c in counts.items()}
    remainders = {k: (n * c) % total for k, c in counts.items()}
    leftover = n - sum(quotas.values())
    for k in sorted(counts, key=lambda k: (-remainders[k], k))[:leftover]:
        quotas[k] += 1
    # every class contributes at least one point
    for k in sorted(quotas):
        if quotas[k] == 0:
            donor = max(quotas, key=lambda j: (quotas[j], -j))
            quotas[donor] -= 1
            quotas[k] = 1
    # a quota cannot exceed the class's pool; push the excess to the others
    for k in sorted(quotas):
        excess = quotas[k] - counts[k]
        if excess <= 0:
            continue
        quotas[k] = counts[k]
        for j in sorted(quotas, key=lambda j: (counts[j] - quotas[j]), reverse=True):
            if j == k or excess == 0 or counts[j] <= quotas[j]:
                continue
            move = min(excess, counts[j] - quotas[j])
            quotas[j] += move
            excess -= move
    return quotas


def sample_from_squiggles(
    squiggles: SquiggleSet, n: int, height: int, width: int, seed: int
) -> SparseLabel:
    """Draw n points from rasterized squiggles, weighted by class pixel share.

    Per-class quotas follow the largest-remainder rule with at least one
    point per class; points are drawn uniformly without replacement within
    each class's pixel set. When the strokes rasterize to fewer than n
    pixels overall, every pixel is returned.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    raster = rasterize_squiggles(squiggles, height, width)
    for class_id in CLASS_IDS:
        if not raster[class_id]:
            raise MissingClassError(class_id)
    counts = {k: len(v) for k, v in raster.items()}
    quotas = _largest_remainder_quotas(n, counts)
    rng = np.random.default_rng(seed)
    points = []
    for class_id in CLASS_IDS:
        pool = sorted(raster[class_id])
        idx = rng.choice(len(pool), size=quotas[class_id], replace=False)
        idx.sort()
        points.extend((pool[i][0], pool[i][1], class_id) for i in idx)
    return SparseLabel(points, scheme=Scheme.SQUIGGLE_N32)
