"""Augmentations that keep image, dense mask, and point labels in sync.

One geometric map is sampled per item and applied to all three views:
bilinear resampling for the image, nearest-neighbor for the mask, and a
forward coordinate map (with rounding) for the points. Exact multiples of
90 degrees at scale 1 take a lossless array-permutation path so labels and
rasters stay coherent bit for bit. Photometric transforms (grayscale,
intensity inversion) cover the visible-to-infrared domain change.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .types import DenseMask, ImageSample, Polarity, SparseLabel


@dataclass
class AugmentConfig:
    rotation_degrees_max: float = 15.0
    scale_range: tuple[float, float] = (0.8, 1.2)
    crop_size: Optional[tuple[int, int]] = None
    enable_grayscale: bool = False
    invert_probability: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.scale_range is not None:
            self.scale_range = (float(self.scale_range[0]), float(self.scale_range[1]))
        if self.scale_range[0] <= 0:
            raise ValueError("scale_range lower bound must be positive")
        if self.scale_range[1] < self.scale_range[0]:
            raise ValueError("scale_range must be (lo, hi) with lo <= hi")
        if not 0.0 <= self.invert_probability <= 1.0:
            raise ValueError("invert_probability must lie in [0, 1]")
        if self.rotation_degrees_max < 0:
            raise ValueError("rotation_degrees_max must be >= 0")
        if self.crop_size is not None:
            ch, cw = self.crop_size
            if ch < 16 or cw < 16:
                raise ValueError("crop_size must be at least 16x16")
            self.crop_size = (int(ch), int(cw))


@dataclass
class GeomParams:
    """One concrete geometric map: rotation about center, uniform scale,
    optional flips, optional integer crop (top, left, height, width)."""

    rotation_degrees: float = 0.0
    scale: float = 1.0
    flip_v: bool = False
    flip_h: bool = False
    crop: Optional[tuple[int, int, int, int]] = None


def _is_exact(params: GeomParams) -> bool:
    return params.scale == 1.0 and params.rotation_degrees % 90.0 == 0.0


def _rot90_point(r: int, c: int, q: int, h: int, w: int) -> tuple[int, int]:
    # q quarter-turns matching np.rot90(arr, -q): q=1 sends (r, c) -> (c, h-1-r)
    if q == 1:
        return c, h - 1 - r
    if q == 2:
        return h - 1 - r, w - 1 - c
    if q == 3:
        return w - 1 - c, r
    return r, c


def _affine_resample(arr: np.ndarray, inv: np.ndarray, h_out: int, w_out: int, nearest: bool) -> np.ndarray:
    h_in, w_in = arr.shape[:2]
    rr, cc = np.meshgrid(
        np.arange(h_out, dtype=np.float64), np.arange(w_out, dtype=np.float64), indexing="ij"
    )
    dr = rr - (h_out - 1) / 2.0
    dc = cc - (w_out - 1) / 2.0
    src_r = (h_in - 1) / 2.0 + inv[0, 0] * dr + inv[0, 1] * dc
    src_c = (w_in - 1) / 2.0 + inv[1, 0] * dr + inv[1, 1] * dc
    if nearest:
        ri = np.clip(np.floor(src_r + 0.5).astype(np.int64), 0, h_in - 1)
        ci = np.clip(np.floor(src_c + 0.5).astype(np.int64), 0, w_in - 1)
        return arr[ri, ci]
    # bilinear; clamping the source coordinates replicates the edge
    src_r = np.clip(src_r, 0.0, h_in - 1.0)
    src_c = np.clip(src_c, 0.0, w_in - 1.0)
    r0 = np.floor(src_r).astype(np.int64)
    c0 = np.floor(src_c).astype(np.int64)
    r1 = np.minimum(r0 + 1, h_in - 1)
    c1 = np.minimum(c0 + 1, w_in - 1)
    fr = src_r - r0
    fc = src_c - c0
    if arr.ndim == 3:
        fr = fr[..., None]
        fc = fc[..., None]
    vals = arr.astype(np.float64)
    top = vals[r0, c0] * (1.0 - fc) + vals[r0, c1] * fc
    bot = vals[r1, c0] * (1.0 - fc) + vals[r1, c1] * fc
    return top * (1.0 - fr) + bot * fr


def _map_points(points, fwd, h_in, w_in, h_out, w_out):
    out, seen = [], set()
    cr_in, cc_in = (h_in - 1) / 2.0, (w_in - 1) / 2.0
    cr_out, cc_out = (h_out - 1) / 2.0, (w_out - 1) / 2.0
    for r, c, k in points:
        dr, dc = r - cr_in, c - cc_in
        rf = cr_out + fwd[0, 0] * dr + fwd[0, 1] * dc
        cf = cc_out + fwd[1, 0] * dr + fwd[1, 1] * dc
        ri = int(math.floor(rf + 0.5))
        ci = int(math.floor(cf + 0.5))
        if 0 <= ri < h_out and 0 <= ci < w_out and (ri, ci) not in seen:
            out.append((ri, ci, k))
            seen.add((ri, ci))
    return out


def apply_geometric(
    image: ImageSample,
    dense: Optional[DenseMask],
    sparse: Optional[SparseLabel],
    params: GeomParams,
) -> tuple[ImageSample, Optional[DenseMask], Optional[SparseLabel]]:
    """Apply one geometric map to the image and whichever labels are present.

    Points mapped out of bounds are dropped; if none survive, the sparse
    output is None. Rounding collisions keep the first point.
    """
    h, w = image.height, image.width
    if dense is not None and (dense.height, dense.width) != (h, w):
        raise ValueError("dense mask shape must match the image")
    if sparse is not None:
        sparse.check_bounds(h, w)

    pixels = image.pixels
    mask_arr = dense.classes if dense is not None else None
    points = list(sparse.points) if sparse is not None else None

    if _is_exact(params):
        q = int(round(params.rotation_degrees / 90.0)) % 4
        if q:
            pixels = np.rot90(pixels, -q, axes=(0, 1))
            if mask_arr is not None:
                mask_arr = np.rot90(mask_arr, -q)
            if points is not None:
                points = [(*_rot90_point(r, c, q, h, w), k) for r, c, k in points]
        h_out, w_out = (w, h) if q % 2 else (h, w)
    else:
        theta = math.radians(params.rotation_degrees)
        s = params.scale
        cos_t, sin_t = math.cos(theta), math.sin(theta)
        fwd = np.array([[cos_t, sin_t], [-sin_t, cos_t]], dtype=np.float64) * s
        inv = np.array([[cos_t, -sin_t], [sin_t, cos_t]], dtype=np.float64) / s
        h_out, w_out = h, w
        resampled = _affine_resample(pixels, inv, h_out, w_out, nearest=False)
        pixels = np.clip(resampled, 0.0, 1.0).astype(np.float32)
        if mask_arr is not None:
            mask_arr = _affine_resample(mask_arr, inv, h_out, w_out, nearest=True)
        if points is not None:
            points = _map_points(points, fwd, h, w, h_out, w_out)

    if params.flip_v:
        pixels = pixels[::-1]
        if mask_arr is not None:
            mask_arr = mask_arr[::-1]
        if points is not None:
            points = [(h_out - 1 - r, c, k) for r, c, k in points]
    if params.flip_h:
        pixels = pixels[:, ::-1]
        if mask_arr is not None:
            mask_arr = mask_arr[:, ::-1]
        if points is not None:
            points = [(r, w_out - 1 - c, k) for r, c, k in points]

    if params.crop is not None:
        top, left, ch, cw = params.crop
        if not (0 <= top and top + ch <= h_out and 0 <= left and left + cw <= w_out):
            raise ValueError(f"crop {params.crop} exceeds the {h_out}x{w_out} canvas")
        pixels = pixels[top : top + ch, left : left + cw]
        if mask_arr is not None:
            mask_arr = mask_arr[top : top + ch, left : left + cw]
        if points is not None:
            points = [
                (r - top, c - left, k)
                for r, c, k in points
                if top <= r < top + ch and left <= c < left + cw
            ]

    out_image = ImageSample(
        image.id, np.ascontiguousarray(pixels), polarity=image.polarity, source=image.source
    )
    out_dense = DenseMask(np.ascontiguousarray(mask_arr)) if mask_arr is not None else None
    out_sparse = None
    if points:
        out_sparse = SparseLabel(points, scheme=sparse.scheme)
    return out_image, out_dense, out_sparse


def geometric_transform(
    image: ImageSample,
    dense: Optional[DenseMask] = None,
    sparse: Optional[SparseLabel] = None,
    config: Optional[AugmentConfig] = None,
    seed: int = 0,
) -> tuple[ImageSample, Optional[DenseMask], Optional[SparseLabel]]:
    """Draw one rotation/scale/crop from the config and apply it coherently.

    A crop that would drop every surviving point of some class is re-drawn
    up to 8 times, then skipped for this sample.
    """
    if dense is None and sparse is None:
        raise ValueError("supply at least one of dense or sparse labels")
    config = config or AugmentConfig()
    rng = np.random.default_rng(seed)
    angle = float(rng.uniform(-config.rotation_degrees_max, config.rotation_degrees_max))
    scale = float(rng.uniform(config.scale_range[0], config.scale_range[1]))
    params = GeomParams(rotation_degrees=angle, scale=scale)
    out_image, out_dense, out_sparse = apply_geometric(image, dense, sparse, params)

    if config.crop_size is not None:
        ch, cw = config.crop_size
        if ch <= out_image.height and cw <= out_image.width:
            needed = {k for _, _, k in out_sparse.points} if out_sparse is not None else set()
            chosen = None
            for _ in range(9):  # initial draw plus up to 8 re-draws
                top = int(rng.integers(0, out_image.height - ch + 1))
                left = int(rng.integers(0, out_image.width - cw + 1))
                if out_sparse is None:
                    chosen = (top, left)
                    break
                kept = {
                    k
                    for r, c, k in out_sparse.points
                    if top <= r < top + ch and left <= c < left + cw
                }
                if needed <= kept:
                    chosen = (top, left)
                    break
            if chosen is not None:
                crop = (chosen[0], chosen[1], ch, cw)
                out_image, out_dense, out_sparse = apply_geometric(
                    out_image, out_dense, out_sparse, GeomParams(crop=crop)
                )
    return out_image, out_dense, out_sparse


def to_grayscale(image: ImageSample) -> ImageSample:
    """Collapse RGB to luma (0.299 R + 0.587 G + 0.114 B); grayscale passes through."""
    if image.channels == 1:
        return image
    weights = np.array([0.299, 0.587, 0.114], dtype=np.float64)
    gray = np.clip(image.pixels.astype(np.float64) @ weights, 0.0, 1.0).astype(np.float32)
    return ImageSample(image.id, gray, polarity=Polarity.VISIBLE, source=image.source)


_POLARITY_FLIP = {
    Polarity.WHITE_HOT: Polarity.BLACK_HOT,
    Polarity.BLACK_HOT: Polarity.WHITE_HOT,
}


def invert(image: ImageSample) -> ImageSample:
    """Map every intensity v to 1 - v and toggle white-hot/black-hot."""
    if image.channels != 1:
        raise ValueError("inversion is defined for single-channel images")
    flipped = np.float32(1.0) - image.pixels
    polarity = _POLARITY_FLIP.get(image.polarity, image.polarity)
    return ImageSample(image.id, flipped, polarity=polarity, source=image.source)


def random_invert(image: ImageSample, probability: float, seed: int) -> ImageSample:
    """Invert intensities with the given probability; deterministic per seed."""
    if not 0.0 <= probability <= 1.0:
        raise ValueError("probability must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    if rng.random() >= probability:
        return image
    return invert(image)
