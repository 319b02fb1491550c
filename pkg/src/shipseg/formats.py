"""Persistent raster formats: run-length text and 8-bit mask PNGs.

The run-length convention is row-major, 1-indexed "start length" pairs,
whitespace separated, sorted by start and non-overlapping. Dense masks are
stored as 8-bit single-channel PNGs with background 0 and ship 255.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .errors import BoundsError, FormatError, OverlapError, ParseError
from .types import SHIP, DenseMask


def decode_rle(rle_text: str, height: int, width: int) -> DenseMask:
    """Decode run-length text into a dense mask. Empty text is all background."""
    tokens = rle_text.split()
    if len(tokens) % 2:
        raise ParseError(f"odd token count ({len(tokens)})")
    try:
        values = [int(t) for t in tokens]
    except ValueError:
        raise ParseError("non-integer token in run-length text") from None
    flat = np.zeros(height * width, dtype=np.uint8)
    prev_end = 0  # exclusive 1-indexed end of the previous run
    for start, length in zip(values[::2], values[1::2]):
        if start < 1 or length < 1:
            raise ParseError(f"run ({start}, {length}) must have positive start and length")
        if start <= prev_end:
            raise OverlapError(f"run at {start} overlaps the previous run or is out of order")
        end = start + length - 1
        if end > height * width:
            raise BoundsError(f"run ({start}, {length}) exceeds {height * width} pixels")
        flat[start - 1 : end] = SHIP
        prev_end = end
    return DenseMask(flat.reshape(height, width))


def encode_rle(mask: DenseMask) -> str:
    """Extract row-major ship runs as canonical "start length" pairs."""
    flat = mask.classes.reshape(-1)
    edges = np.flatnonzero(np.diff(np.concatenate(([0], flat, [0]))))
    parts = [f"{s + 1} {e - s}" for s, e in zip(edges[::2], edges[1::2])]
    return " ".join(parts)


def save_dense_mask_png(mask: DenseMask, path: str | Path) -> None:
    img = Image.fromarray(mask.classes * np.uint8(255), mode="L")
    img.save(path, format="PNG")


def load_dense_mask_png(path: str | Path) -> DenseMask:
    """Load a {0, 255} single-channel PNG as a dense mask."""
    with Image.open(path) as img:
        if img.format != "PNG":
            raise FormatError(f"expected a PNG file, got {img.format}")
        if img.mode != "L":
            raise FormatError(f"expected an 8-bit single-channel PNG, got mode {img.mode}")
        arr = np.asarray(img)
    bad = ~np.isin(arr, (0, 255))
    if bad.any():
        r, c = np.argwhere(bad)[0]
        raise ValueError(f"pixel ({r}, {c}) has value {arr[r, c]}, expected 0 or 255")
    return DenseMask((arr == 255).astype(np.uint8))
