"""On-disk dataset layout.

A dataset directory holds a manifest plus one PNG per image and,
optionally, per dense mask:

    <dir>/dataset.json          {"images": [{"id", "polarity", "source",
                                 "image": "images/<id>.png",
                                 "mask": "masks/<id>.png"?}, ...]}
    <dir>/images/<id>.png       8-bit grayscale or RGB
    <dir>/masks/<id>.png        dense masks, {0, 255}
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image

from .errors import FormatError
from .formats import load_dense_mask_png, save_dense_mask_png
from .types import DenseMask, ImageSample, Polarity, Source

MANIFEST_NAME = "dataset.json"


def save_image_png(pixels: np.ndarray, path: str | Path) -> None:
    quantized = np.clip(np.round(pixels * 255.0), 0, 255).astype(np.uint8)
    mode = "L" if quantized.ndim == 2 else "RGB"
    Image.fromarray(quantized, mode=mode).save(path, format="PNG")


def load_image_png(path: str | Path) -> np.ndarray:
    with Image.open(path) as img:
        if img.mode not in ("L", "RGB"):
            raise FormatError(f"expected an 8-bit grayscale or RGB PNG, got mode {img.mode}")
        arr = np.asarray(img, dtype=np.float32) / 255.0
    return arr


def save_dataset(
    pairs: list[tuple[ImageSample, Optional[DenseMask]]], out_dir: str | Path
) -> None:
    out = Path(out_dir)
    (out / "images").mkdir(parents=True, exist_ok=True)
    entries = []
    for image, mask in pairs:
        rel_image = f"images/{image.id}.png"
        save_image_png(image.pixels, out / rel_image)
        entry = {
            "id": image.id,
            "polarity": image.polarity.value,
            "source": image.source.value,
            "image": rel_image,
        }
        if mask is not None:
            (out / "masks").mkdir(exist_ok=True)
            rel_mask = f"masks/{image.id}.png"
            save_dense_mask_png(mask, out / rel_mask)
            entry["mask"] = rel_mask
        entries.append(entry)
    manifest = {"images": entries}
    (out / MANIFEST_NAME).write_text(json.dumps(manifest, indent=2, sort_keys=True))


def load_dataset(
    directory: str | Path, require_masks: bool = False
) -> list[tuple[ImageSample, Optional[DenseMask]]]:
    root = Path(directory)
    manifest_path = root / MANIFEST_NAME
    if not manifest_path.exists():
        raise FileNotFoundError(f"no {MANIFEST_NAME} in {root}")
    manifest = json.loads(manifest_path.read_text())
    pairs = []
    seen = set()
    for entry in manifest["images"]:
        image_id = entry["id"]
        if image_id in seen:
            raise ValueError(f"duplicate image id {image_id!r} in manifest")
        seen.add(image_id)
        pixels = load_image_png(root / entry["image"])
        image = ImageSample(
            image_id,
            pixels,
            polarity=Polarity(entry.get("polarity", "white_hot")),
            source=Source(entry.get("source", "synthetic")),
        )
        mask = None
        if "mask" in entry:
            mask = load_dense_mask_png(root / entry["mask"])
            if (mask.height, mask.width) != (image.height, image.width):
                raise ValueError(f"mask shape mismatch for image {image_id!r}")
        elif require_masks:
            raise ValueError(f"image {image_id!r} has no dense mask")
        pairs.append((image, mask))
    return pairs
