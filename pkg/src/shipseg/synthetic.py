"""Synthetic maritime fixtures: elliptical "ships" over noisy water.

Stands in for private flight data. White-hot images render ships bright
on a dark background, black-hot the reverse, and visible images are RGB
with grayish hulls on blue-gray water. The dense mask marks ellipse
interiors exactly. A small annotator simulator draws squiggle strokes as
random walks inside each class region so the squiggle pipeline can run
end to end without humans.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SpecError
from .types import (
    BACKGROUND,
    SHIP,
    DenseMask,
    ImageSample,
    Polarity,
    Source,
    SquiggleSet,
    Stroke,
)

SHIP_LEVEL = 0.85
BACKGROUND_LEVEL = 0.20
VISIBLE_WATER = (0.15, 0.25, 0.40)
VISIBLE_HULL = (0.75, 0.72, 0.70)


@dataclass
class SyntheticSpec:
    count: int = 200
    height: int = 128
    width: int = 128
    ships_min: int = 1
    ships_max: int = 3
    axis_min: float = 5.0
    axis_max: float = 18.0
    noise_sigma: float = 0.05
    polarity_mix: dict[str, float] = field(
        default_factory=lambda: {"white_hot": 0.5, "black_hot": 0.5}
    )

    def __post_init__(self):
        if self.count < 1:
            raise SpecError("count must be >= 1")
        if self.height < 16 or self.width < 16:
            raise SpecError("images must be at least 16x16")
        if not 1 <= self.ships_min <= self.ships_max:
            raise SpecError("need 1 <= ships_min <= ships_max")
        if not 0 < self.axis_min <= self.axis_max:
            raise SpecError("need 0 < axis_min <= axis_max")
        if self.axis_max * 2 >= min(self.height, self.width):
            raise SpecError("ellipse axes too large for the image size")
        if self.noise_sigma < 0:
            raise SpecError("noise_sigma must be >= 0")
        valid = {p.value for p in Polarity}
        for key, weight in self.polarity_mix.items():
            if key not in valid:
                raise SpecError(f"unknown polarity {key!r}")
            if weight < 0:
                raise SpecError("polarity weights must be >= 0")
        if sum(self.polarity_mix.values()) <= 0:
            raise SpecError("polarity weights must sum to a positive value")


def ellipse_mask(
    height: int, width: int, cr: float, cc: float, a: float, b: float
) -> np.ndarray:
    """Boolean raster of ((r-cr)/a)^2 + ((c-cc)/b)^2 <= 1."""
    rr, cc_grid = np.meshgrid(
        np.arange(height, dtype=np.float64), np.arange(width, dtype=np.float64), indexing="ij"
    )
    return ((rr - cr) / a) ** 2 + ((cc_grid - cc) / b) ** 2 <= 1.0


def generate_synthetic(spec: SyntheticSpec, seed: int) -> list[tuple[ImageSample, DenseMask]]:
    """Deterministic dataset of (image, dense mask) pairs."""
    rng = np.random.default_rng(seed)
    names = sorted(spec.polarity_mix)
    weights = np.array([spec.polarity_mix[n] for n in names], dtype=np.float64)
    weights = weights / weights.sum()
    pairs = []
    for index in range(spec.count):
        polarity = Polarity(rng.choice(names, p=weights))
        n_ships = int(rng.integers(spec.ships_min, spec.ships_max + 1))
        ship = np.zeros((spec.height, spec.width), dtype=bool)
        for _ in range(n_ships):
            a = float(rng.uniform(spec.axis_min, spec.axis_max))
            b = float(rng.uniform(spec.axis_min, spec.axis_max))
            cr = float(rng.uniform(a, spec.height - 1 - a))
            cc = float(rng.uniform(b, spec.width - 1 - b))
            ship |= ellipse_mask(spec.height, spec.width, cr, cc, a, b)
        if polarity == Polarity.VISIBLE:
            pixels = np.empty((spec.height, spec.width, 3), dtype=np.float64)
            for ch in range(3):
                pixels[:, :, ch] = np.where(ship, VISIBLE_HULL[ch], VISIBLE_WATER[ch])
        else:
            hot, cold = SHIP_LEVEL, BACKGROUND_LEVEL
            if polarity == Polarity.BLACK_HOT:
                hot, cold = cold, hot
            pixels = np.where(ship, hot, cold).astype(np.float64)
        if spec.noise_sigma > 0:
            pixels = pixels + rng.normal(0.0, spec.noise_sigma, size=pixels.shape)
        pixels = np.clip(pixels, 0.0, 1.0).astype(np.float32)
        image = ImageSample(
            f"synth-{index:05d}", pixels, polarity=polarity, source=Source.SYNTHETIC
        )
        pairs.append((image, DenseMask(ship.astype(np.uint8))))
    return pairs


def _erode_chebyshev(region: np.ndarray, radius: int) -> np.ndarray:
    """Pixels whose whole (2r+1)^2 neighborhood lies inside the region."""
    if radius == 0:
        return region
    h, w = region.shape
    padded = np.zeros((h + 2 * radius, w + 2 * radius), dtype=bool)
    padded[radius : radius + h, radius : radius + w] = region
    out = np.ones_like(region)
    for dr in range(-radius, radius + 1):
        for dc in range(-radius, radius + 1):
            out &= padded[radius + dr : radius + dr + h, radius + dc : radius + dc + w]
    return out


def _polyline_stroke(
    region: np.ndarray,
    rng: np.random.Generator,
    segments: int,
    within: np.ndarray | None = None,
    tries: int = 20,
) -> list[tuple[int, int]]:
    """A polyline of random waypoints from ``region`` whose connecting
    lines stay inside ``within`` (defaults to the region itself); stops
    early when no valid continuation is found."""
    from .sampling import _line_pixels

    if within is None:
        within = region
    candidates = np.argwhere(region)
    start = candidates[rng.integers(0, len(candidates))]
    vertices = [(int(start[0]), int(start[1]))]
    for _ in range(segments):
        for _ in range(tries):
            pick = candidates[rng.integers(0, len(candidates))]
            nxt = (int(pick[0]), int(pick[1]))
            if nxt == vertices[-1]:
                continue
            if all(within[r, c] for r, c in _line_pixels(*vertices[-1], *nxt)):
                vertices.append(nxt)
                break
        else:
            break
    return vertices


def simulate_squiggles(
    mask: DenseMask,
    seed: int,
    strokes_per_class: int = 2,
    segments_per_stroke: int = 3,
    radius: int = 1,
) -> SquiggleSet:
    """Annotator stand-in: polyline strokes drawn inside each class region.

    Waypoints are drawn uniformly from the region, eroded so the dilated
    stroke cannot leak into the other class, and connected only when the
    whole segment stays inside. Stroke extent thus scales with region
    size the way human squiggles do: short marks on ships, sweeping lines
    across the background. Falls back to radius 0 when a region is too
    thin to erode.
    """
    rng = np.random.default_rng(seed)
    strokes = []
    for class_id in (SHIP, BACKGROUND):
        region = mask.classes == class_id
        if not region.any():
            continue
        eroded = _erode_chebyshev(region, radius)
        stroke_radius = radius
        if not eroded.any():
            eroded = region
            stroke_radius = 0
        pools = [eroded] * strokes_per_class
        if class_id == BACKGROUND:
            # annotators outline ships with a nearby background squiggle
            ship_region = mask.classes == SHIP
            band = ~_erode_chebyshev(~ship_region, 4) & eroded
            if band.any():
                pools[0] = band
        for pool in pools:
            path = _polyline_stroke(pool, rng, segments_per_stroke, within=eroded)
            strokes.append(Stroke(class_id=class_id, polyline=path, radius=stroke_radius))
    return SquiggleSet(strokes)
