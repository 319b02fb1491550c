import numpy as np
import pytest

from shipseg.augment import (
    AugmentConfig,
    GeomParams,
    apply_geometric,
    geometric_transform,
    invert,
    random_invert,
    to_grayscale,
)
from shipseg.types import DenseMask, ImageSample, Polarity, Scheme, SparseLabel


def checker_image(h=24, w=32, seed=0):
    rng = np.random.default_rng(seed)
    return ImageSample(f"img-{seed}", rng.random((h, w), dtype=np.float32))


def blob_mask(h=24, w=32, seed=0):
    rng = np.random.default_rng(seed + 100)
    classes = np.zeros((h, w), dtype=np.uint8)
    cr, cc = rng.integers(6, h - 6), rng.integers(6, w - 6)
    rr, cc_grid = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    classes[(rr - cr) ** 2 + (cc_grid - cc) ** 2 <= 25] = 1
    return DenseMask(classes)


def points_from_mask(mask, per_class=4, seed=0):
    rng = np.random.default_rng(seed + 200)
    points = []
    for k in (0, 1):
        pool = np.argwhere(mask.classes == k)
        idx = rng.choice(len(pool), size=per_class, replace=False)
        points.extend((int(pool[i][0]), int(pool[i][1]), k) for i in idx)
    return SparseLabel(points, scheme=Scheme.POINT_N10)


def test_identity_params_are_identity():
    image = checker_image()
    mask = blob_mask()
    sparse = points_from_mask(mask)
    img2, mask2, sparse2 = apply_geometric(image, mask, sparse, GeomParams())
    assert np.array_equal(img2.pixels, image.pixels)
    assert np.array_equal(mask2.classes, mask.classes)
    assert sparse2.points == sparse.points


def test_90_degree_rotation_matches_rot90_oracle():
    image = checker_image()
    mask = blob_mask()
    sparse = points_from_mask(mask)
    h, w = image.height, image.width
    img2, mask2, sparse2 = apply_geometric(image, mask, sparse, GeomParams(rotation_degrees=90.0))
    # point map contract: (r, c) -> (c, H-1-r)
    expected_points = sorted((c, h - 1 - r, k) for r, c, k in sparse.points)
    assert sorted(sparse2.points) == expected_points
    # independent array-rotation oracle
    oracle_mask = np.rot90(mask.classes, k=-1)
    assert np.array_equal(mask2.classes, oracle_mask)
    assert np.array_equal(img2.pixels, np.rot90(image.pixels, k=-1))
    # transformed classes agree at every mapped point
    for r, c, k in sparse2.points:
        assert mask2.classes[r, c] == k


@pytest.mark.parametrize(
    "params",
    [
        GeomParams(rotation_degrees=90.0),
        GeomParams(rotation_degrees=180.0),
        GeomParams(rotation_degrees=270.0),
        GeomParams(rotation_degrees=-90.0),
        GeomParams(flip_h=True),
        GeomParams(flip_v=True),
        GeomParams(rotation_degrees=180.0, flip_h=True),
        GeomParams(crop=(2, 3, 18, 20)),
        GeomParams(rotation_degrees=90.0, flip_v=True, crop=(1, 1, 20, 16)),
    ],
)
def test_exact_transforms_label_coherence(params):
    # sample-then-transform equals transform-then-read-class, exactly
    image = checker_image()
    mask = blob_mask()
    sparse = points_from_mask(mask)
    _, mask2, sparse2 = apply_geometric(image, mask, sparse, params)
    assert sparse2 is not None
    for r, c, k in sparse2.points:
        assert mask2.classes[r, c] == k


def test_exact_coherence_fuzz_200_cases():
    rng = np.random.default_rng(42)
    rotations = [0.0, 90.0, 180.0, 270.0]
    for case in range(200):
        h = int(rng.integers(20, 40))
        w = int(rng.integers(20, 40))
        image = checker_image(h, w, seed=case)
        mask = blob_mask(h, w, seed=case)
        sparse = points_from_mask(mask, per_class=3, seed=case)
        params = GeomParams(
            rotation_degrees=rotations[rng.integers(0, 4)],
            flip_h=bool(rng.integers(0, 2)),
            flip_v=bool(rng.integers(0, 2)),
        )
        _, mask2, sparse2 = apply_geometric(image, mask, sparse, params)
        assert sparse2 is not None and len(sparse2.points) == len(sparse.points)
        for r, c, k in sparse2.points:
            assert mask2.classes[r, c] == k


def _near_boundary(mask_classes, r, c, k):
    h, w = mask_classes.shape
    window = mask_classes[max(0, r - 1) : r + 2, max(0, c - 1) : c + 2]
    return (window != mask_classes[r, c]).any() or (window == k).any()


def test_affine_coherence_mostly_holds():
    rng = np.random.default_rng(7)
    checked = 0
    mismatched = 0
    for case in range(120):
        h = int(rng.integers(24, 48))
        w = int(rng.integers(24, 48))
        image = checker_image(h, w, seed=case)
        mask = blob_mask(h, w, seed=case)
        sparse = points_from_mask(mask, per_class=4, seed=case)
        params = GeomParams(
            rotation_degrees=float(rng.uniform(-30, 30)),
            scale=float(rng.uniform(0.85, 1.15)),
        )
        _, mask2, sparse2 = apply_geometric(image, mask, sparse, params)
        if sparse2 is None:
            continue
        for r, c, k in sparse2.points:
            checked += 1
            if mask2.classes[r, c] != k:
                mismatched += 1
                # any failure sits within one pixel of a class boundary
                assert _near_boundary(mask2.classes, r, c, k)
    assert checked > 400
    assert mismatched / checked <= 0.01


def test_crop_retains_all_classes_or_skips():
    image = checker_image(32, 32)
    # points pinned to opposite corners: no 16x16 window holds both
    sparse = SparseLabel([(0, 0, 1), (31, 31, 0)], scheme=Scheme.POINT_N10)
    config = AugmentConfig(rotation_degrees_max=0.0, scale_range=(1.0, 1.0), crop_size=(16, 16))
    img2, _, sparse2 = geometric_transform(image, None, sparse, config, seed=5)
    # crop skipped: output is the uncropped sample
    assert (img2.height, img2.width) == (32, 32)
    assert sorted(sparse2.points) == sorted(sparse.points)


def test_crop_applies_when_points_survive():
    image = checker_image(32, 32)
    sparse = SparseLabel([(15, 15, 1), (16, 16, 0)], scheme=Scheme.POINT_N10)
    config = AugmentConfig(rotation_degrees_max=0.0, scale_range=(1.0, 1.0), crop_size=(16, 16))
    img2, _, sparse2 = geometric_transform(image, None, sparse, config, seed=1)
    assert (img2.height, img2.width) == (16, 16)
    assert {k for _, _, k in sparse2.points} == {0, 1}


def test_geometric_transform_deterministic():
    image = checker_image()
    mask = blob_mask()
    config = AugmentConfig(seed=0)
    a = geometric_transform(image, mask, None, config, seed=77)
    b = geometric_transform(image, mask, None, config, seed=77)
    assert np.array_equal(a[0].pixels, b[0].pixels)
    assert np.array_equal(a[1].classes, b[1].classes)


def test_requires_some_labels():
    with pytest.raises(ValueError):
        geometric_transform(checker_image(), None, None, AugmentConfig(), seed=0)


# ---- photometric -----------------------------------------------------------


def test_grayscale_weights():
    white = ImageSample("w", np.ones((16, 16, 3), dtype=np.float32), polarity=Polarity.VISIBLE)
    gray = to_grayscale(white)
    assert gray.channels == 1
    assert gray.pixels[0, 0] == pytest.approx(1.0, abs=1e-6)
    red = np.zeros((16, 16, 3), dtype=np.float32)
    red[:, :, 0] = 1.0
    gray_red = to_grayscale(ImageSample("r", red, polarity=Polarity.VISIBLE))
    assert gray_red.pixels[0, 0] == pytest.approx(0.299, abs=1e-6)
    assert gray_red.polarity == Polarity.VISIBLE


def test_grayscale_idempotent():
    image = checker_image()
    assert to_grayscale(to_grayscale(image)) is to_grayscale(image)
    rgb = ImageSample("v", np.random.default_rng(0).random((16, 16, 3), dtype=np.float32))
    once = to_grayscale(rgb)
    twice = to_grayscale(once)
    assert np.array_equal(once.pixels, twice.pixels)


def test_invert_values_and_polarity():
    image = ImageSample("i", np.full((16, 16), 0.3, dtype=np.float32), polarity=Polarity.WHITE_HOT)
    flipped = random_invert(image, 1.0, seed=0)
    assert flipped.pixels[0, 0] == pytest.approx(0.7, abs=1e-7)
    assert flipped.polarity == Polarity.BLACK_HOT
    unchanged = random_invert(image, 0.0, seed=0)
    assert unchanged is image


def test_double_inversion_exact_on_dyadic_grid():
    # intensities on the 2^-24 grid complement exactly in float32
    rng = np.random.default_rng(3)
    image = ImageSample("d", rng.random((32, 32), dtype=np.float32), polarity=Polarity.BLACK_HOT)
    back = invert(invert(image))
    assert np.array_equal(back.pixels, image.pixels)
    assert back.polarity == image.polarity


def test_double_inversion_8bit_grid():
    levels = (np.arange(256, dtype=np.float64) / 255.0).astype(np.float32)
    pixels = np.tile(levels, (16, 1))[:, :256][:16, :16]
    pixels = levels[:256].reshape(16, 16)
    image = ImageSample("q", pixels, polarity=Polarity.WHITE_HOT)
    back = invert(invert(image))
    assert np.allclose(back.pixels, image.pixels, atol=1e-7)
    assert back.polarity == image.polarity


def test_invert_probability_frequency():
    image = checker_image()
    hits = sum(random_invert(image, 0.5, seed=s) is not image for s in range(2000))
    assert 850 < hits < 1150


def test_invert_rejects_multichannel():
    rgb = ImageSample("v", np.zeros((16, 16, 3), dtype=np.float32))
    with pytest.raises(ValueError):
        invert(rgb)
