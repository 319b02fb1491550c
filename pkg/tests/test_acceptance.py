"""Acceptance suite.

Each test prints one pass/fail line. The two training criteria run the
full desk-scale pipeline and dominate the suite's runtime.
"""

import math
import time
import zlib
from contextlib import contextmanager

import numpy as np
import pytest

from shipseg.augment import GeomParams, apply_geometric
from shipseg.losses import PROB_CLAMP, pwce_loss, pwce_loss_grad
from shipseg.metrics import REPORT_COLUMNS, MetricsReport, MetricsRow, evaluate_set, jaccard
from shipseg.model import ModelConfig
from shipseg.sampling import mask_dense_labels, sample_from_squiggles
from shipseg.synthetic import SyntheticSpec, generate_synthetic, simulate_squiggles
from shipseg.training import DatasetItem, TrainConfig, evaluate, pretrain_then_finetune, train
from shipseg.types import (
    DenseMask,
    ImageSample,
    Prediction,
    Scheme,
    SparseLabel,
    SquiggleSet,
    Stroke,
    build_eval_mask,
)


@contextmanager
def criterion(name):
    start = time.time()
    try:
        yield
    except BaseException:
        print(f"[acceptance] {name}: FAIL ({time.time() - start:.1f}s)")
        raise
    print(f"[acceptance] {name}: PASS ({time.time() - start:.1f}s)")


def crc_seed(image_id: str) -> int:
    return zlib.crc32(image_id.encode("utf-8")) & 0xFFFFFFFF


# -- 1. loss correctness -------------------------------------------------------


def dense_ce_oracle(probs, classes):
    total = 0.0
    h, w = classes.shape
    for r in range(h):
        for c in range(w):
            total += -math.log(max(float(probs[r, c, classes[r, c]]), PROB_CLAMP))
    return total / (h * w)


def test_loss_correctness():
    with criterion("loss-correctness"):
        start = time.time()
        rng = np.random.default_rng(0)
        for _ in range(100):
            ship = rng.uniform(0.01, 0.99, size=(16, 16))
            probs = np.stack([1.0 - ship, ship], axis=2)
            classes = rng.integers(0, 2, size=(16, 16))
            points = [(r, c, int(classes[r, c])) for r in range(16) for c in range(16)]
            label = SparseLabel(points)
            mask = build_eval_mask(label, 16, 16)
            got = pwce_loss(Prediction(probs), label, mask)
            assert abs(got - dense_ce_oracle(probs, classes)) < 1e-6
        half = Prediction(np.full((16, 16, 2), 0.5))
        point = SparseLabel([(3, 3, 1)])
        loss = pwce_loss(half, point, build_eval_mask(point, 16, 16))
        assert abs(loss - math.log(2.0)) < 1e-9
        assert time.time() - start < 10.0


# -- 2. mask-gradient zeroing ----------------------------------------------------


def test_mask_gradient_zeroing():
    with criterion("mask-gradient-zeroing"):
        start = time.time()
        rng = np.random.default_rng(1)
        ship = rng.uniform(0.2, 0.8, size=(8, 8))
        probs = np.stack([1.0 - ship, ship], axis=2)
        points = [(0, 0, 1), (2, 5, 0), (4, 4, 1), (7, 7, 0), (6, 1, 1), (3, 3, 0)]
        label = SparseLabel(points)
        mask = build_eval_mask(label, 8, 8)
        analytic = pwce_loss_grad(Prediction(probs), label, mask)

        def raw_loss(p):
            total = 0.0
            for r, c, k in points:
                total += -math.log(min(max(float(p[r, c, k]), PROB_CLAMP), 1.0))
            return total / len(points)

        h = 1e-4
        annotated = {(r, c, k) for r, c, k in points}
        for r in range(8):
            for c in range(8):
                for k in range(2):
                    plus = probs.copy()
                    minus = probs.copy()
                    plus[r, c, k] += h
                    minus[r, c, k] -= h
                    fd = (raw_loss(plus) - raw_loss(minus)) / (2 * h)
                    if (r, c, k) in annotated:
                        rel = abs(analytic[r, c, k] - fd) / abs(fd)
                        assert rel < 1e-3
                    else:
                        assert abs(fd) < 1e-8
                        assert analytic[r, c, k] == 0.0
        assert time.time() - start < 60.0


# -- 3. jaccard oracle ------------------------------------------------------------


def test_jaccard_oracle():
    with criterion("jaccard-oracle"):
        rng = np.random.default_rng(2)

        def oracle(a, b):
            sa = {(r, c) for r in range(8) for c in range(8) if a[r, c]}
            sb = {(r, c) for r in range(8) for c in range(8) if b[r, c]}
            if not sa and not sb:
                return 1.0
            return len(sa & sb) / len(sa | sb)

        for _ in range(1000):
            a = (rng.random((8, 8)) > rng.random()).astype(np.uint8)
            b = (rng.random((8, 8)) > rng.random()).astype(np.uint8)
            assert abs(jaccard(DenseMask(a), DenseMask(b)) - oracle(a, b)) < 1e-12
        same = DenseMask((rng.random((8, 8)) > 0.4).astype(np.uint8))
        assert jaccard(same, same) == 1.0
        left = np.zeros((8, 8), dtype=np.uint8)
        left[:, :4] = 1
        right = np.zeros((8, 8), dtype=np.uint8)
        right[:, 4:] = 1
        assert jaccard(DenseMask(left), DenseMask(right)) == 0.0


# -- 4. sampling distribution -------------------------------------------------------


def exact_split_squiggles(ship_px=300, background_px=100, width=100):
    strokes = []
    row = 0
    remaining = ship_px
    while remaining > 0:
        run = min(width, remaining)
        strokes.append(Stroke(class_id=1, polyline=[(row, 0), (row, run - 1)], radius=0))
        remaining -= run
        row += 1
    row += 2
    remaining = background_px
    while remaining > 0:
        run = min(width, remaining)
        strokes.append(Stroke(class_id=0, polyline=[(row, 0), (row, run - 1)], radius=0))
        remaining -= run
        row += 1
    return SquiggleSet(strokes)


def test_sampling_distribution():
    with criterion("sampling-distribution"):
        start = time.time()
        squiggles = exact_split_squiggles()
        fractions = []
        for seed in range(10_000):
            label = sample_from_squiggles(squiggles, 32, 20, 100, seed=seed)
            counts = label.class_counts()
            assert counts[0] + counts[1] == 32
            assert counts[0] >= 1 and counts[1] >= 1
            fractions.append(counts[1] / 32)
        mean_ship = float(np.mean(fractions))
        assert abs(mean_ship - 0.75) < 0.02
        assert abs((1.0 - mean_ship) - 0.25) < 0.02
        assert time.time() - start < 30.0


# -- 5. masking arithmetic ------------------------------------------------------------


def test_masking_arithmetic():
    with criterion("masking-arithmetic"):
        classes = np.zeros((10, 10), dtype=np.uint8)
        classes[:5] = 1
        mask = DenseMask(classes)
        for seed in range(1000):
            label, eval_mask = mask_dense_labels(mask, 0.90, seed=seed)
            assert len(label.points) == 10
            assert eval_mask.popcount == 10


# -- 6. augmentation coherence -----------------------------------------------------------


def test_augmentation_coherence():
    with criterion("augmentation-coherence"):
        rng = np.random.default_rng(3)
        rotations = [0.0, 90.0, 180.0, 270.0]
        for case in range(200):
            h = int(rng.integers(20, 48))
            w = int(rng.integers(20, 48))
            image = ImageSample(f"a{case}", rng.random((h, w), dtype=np.float32))
            classes = np.zeros((h, w), dtype=np.uint8)
            cr, cc = int(rng.integers(6, h - 6)), int(rng.integers(6, w - 6))
            rr, cc_grid = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
            classes[(rr - cr) ** 2 + (cc_grid - cc) ** 2 <= 20] = 1
            mask = DenseMask(classes)
            points = []
            for k in (0, 1):
                pool = np.argwhere(classes == k)
                idx = rng.choice(len(pool), size=3, replace=False)
                points.extend((int(pool[i][0]), int(pool[i][1]), k) for i in idx)
            sparse = SparseLabel(points)
            params = GeomParams(
                rotation_degrees=rotations[int(rng.integers(0, 4))],
                flip_h=bool(rng.integers(0, 2)),
                flip_v=bool(rng.integers(0, 2)),
            )
            _, mask2, sparse2 = apply_geometric(image, mask, sparse, params)
            assert sparse2 is not None and len(sparse2.points) == len(points)
            for r, c, k in sparse2.points:
                assert mask2.classes[r, c] == k


# -- 7. end-to-end desk-scale run ----------------------------------------------------------


def desk_fixture():
    spec = SyntheticSpec(
        count=200,
        height=128,
        width=128,
        noise_sigma=0.05,
        polarity_mix={"white_hot": 0.5, "black_hot": 0.5},
    )
    pairs = generate_synthetic(spec, seed=1234)
    return pairs[:180], pairs[180:]


def test_end_to_end_desk_scale():
    with criterion("end-to-end-desk-scale"):
        start = time.time()
        train_pairs, holdout = desk_fixture()
        assert len(holdout) == 20

        sparse_items = []
        for image, mask in train_pairs:
            seed = crc_seed(image.id)
            squiggles = simulate_squiggles(mask, seed=seed)
            label = sample_from_squiggles(squiggles, 32, image.height, image.width, seed=seed)
            assert label.scheme == Scheme.SQUIGGLE_N32
            sparse_items.append(DatasetItem(image, sparse=label))
        dense_items = [DatasetItem(image, dense=mask) for image, mask in train_pairs]

        model_cfg = ModelConfig(depth=3, base_channels=16)
        sparse_cfg = TrainConfig(
            epochs=20, batch_size=8, learning_rate=1e-3, split_ratio=0.9,
            seed=0, supervision="squiggle_n32", model=model_cfg,
        )
        dense_cfg = TrainConfig(
            epochs=20, batch_size=8, learning_rate=1e-3, split_ratio=0.9,
            seed=0, supervision="dense", model=model_cfg,
        )
        sparse_model, _ = train(sparse_cfg, sparse_items)
        sparse_j = evaluate(sparse_model, holdout, supervision="Squiggle (n=32)").rows[0].jaccard
        dense_model, _ = train(dense_cfg, dense_items)
        dense_j = evaluate(dense_model, holdout, supervision="Dense").rows[0].jaccard

        elapsed = time.time() - start
        print(
            f"[acceptance]   squiggle J={sparse_j:.3f}, dense J={dense_j:.3f}, "
            f"gap={dense_j - sparse_j:.3f}, {elapsed:.0f}s"
        )
        assert sparse_j >= 0.60
        assert dense_j - sparse_j < 0.15
        assert elapsed <= 15 * 60


# -- 8. transfer-learning direction ------------------------------------------------------------


def transfer_fixtures(seed):
    vis_spec = SyntheticSpec(
        count=40, height=64, width=64, axis_min=4, axis_max=10,
        noise_sigma=0.05, polarity_mix={"visible": 1.0},
    )
    ir_spec = SyntheticSpec(
        count=50, height=64, width=64, axis_min=4, axis_max=10,
        noise_sigma=0.05, polarity_mix={"white_hot": 0.6, "black_hot": 0.4},
    )
    visible = generate_synthetic(vis_spec, seed=seed * 1000 + 1)
    infrared = generate_synthetic(ir_spec, seed=seed * 1000 + 2)
    ir_train, holdout = infrared[:40], infrared[40:]
    dense = [DatasetItem(image, dense=mask) for image, mask in visible]
    sparse = []
    for image, mask in ir_train:
        s = crc_seed(image.id) ^ seed
        squiggles = simulate_squiggles(mask, seed=s)
        sparse.append(
            DatasetItem(image, sparse=sample_from_squiggles(squiggles, 32, 64, 64, seed=s))
        )
    return dense, sparse, holdout


def test_transfer_learning_direction():
    with criterion("transfer-learning-direction"):
        model_cfg = ModelConfig(depth=2, base_channels=8)
        wins = 0
        for seed in range(5):
            dense, sparse, holdout = transfer_fixtures(seed)
            pretrain_cfg = TrainConfig(
                epochs=16, batch_size=8, learning_rate=3e-3, seed=seed,
                supervision="dense", model=model_cfg,
            )
            finetune_cfg = TrainConfig(
                epochs=14, batch_size=8, learning_rate=3e-3, seed=seed,
                supervision="squiggle_n32", model=model_cfg,
            )
            transferred, _, _ = pretrain_then_finetune(pretrain_cfg, finetune_cfg, dense, sparse)
            baseline, _ = train(finetune_cfg, sparse)  # same finetune epochs, fresh weights
            j_transfer = evaluate(transferred, holdout).rows[0].jaccard
            j_fresh = evaluate(baseline, holdout).rows[0].jaccard
            wins += j_transfer >= j_fresh
            print(f"[acceptance]   seed {seed}: pretrained {j_transfer:.3f} vs fresh {j_fresh:.3f}")
        assert wins >= 3


# -- 9. report format ------------------------------------------------------------------------


def test_report_format():
    with criterion("report-format"):
        truth = DenseMask(np.eye(16, dtype=np.uint8))
        probs = np.stack([1.0 - truth.classes, truth.classes.astype(float)], axis=2)
        report = evaluate_set(
            [Prediction(probs)], [truth],
            supervision="Squiggle (n=32)", augmentations="Grayscale and Inversion",
        )
        table = report.render_table()
        lines = table.splitlines()
        header = [cell.strip() for cell in lines[0].split("|")]
        assert header == ["Supervision", "Augmentations", "Precision", "Recall", "Jaccard Score"]
        assert list(REPORT_COLUMNS) == header
        row = [cell.strip() for cell in lines[1].split("|")]
        assert row[0] == "Squiggle (n=32)"
        assert row[1] == "Grayscale and Inversion"
        # values render like the published tables: .979 style
        sample = MetricsReport(
            [MetricsRow("Squiggle (n=32)", "Grayscale and Inversion", 0.979, 0.978, 0.756)]
        ).render_table().splitlines()[1]
        cells = [cell.strip() for cell in sample.split("|")]
        assert cells[2:] == [".979", ".978", ".756"]
