"""Dataset splitting, the training loop, transfer learning, and evaluation.

Training minimizes the masked cross-entropy with Adam over epoch-shuffled
mini-batches. Dense supervision is the all-true-mask special case of the
sparse path. Validation loss is computed on the validation split's
annotated points only; the returned parameters are those of the epoch
with the lowest validation loss.
"""

from __future__ import annotations

import copy
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import torch

from .augment import AugmentConfig, geometric_transform, random_invert, to_grayscale
from .errors import (
    ConfigMismatchError,
    EmptyMaskError,
    LengthMismatchError,
    TooFewItemsError,
)
from .losses import masked_cross_entropy
from .metrics import MetricsReport, evaluate_set
from .model import ModelConfig, UNet, build_model, forward_probs, image_to_tensor, load_params, predict
from .types import DenseMask, ImageSample, SparseLabel

logger = logging.getLogger(__name__)

SUPERVISION_MODES = ("dense", "point_n10", "squiggle_n32", "masked_dense")


@dataclass
class TrainConfig:
    epochs: int = 40
    batch_size: int = 8
    learning_rate: float = 1e-3
    split_ratio: float = 0.9
    seed: int = 0
    supervision: str = "squiggle_n32"
    mask_fraction: float = 0.90
    augment: Optional[AugmentConfig] = None
    model: ModelConfig = field(default_factory=ModelConfig)
    pretrain_checkpoint: Optional[str] = None

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not 0.0 < self.split_ratio < 1.0:
            raise ValueError("split_ratio must lie in (0, 1)")
        if self.supervision not in SUPERVISION_MODES:
            raise ValueError(f"unknown supervision mode {self.supervision!r}")
        if not 0.0 <= self.mask_fraction < 1.0:
            raise ValueError("mask_fraction must lie in [0, 1)")


@dataclass
class DatasetItem:
    """One training sample: an image plus dense or sparse supervision."""

    image: ImageSample
    dense: Optional[DenseMask] = None
    sparse: Optional[SparseLabel] = None


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    val_loss: float
    skipped: int = 0


@dataclass
class TrainLog:
    epochs: list[EpochStats] = field(default_factory=list)
    best_epoch: int = -1

    def to_dict(self) -> dict:
        return {
            "best_epoch": self.best_epoch,
            "epochs": [
                {
                    "epoch": e.epoch,
                    "train_loss": e.train_loss,
                    "val_loss": e.val_loss,
                    "skipped": e.skipped,
                }
                for e in self.epochs
            ],
        }


def split_dataset(ids: list, ratio: float, seed: int) -> tuple[list, list]:
    """Deterministic shuffle, then a floor(ratio * N) prefix as train."""
    if len(ids) < 2:
        raise TooFewItemsError(f"need at least 2 ids, got {len(ids)}")
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(ids))
    shuffled = [ids[i] for i in order]
    n_train = int(math.floor(ratio * len(ids)))
    return shuffled[:n_train], shuffled[n_train:]


def _derived_seed(*keys: int) -> int:
    return int(np.random.SeedSequence(list(keys)).generate_state(1)[0])


def _to_model_channels(image: ImageSample, in_channels: int) -> ImageSample:
    if image.channels == 3 and in_channels == 1:
        return to_grayscale(image)
    return image


def _rasters_from_item(
    image: ImageSample, dense: Optional[DenseMask], sparse: Optional[SparseLabel]
) -> tuple[np.ndarray, np.ndarray]:
    if dense is not None:
        return dense.classes.astype(np.int64), np.ones(dense.classes.shape, dtype=bool)
    classes = np.zeros((image.height, image.width), dtype=np.int64)
    mask = np.zeros((image.height, image.width), dtype=bool)
    for r, c, k in sparse.points:
        classes[r, c] = k
        mask[r, c] = True
    return classes, mask


def _prepare_train_item(
    item: DatasetItem, config: TrainConfig, epoch: int, index: int
) -> Optional[tuple[torch.Tensor, torch.Tensor, torch.Tensor]]:
    """Augment one item and build its tensors; None means skip."""
    use_dense = config.supervision == "dense"
    image, dense, sparse = item.image, item.dense, item.sparse
    if use_dense and dense is None:
        raise ValueError(f"item {image.id!r} lacks a dense mask for dense supervision")
    if not use_dense and sparse is None:
        raise ValueError(f"item {image.id!r} lacks sparse labels for {config.supervision}")

    if config.augment is not None:
        seed = _derived_seed(config.seed, epoch, index)
        if use_dense:
            image, dense, _ = geometric_transform(image, dense, None, config.augment, seed)
        else:
            image, _, sparse = geometric_transform(image, None, sparse, config.augment, seed)
            if sparse is None:
                return None
    image = _to_model_channels(image, config.model.in_channels)
    if config.augment is not None and config.augment.invert_probability > 0 and image.channels == 1:
        image = random_invert(
            image, config.augment.invert_probability, _derived_seed(config.seed, epoch, index, 1)
        )
    classes, mask = _rasters_from_item(image, dense if use_dense else None, sparse)
    x = image_to_tensor(image, config.model.in_channels)
    return x, torch.from_numpy(classes), torch.from_numpy(mask)


def _validation_loss(model: UNet, items: list[DatasetItem], config: TrainConfig) -> float:
    use_dense = config.supervision == "dense"
    losses = []
    model.eval()
    with torch.no_grad():
        for item in items:
            image = _to_model_channels(item.image, config.model.in_channels)
            classes, mask = _rasters_from_item(
                image, item.dense if use_dense else None, item.sparse
            )
            x = image_to_tensor(image, config.model.in_channels).unsqueeze(0)
            probs = forward_probs(model, x)
            loss = masked_cross_entropy(
                probs, torch.from_numpy(classes).unsqueeze(0), torch.from_numpy(mask).unsqueeze(0)
            )
            losses.append(float(loss))
    return float(np.mean(losses))


def _batches(prepared: list, batch_size: int):
    """Greedy batches of same-shape items, preserving order."""
    batch = []
    for entry in prepared:
        if batch and (len(batch) >= batch_size or batch[-1][0].shape != entry[0].shape):
            yield batch
            batch = []
        batch.append(entry)
    if batch:
        yield batch


def train(
    config: TrainConfig, items: list[DatasetItem], initial: Optional[UNet] = None
) -> tuple[UNet, TrainLog]:
    """Optimize the masked cross-entropy; return the best-validation model."""
    if len(items) < 2:
        raise TooFewItemsError("training needs at least 2 items to split")
    train_idx, val_idx = split_dataset(list(range(len(items))), config.split_ratio, config.seed)
    if not train_idx:
        raise TooFewItemsError("split left no training items")
    train_items = [items[i] for i in train_idx]
    val_items = [items[i] for i in val_idx]

    if initial is not None:
        if initial.config != config.model:
            raise ConfigMismatchError(
                f"initial model config {initial.config.to_dict()} does not match {config.model.to_dict()}"
            )
        model = copy.deepcopy(initial)
    elif config.pretrain_checkpoint:
        model = load_params(config.pretrain_checkpoint, expected_config=config.model)
    else:
        model = build_model(config.model, config.seed)

    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    log = TrainLog()
    best_val = float("inf")
    best_state = copy.deepcopy(model.state_dict())

    for epoch in range(config.epochs):
        order = np.random.default_rng(_derived_seed(config.seed, epoch)).permutation(
            len(train_items)
        )
        prepared = []
        skipped = 0
        for index in order:
            entry = _prepare_train_item(train_items[index], config, epoch, int(index))
            if entry is None:
                skipped += 1
                logger.warning(
                    "epoch %d: skipping %s (no annotated points survived augmentation)",
                    epoch,
                    train_items[index].image.id,
                )
            else:
                prepared.append(entry)
        if not prepared:
            raise EmptyMaskError(f"epoch {epoch} skipped every training item")

        model.train()
        total_loss = 0.0
        total_count = 0
        for batch in _batches(prepared, config.batch_size):
            x = torch.stack([b[0] for b in batch])
            classes = torch.stack([b[1] for b in batch])
            mask = torch.stack([b[2] for b in batch])
            optimizer.zero_grad()
            probs = forward_probs(model, x)
            loss = masked_cross_entropy(probs, classes, mask)
            loss.backward()
            optimizer.step()
            total_loss += float(loss.detach()) * len(batch)
            total_count += len(batch)

        train_loss = total_loss / total_count
        val_loss = _validation_loss(model, val_items, config)
        log.epochs.append(EpochStats(epoch, train_loss, val_loss, skipped))
        if val_loss < best_val:
            best_val = val_loss
            best_state = copy.deepcopy(model.state_dict())
            log.best_epoch = epoch

    model.load_state_dict(best_state)
    model.eval()
    return model, log


def pretrain_then_finetune(
    pretrain_cfg: TrainConfig,
    finetune_cfg: TrainConfig,
    dense_items: list[DatasetItem],
    sparse_items: list[DatasetItem],
) -> tuple[UNet, TrainLog, TrainLog]:
    """Dense pretraining with grayscale/inversion, then sparse finetuning."""
    if pretrain_cfg.model != finetune_cfg.model:
        raise ConfigMismatchError(
            f"model configs differ between phases: {pretrain_cfg.model.to_dict()} vs {finetune_cfg.model.to_dict()}"
        )
    augment = pretrain_cfg.augment or AugmentConfig(
        rotation_degrees_max=0.0, scale_range=(1.0, 1.0)
    )
    augment = replace(augment, enable_grayscale=True)
    phase1_cfg = replace(pretrain_cfg, supervision="dense", augment=augment)
    pretrained, pretrain_log = train(phase1_cfg, dense_items)
    finetuned, finetune_log = train(finetune_cfg, sparse_items, initial=pretrained)
    return finetuned, pretrain_log, finetune_log


def evaluate(
    model: UNet,
    holdout: list[tuple[ImageSample, DenseMask]],
    t: float = 0.5,
    supervision: str = "",
    augmentations: str = "None",
    mode: str = "ship_class",
) -> MetricsReport:
    """Score the model against fully segmented holdout images."""
    if not holdout:
        raise LengthMismatchError("holdout must hold at least one image")
    preds = []
    truths = []
    for image, mask in holdout:
        image = _to_model_channels(image, model.config.in_channels)
        preds.append(predict(model, image))
        truths.append(mask)
    return evaluate_set(
        preds, truths, t=t, supervision=supervision, augmentations=augmentations, mode=mode
    )


SUPERVISION_LABELS = {
    "dense": "Dense",
    "point_n10": "Point (n=10)",
    "squiggle_n32": "Squiggle (n=32)",
}


def supervision_label(config: TrainConfig) -> str:
    if config.supervision == "masked_dense":
        return f"Masked dense ({round(config.mask_fraction * 100)}%)"
    return SUPERVISION_LABELS[config.supervision]


def augmentations_label(config: TrainConfig) -> str:
    if config.augment is None:
        return "None"
    parts = []
    geometric = (
        config.augment.rotation_degrees_max > 0
        or config.augment.scale_range != (1.0, 1.0)
        or config.augment.crop_size is not None
    )
    if geometric:
        parts.append("Geometric")
    if config.augment.enable_grayscale:
        parts.append("Grayscale")
    if config.augment.invert_probability > 0:
        parts.append("Inversion")
    return " and ".join(parts) if parts else "None"
