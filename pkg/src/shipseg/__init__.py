"""Weakly-supervised ship segmentation from sparse point and squiggle labels."""

from .augment import AugmentConfig, GeomParams, apply_geometric, geometric_transform, invert, random_invert, to_grayscale
from .errors import ShipSegError
from .formats import decode_rle, encode_rle, load_dense_mask_png, save_dense_mask_png
from .losses import masked_cross_entropy, pwce_loss, pwce_loss_grad
from .metrics import (
    MetricsReport,
    MetricsRow,
    evaluate_set,
    jaccard,
    precision_recall,
    threshold_prediction,
)
from .model import ModelConfig, UNet, build_model, load_params, predict, save_params
from .sampling import (
    SamplerConfig,
    mask_dense_labels,
    rasterize_squiggles,
    sample_from_squiggles,
    sample_points_per_class,
)
from .synthetic import SyntheticSpec, generate_synthetic, simulate_squiggles
from .training import (
    DatasetItem,
    TrainConfig,
    TrainLog,
    evaluate,
    pretrain_then_finetune,
    split_dataset,
    train,
)
from .types import (
    BACKGROUND,
    SHIP,
    AnnotationRecord,
    DenseMask,
    EvaluationMask,
    ImageSample,
    Polarity,
    Prediction,
    Scheme,
    Source,
    SparseLabel,
    SquiggleSet,
    Stroke,
    build_eval_mask,
)

__version__ = "0.1.0"
