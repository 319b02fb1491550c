"""Command-line surface tying the pipeline together.

Subcommands: synth, mask, sample, train, pretrain-finetune, eval, serve.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import zlib
from pathlib import Path

from .annotations import build_export_document, parse_export_document, serialize_export
from .config import load_synthetic_spec, load_train_config
from .datasets import load_dataset, save_dataset
from .errors import IncompleteError, ShipSegError
from .metrics import MetricsReport
from .model import load_params, save_params
from .sampling import (
    mask_dense_labels,
    sample_from_squiggles,
    sample_points_per_class,
)
from .synthetic import generate_synthetic, simulate_squiggles
from .training import (
    DatasetItem,
    evaluate,
    pretrain_then_finetune,
    train,
)
from .types import Scheme

logger = logging.getLogger("shipseg")


def derive_seed(seed: int, image_id: str) -> int:
    return (seed ^ zlib.crc32(image_id.encode("utf-8"))) & 0xFFFFFFFF


def cmd_synth(args) -> int:
    spec = load_synthetic_spec(args.spec)
    pairs = generate_synthetic(spec, args.seed)
    save_dataset(pairs, args.out)
    logger.info("wrote %d images to %s", len(pairs), args.out)
    return 0


def cmd_mask(args) -> int:
    pairs = load_dataset(args.dataset, require_masks=True)
    entries = []
    for image, mask in pairs:
        label, _ = mask_dense_labels(mask, args.fraction, derive_seed(args.seed, image.id))
        entries.append((image.id, label))
    Path(args.out).write_bytes(serialize_export(build_export_document(entries)))
    logger.info("masked %d dense masks at fraction %.2f -> %s", len(entries), args.fraction, args.out)
    return 0


def cmd_sample(args) -> int:
    pairs = load_dataset(args.dataset, require_masks=args.annotations is None)
    entries = []
    if args.annotations is None:
        # no human annotations: simulate from the dense ground truth
        for image, mask in pairs:
            seed = derive_seed(args.seed, image.id)
            if args.scheme == Scheme.POINT_N10.value:
                label = sample_points_per_class(mask, args.points_per_class, seed)
            else:
                squiggles = simulate_squiggles(mask, seed)
                label = sample_from_squiggles(squiggles, args.n, image.height, image.width, seed)
            entries.append((image.id, label))
    else:
        from .service.log import AnnotationLog

        log = AnnotationLog(args.annotations)
        wanted = Scheme(args.scheme)
        missing = [image.id for image, _ in pairs if log.latest_for_image(image.id, wanted) is None]
        if missing:
            raise IncompleteError(missing)
        for image, _ in pairs:
            record = log.latest_for_image(image.id, wanted)
            if wanted == Scheme.POINT_N10:
                label = record.payload
            else:
                label = sample_from_squiggles(
                    record.payload, args.n, image.height, image.width, derive_seed(args.seed, image.id)
                )
            entries.append((image.id, label))
    Path(args.out).write_bytes(serialize_export(build_export_document(entries)))
    logger.info("sampled %s labels for %d images -> %s", args.scheme, len(entries), args.out)
    return 0


def _load_items(data_dir: str, labels_path: str | None, supervision: str) -> list[DatasetItem]:
    dense = supervision == "dense"
    pairs = load_dataset(data_dir, require_masks=dense)
    if dense:
        return [DatasetItem(image, dense=mask) for image, mask in pairs]
    if labels_path is None:
        raise ShipSegError(f"supervision {supervision!r} needs a --labels export document")
    scheme = Scheme(supervision) if supervision != "masked_dense" else Scheme.MASKED_DENSE
    entries = parse_export_document(Path(labels_path).read_bytes(), scheme=scheme)
    labels = dict(entries)
    missing = [image.id for image, _ in pairs if image.id not in labels]
    if missing:
        raise ShipSegError(f"no labels for images: {missing[:5]}{'...' if len(missing) > 5 else ''}")
    return [DatasetItem(image, sparse=labels[image.id]) for image, _ in pairs]


def cmd_train(args) -> int:
    config = load_train_config(args.config)
    items = _load_items(args.data, args.labels, config.supervision)
    model, log = train(config, items)
    save_params(model, args.out)
    if args.log:
        Path(args.log).write_text(json.dumps(log.to_dict(), indent=2))
    last = log.epochs[-1]
    logger.info(
        "trained %d epochs (best %d): train %.4f val %.4f -> %s",
        len(log.epochs),
        log.best_epoch,
        last.train_loss,
        last.val_loss,
        args.out,
    )
    return 0


def cmd_pretrain_finetune(args) -> int:
    pretrain_cfg = load_train_config(args.pretrain_config)
    finetune_cfg = load_train_config(args.finetune_config)
    dense_items = _load_items(args.pretrain_data, None, "dense")
    sparse_items = _load_items(args.finetune_data, args.finetune_labels, finetune_cfg.supervision)
    model, pre_log, fin_log = pretrain_then_finetune(
        pretrain_cfg, finetune_cfg, dense_items, sparse_items
    )
    save_params(model, args.out)
    if args.log:
        Path(args.log).write_text(
            json.dumps({"pretrain": pre_log.to_dict(), "finetune": fin_log.to_dict()}, indent=2)
        )
    logger.info("pretrained %d + finetuned %d epochs -> %s", len(pre_log.epochs), len(fin_log.epochs), args.out)
    return 0


def cmd_eval(args) -> int:
    model = load_params(args.ckpt)
    holdout = load_dataset(args.holdout, require_masks=True)
    modes = ["ship_class", "micro_all_pixels"] if args.pr_mode == "both" else [args.pr_mode]
    rows = []
    per_image = None
    for mode in modes:
        report = evaluate(
            model,
            holdout,
            t=args.threshold,
            supervision=args.supervision_label,
            augmentations=args.augmentations_label,
            mode=mode,
        )
        rows.extend(report.rows)
        if per_image is None:
            per_image = report.per_image
    merged = MetricsReport(rows, per_image=per_image)
    if args.report:
        Path(args.report).write_text(merged.to_json())
    print(merged.render_table())
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.images, args.log, frontend_dir=args.frontend)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shipseg", description="Weakly-supervised ship segmentation toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--spec", required=True, help="key=value synthetic spec file")
    p.add_argument("--out", required=True, help="output dataset directory")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("mask", help="randomly mask dense labels into sparse points")
    p.add_argument("--dataset", required=True)
    p.add_argument("--fraction", type=float, default=0.90)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="sparse-label export JSON")
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("sample", help="sample point or squiggle supervision")
    p.add_argument("--dataset", required=True)
    p.add_argument("--scheme", required=True, choices=["point_n10", "squiggle_n32"])
    p.add_argument("--annotations", default=None, help="annotation log (omit to simulate from masks)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=32, help="squiggle subsample size")
    p.add_argument("--points-per-class", type=int, default=5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("train", help="train a segmentation model")
    p.add_argument("--config", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--labels", default=None, help="sparse-label export JSON (sparse supervision)")
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--log", default=None, help="write the training log as JSON")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("pretrain-finetune", help="dense pretraining then sparse finetuning")
    p.add_argument("--pretrain-config", required=True)
    p.add_argument("--finetune-config", required=True)
    p.add_argument("--pretrain-data", required=True)
    p.add_argument("--finetune-data", required=True)
    p.add_argument("--finetune-labels", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--log", default=None)
    p.set_defaults(func=cmd_pretrain_finetune)

    p = sub.add_parser("eval", help="score a checkpoint against a fully-masked holdout")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--holdout", required=True)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--report", default=None, help="write the report as JSON")
    p.add_argument("--pr-mode", choices=["ship_class", "micro_all_pixels", "both"], default="both")
    p.add_argument("--supervision-label", default="-")
    p.add_argument("--augmentations-label", default="None")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", help="run the annotation service")
    p.add_argument("--images", required=True, help="dataset directory to annotate")
    p.add_argument("--log", required=True, help="annotation log file")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--frontend", default=None, help="static directory with the built UI")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ShipSegError as exc:
        logger.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
