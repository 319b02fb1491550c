import json

import pytest

from shipseg.annotations import parse_export_document
from shipseg.cli import main
from shipseg.metrics import REPORT_COLUMNS


SYNTH_SPEC = """
count=10
height=32
width=32
ships_min=1
ships_max=2
axis_min=4
axis_max=7
noise_sigma=0.02
polarity_mix.white_hot=1.0
"""

TRAIN_CONF = """
epochs=2
batch_size=4
learning_rate=0.003
split_ratio=0.8
seed=0
supervision={supervision}
model.depth=1
model.base_channels=4
"""


@pytest.fixture()
def dataset(tmp_path):
    spec = tmp_path / "synth.conf"
    spec.write_text(SYNTH_SPEC)
    out = tmp_path / "data"
    assert main(["synth", "--spec", str(spec), "--out", str(out), "--seed", "3"]) == 0
    return out


def test_synth_creates_dataset(dataset):
    manifest = json.loads((dataset / "dataset.json").read_text())
    assert len(manifest["images"]) == 10
    assert (dataset / "images" / "synth-00000.png").exists()
    assert (dataset / "masks" / "synth-00000.png").exists()


def test_synth_deterministic(dataset, tmp_path):
    spec = tmp_path / "synth2.conf"
    spec.write_text(SYNTH_SPEC)
    out2 = tmp_path / "data2"
    main(["synth", "--spec", str(spec), "--out", str(out2), "--seed", "3"])
    a = (dataset / "images" / "synth-00004.png").read_bytes()
    b = (out2 / "images" / "synth-00004.png").read_bytes()
    assert a == b


def test_mask_subcommand(dataset, tmp_path):
    out = tmp_path / "masked.json"
    code = main(
        ["mask", "--dataset", str(dataset), "--fraction", "0.90", "--seed", "1", "--out", str(out)]
    )
    assert code == 0
    entries = parse_export_document(out.read_bytes())
    assert len(entries) == 10
    # 32*32 = 1024 pixels, 10% retained
    assert all(len(label.points) == 102 for _, label in entries)


def test_sample_point_scheme(dataset, tmp_path):
    out = tmp_path / "points.json"
    code = main(
        ["sample", "--dataset", str(dataset), "--scheme", "point_n10", "--seed", "2", "--out", str(out)]
    )
    assert code == 0
    entries = parse_export_document(out.read_bytes())
    assert all(len(label.points) == 10 for _, label in entries)


def test_sample_squiggle_scheme(dataset, tmp_path):
    out = tmp_path / "squiggles.json"
    code = main(
        ["sample", "--dataset", str(dataset), "--scheme", "squiggle_n32", "--seed", "2", "--out", str(out)]
    )
    assert code == 0
    entries = parse_export_document(out.read_bytes())
    assert all(len(label.points) == 32 for _, label in entries)


def test_train_and_eval_dense(dataset, tmp_path, capsys):
    conf = tmp_path / "train.conf"
    conf.write_text(TRAIN_CONF.format(supervision="dense"))
    ckpt = tmp_path / "model.params"
    log = tmp_path / "log.json"
    code = main(
        ["train", "--config", str(conf), "--data", str(dataset), "--out", str(ckpt), "--log", str(log)]
    )
    assert code == 0
    assert ckpt.exists()
    assert len(json.loads(log.read_text())["epochs"]) == 2

    report_path = tmp_path / "report.json"
    code = main(
        [
            "eval",
            "--ckpt",
            str(ckpt),
            "--holdout",
            str(dataset),
            "--threshold",
            "0.5",
            "--report",
            str(report_path),
            "--supervision-label",
            "Dense",
        ]
    )
    assert code == 0
    table = capsys.readouterr().out
    header = [cell.strip() for cell in table.splitlines()[0].split("|")]
    assert header == list(REPORT_COLUMNS)
    doc = json.loads(report_path.read_text())
    modes = {row["pr_mode"] for row in doc["rows"]}
    assert modes == {"ship_class", "micro_all_pixels"}


def test_train_squiggle_with_labels(dataset, tmp_path):
    labels = tmp_path / "squiggles.json"
    main(["sample", "--dataset", str(dataset), "--scheme", "squiggle_n32", "--seed", "2", "--out", str(labels)])
    conf = tmp_path / "train.conf"
    conf.write_text(TRAIN_CONF.format(supervision="squiggle_n32"))
    ckpt = tmp_path / "model.params"
    code = main(
        ["train", "--config", str(conf), "--data", str(dataset), "--labels", str(labels), "--out", str(ckpt)]
    )
    assert code == 0
    assert ckpt.exists()


def test_train_sparse_without_labels_fails(dataset, tmp_path):
    conf = tmp_path / "train.conf"
    conf.write_text(TRAIN_CONF.format(supervision="squiggle_n32"))
    code = main(["train", "--config", str(conf), "--data", str(dataset), "--out", str(tmp_path / "m")])
    assert code == 1


def test_pretrain_finetune_subcommand(dataset, tmp_path):
    # visible pretraining data
    spec = tmp_path / "vis.conf"
    spec.write_text(SYNTH_SPEC.replace("polarity_mix.white_hot", "polarity_mix.visible"))
    vis = tmp_path / "vis_data"
    main(["synth", "--spec", str(spec), "--out", str(vis), "--seed", "8"])

    labels = tmp_path / "points.json"
    main(["sample", "--dataset", str(dataset), "--scheme", "point_n10", "--seed", "2", "--out", str(labels)])

    pre_conf = tmp_path / "pre.conf"
    pre_conf.write_text(TRAIN_CONF.format(supervision="dense"))
    fin_conf = tmp_path / "fin.conf"
    fin_conf.write_text(TRAIN_CONF.format(supervision="point_n10"))
    ckpt = tmp_path / "final.params"
    code = main(
        [
            "pretrain-finetune",
            "--pretrain-config", str(pre_conf),
            "--finetune-config", str(fin_conf),
            "--pretrain-data", str(vis),
            "--finetune-data", str(dataset),
            "--finetune-labels", str(labels),
            "--out", str(ckpt),
            "--log", str(tmp_path / "phases.json"),
        ]
    )
    assert code == 0
    phases = json.loads((tmp_path / "phases.json").read_text())
    assert set(phases) == {"pretrain", "finetune"}


def test_sample_from_annotation_log(dataset, tmp_path):
    from fastapi.testclient import TestClient

    from shipseg.service import create_app

    log_path = tmp_path / "ann.jsonl"
    with TestClient(create_app(dataset, log_path)) as client:
        ids = [i["image_id"] for i in client.get("/api/images").json()]
        for image_id in ids:
            body = {
                "image_id": image_id,
                "annotator_id": "alice",
                "scheme": "squiggle_n32",
                "created_at": "2026-08-10T12:00:00Z",
                "strokes": [
                    {"class": 1, "radius": 0, "polyline": [[10, 10], [12, 14]]},
                    {"class": 0, "radius": 0, "polyline": [[2, 2], [2, 8]]},
                ],
            }
            assert client.post("/api/annotations", json=body).status_code == 200
    out = tmp_path / "sampled.json"
    code = main(
        [
            "sample",
            "--dataset", str(dataset),
            "--scheme", "squiggle_n32",
            "--annotations", str(log_path),
            "--seed", "4",
            "--out", str(out),
        ]
    )
    assert code == 0
    entries = parse_export_document(out.read_bytes())
    assert len(entries) == 10
    # strokes rasterize to ~13 pixels; every pixel is exported
    assert all(1 <= len(label.points) <= 32 for _, label in entries)
