#!/usr/bin/env python3
"""Generate the UI validation-conformance corpus.

Builds 200 valid and invalid annotation request bodies, posts each to the
annotation service, and records the accept/reject decision. The frontend
test suite replays the same bodies through the client-side validator and
requires identical decisions.

Usage: python tools/gen_ui_corpus.py [--out frontend/tests/fixtures/validation_corpus.json]
"""

from __future__ import annotations

import argparse
import json
import tempfile
from pathlib import Path

import numpy as np
from fastapi.testclient import TestClient

from shipseg.datasets import save_dataset
from shipseg.service import create_app
from shipseg.synthetic import SyntheticSpec, generate_synthetic

HEIGHT = WIDTH = 64
IMAGE_ID = "synth-00000"
GOOD_STAMP = "2026-08-10T12:00:00Z"


def rand_points(rng, ship=5, background=5, as_lists=True):
    cells = rng.choice(HEIGHT * WIDTH, size=ship + background, replace=False)
    points = []
    for i, cell in enumerate(cells):
        k = 1 if i < ship else 0
        points.append([int(cell // WIDTH), int(cell % WIDTH), k])
    return points


def rand_strokes(rng, classes=(1, 0)):
    strokes = []
    for k in classes:
        n = int(rng.integers(2, 5))
        polyline = [
            [int(rng.integers(2, HEIGHT - 2)), int(rng.integers(2, WIDTH - 2))] for _ in range(n)
        ]
        strokes.append({"class": int(k), "radius": int(rng.integers(0, 3)), "polyline": polyline})
    return strokes


def point_body(points, **overrides):
    body = {
        "image_id": IMAGE_ID,
        "annotator_id": "corpus",
        "scheme": "point_n10",
        "created_at": GOOD_STAMP,
        "points": points,
    }
    body.update(overrides)
    return body


def squiggle_body(strokes, **overrides):
    body = {
        "image_id": IMAGE_ID,
        "annotator_id": "corpus",
        "scheme": "squiggle_n32",
        "created_at": GOOD_STAMP,
        "strokes": strokes,
    }
    body.update(overrides)
    return body


def build_bodies(rng) -> list[dict]:
    bodies = []
    # 60 valid point submissions
    for _ in range(60):
        bodies.append(point_body(rand_points(rng)))
    # 20 wrong per-class counts
    for ship, background in [(4, 5), (5, 4), (6, 5), (5, 6), (10, 0), (0, 10), (3, 3), (5, 0), (0, 5), (6, 6)] * 2:
        bodies.append(point_body(rand_points(rng, ship, background)))
    # 8 duplicate coordinates
    for _ in range(8):
        points = rand_points(rng)
        points[7] = list(points[2])
        points[7][2] = points[2][2]
        bodies.append(point_body(points))
    # 8 out-of-bounds points
    for _ in range(8):
        points = rand_points(rng)
        points[0] = [HEIGHT + int(rng.integers(0, 50)), 0, 1]
        bodies.append(point_body(points))
    # 8 malformed point entries
    for kind in range(8):
        points = rand_points(rng)
        if kind % 4 == 0:
            points[0] = [0.5, 1, 1]
        elif kind % 4 == 1:
            points[0] = [0, 1]
        elif kind % 4 == 2:
            points[0] = [0, 1, 2]
        else:
            points[0] = [True, 1, 1]
        bodies.append(point_body(points))
    # 6 scheme/payload mismatches
    for _ in range(3):
        bodies.append(point_body(rand_points(rng), strokes=rand_strokes(rng)))
    for _ in range(3):
        bodies.append(squiggle_body(rand_strokes(rng), points=rand_points(rng)))
    # 48 valid squiggle submissions
    for _ in range(48):
        bodies.append(squiggle_body(rand_strokes(rng)))
    # 12 missing one class
    for _ in range(6):
        bodies.append(squiggle_body(rand_strokes(rng, classes=(0,))))
    for _ in range(6):
        bodies.append(squiggle_body(rand_strokes(rng, classes=(1,))))
    # 10 malformed strokes
    for kind in range(10):
        strokes = rand_strokes(rng)
        if kind % 5 == 0:
            strokes[0]["radius"] = -1
        elif kind % 5 == 1:
            strokes[0]["polyline"] = []
        elif kind % 5 == 2:
            strokes[0]["polyline"][0] = [0]
        elif kind % 5 == 3:
            strokes[0]["class"] = 2
        else:
            strokes[0]["polyline"][0] = [HEIGHT + 5, 0]
        bodies.append(squiggle_body(strokes))
    # 10 created_at variants (4 good, 6 bad)
    for stamp, _ in [
        ("2026-08-10T12:00:00+02:00", True),
        ("2026-08-10T12:00:00.500Z", True),
        ("2026-08-10T12:00:00.123456+00:00", True),
        ("2026-08-10T12:00:00z", True),
        ("2026-08-10T12:00:00", False),
        ("not a timestamp", False),
        ("", False),
        ("2026-13-10T12:00:00Z", False),
        ("2026-08-10T25:00:00Z", False),
        ("2026-08-10", False),
    ]:
        bodies.append(point_body(rand_points(rng), created_at=stamp))
    # 8 missing/empty required fields
    body = point_body(rand_points(rng))
    del body["created_at"]
    bodies.append(body)
    body = point_body(rand_points(rng))
    del body["points"]
    bodies.append(body)
    body = squiggle_body(rand_strokes(rng))
    del body["strokes"]
    bodies.append(body)
    bodies.append(point_body(rand_points(rng), annotator_id=""))
    bodies.append(point_body(rand_points(rng), scheme="masked_dense"))
    bodies.append(point_body(rand_points(rng), scheme="points"))
    bodies.append(point_body([]))
    bodies.append(squiggle_body([]))
    # 2 with extra unknown keys (tolerated)
    bodies.append(point_body(rand_points(rng), notes="extra key"))
    bodies.append(squiggle_body(rand_strokes(rng), ui_version="1.2"))
    return bodies


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--out",
        default=str(Path(__file__).resolve().parent.parent / "frontend/tests/fixtures/validation_corpus.json"),
    )
    parser.add_argument("--seed", type=int, default=20260810)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    bodies = build_bodies(rng)
    assert len(bodies) == 200, f"expected 200 corpus bodies, built {len(bodies)}"

    with tempfile.TemporaryDirectory() as tmp:
        spec = SyntheticSpec(
            count=1, height=HEIGHT, width=WIDTH, axis_min=5, axis_max=12,
            polarity_mix={"white_hot": 1.0},
        )
        save_dataset(generate_synthetic(spec, seed=0), Path(tmp) / "ds")
        app = create_app(Path(tmp) / "ds", Path(tmp) / "log.jsonl")
        entries = []
        with TestClient(app) as client:
            for body in bodies:
                resp = client.post("/api/annotations", json=body)
                assert resp.status_code in (200, 400, 404), (resp.status_code, resp.text, body)
                entries.append(
                    {
                        "body": body,
                        "height": HEIGHT,
                        "width": WIDTH,
                        "server_status": resp.status_code,
                        "server_accepts": resp.status_code == 200,
                    }
                )

    accepted = sum(1 for e in entries if e["server_accepts"])
    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(json.dumps(entries, indent=1))
    print(f"wrote {len(entries)} corpus entries ({accepted} accepted) to {out_path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
