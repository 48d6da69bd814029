#!/usr/bin/env python3
"""Generate the deterministic golden fixtures shared by integration tests.

Usage: python scripts/make_fixtures.py <dest_dir>

Writes under <dest_dir>:
  train.json        six-image, two-category COCO document
  images/           one random-content PNG per image record
  detections.json   detections over image 1 covering all four outcome kinds
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

from patchmix.dataset import (
    Annotation,
    BBoxXYWH,
    Category,
    Dataset,
    ImageRecord,
    save_dataset,
)
from patchmix.raster import Raster, save_image


def golden_dataset() -> Dataset:
    images = [ImageRecord(i, f"img_{i:03d}.png", 48, 48) for i in range(1, 7)]
    annotations = []
    boxes = [(4, 4, 16, 12), (20, 24, 18, 14)]
    ann_id = 0
    for img in images:
        for slot, (x, y, w, h) in enumerate(boxes):
            ann_id += 1
            annotations.append(
                Annotation(
                    id=ann_id,
                    image_id=img.id,
                    category_id=((img.id + slot) % 2) + 1,
                    bbox=BBoxXYWH(float(x), float(y), float(w), float(h)),
                )
            )
    categories = [Category(1, "knife"), Category(2, "scissor")]
    return Dataset(images=images, annotations=annotations, categories=categories)


def golden_detections() -> list[dict]:
    # image 1 annotations are category 2 (box at 4,4) and category 1 (box at
    # 20,24); the four records cover each outcome kind exactly once
    return [
        {"image_id": 1, "bbox": [40, 2, 6, 6], "label": 1, "score": 0.9, "cls_loss": 1.0},
        {"image_id": 1, "bbox": [4, 4, 16, 12], "label": None, "score": 0.8, "cls_loss": 2.0},
        {"image_id": 1, "bbox": [4, 4, 16, 12], "label": 2, "score": 0.7, "cls_loss": 4.0},
        {"image_id": 1, "bbox": [20, 24, 18, 14], "label": 2, "score": 0.6, "cls_loss": 8.0},
    ]


def main(argv: list[str]) -> int:
    if len(argv) != 2:
        print(__doc__, file=sys.stderr)
        return 1
    dest = Path(argv[1])
    dest.mkdir(parents=True, exist_ok=True)
    dataset = golden_dataset()
    save_dataset(dataset, dest / "train.json")
    images_root = dest / "images"
    images_root.mkdir(exist_ok=True)
    for img in dataset.images:
        rng = np.random.default_rng(1000 + img.id)
        raster = Raster(rng.integers(0, 256, (img.height, img.width, 3), dtype=np.uint8))
        save_image(raster, images_root / img.file_name)
    (dest / "detections.json").write_text(
        json.dumps(golden_detections(), indent=2) + "\n", encoding="utf-8"
    )
    print(f"fixtures written to {dest}")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
