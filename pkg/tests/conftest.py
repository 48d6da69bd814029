"""Shared builders for synthetic datasets and image trees."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from patchmix.dataset import (
    Annotation,
    BBoxXYWH,
    Category,
    Dataset,
    ImageRecord,
    save_dataset,
)
from patchmix.raster import Raster, save_image


def minimal_doc() -> dict:
    return {
        "images": [{"id": 1, "file_name": "a.png", "width": 4, "height": 4}],
        "annotations": [
            {"id": 1, "image_id": 1, "category_id": 1, "bbox": [0, 0, 2, 2]}
        ],
        "categories": [{"id": 1, "name": "thing"}],
    }


def build_dataset(
    n_images: int = 6,
    n_categories: int = 3,
    anns_per_image: int = 2,
    img_w: int = 48,
    img_h: int = 48,
    seed: int = 7,
) -> Dataset:
    """A valid synthetic dataset with boxes comfortably inside their images."""
    rng = np.random.default_rng(seed)
    images = [
        ImageRecord(id=i + 1, file_name=f"img_{i + 1:04d}.png", width=img_w, height=img_h)
        for i in range(n_images)
    ]
    categories = [Category(id=c + 1, name=f"class_{c + 1}") for c in range(n_categories)]
    annotations = []
    ann_id = 0
    for img in images:
        for _ in range(anns_per_image):
            ann_id += 1
            w = float(rng.integers(6, max(7, img_w // 2)))
            h = float(rng.integers(6, max(7, img_h // 2)))
            x = float(rng.integers(0, img_w - int(w)))
            y = float(rng.integers(0, img_h - int(h)))
            annotations.append(
                Annotation(
                    id=ann_id,
                    image_id=img.id,
                    category_id=int(rng.integers(1, n_categories + 1)),
                    bbox=BBoxXYWH(x, y, w, h),
                )
            )
    return Dataset(images=images, annotations=annotations, categories=categories)


def random_raster(width: int, height: int, seed: int = 0) -> Raster:
    rng = np.random.default_rng(seed)
    return Raster(rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8))


def write_image_tree(root: Path, dataset: Dataset, seed: int = 11) -> None:
    """Write one deterministic random PNG per image record under root."""
    root.mkdir(parents=True, exist_ok=True)
    for img in dataset.images:
        raster = random_raster(img.width, img.height, seed=seed + img.id)
        dest = root / img.file_name
        dest.parent.mkdir(parents=True, exist_ok=True)
        save_image(raster, dest)


@pytest.fixture
def fixture_tree(tmp_path):
    """A small on-disk dataset: (annotation path, image root, dataset)."""
    dataset = build_dataset(n_images=8, n_categories=3, anns_per_image=2)
    images_root = tmp_path / "images"
    write_image_tree(images_root, dataset)
    ann_path = tmp_path / "train.json"
    save_dataset(dataset, ann_path)
    return ann_path, images_root, dataset


def write_json(path: Path, payload) -> Path:
    path.write_text(json.dumps(payload, indent=2), encoding="utf-8")
    return path
