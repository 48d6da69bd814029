"""Controlled annotation corruption: category flips and box shift/scale noise.

Each annotation gets its own keyed substream, so corruption is deterministic
for a given seed no matter how the annotations are ordered or parallelized.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any, Union

import numpy as np

from ._rng import substream
from ._validation import check_probability, check_positive
from .dataset import Annotation, BBoxXYWH, Dataset


@dataclass(frozen=True)
class UniformBoxNoise:
    """Shift/scale factors drawn from U(-delta, delta)."""

    delta: float = 0.3

    def __post_init__(self):
        check_positive("delta", self.delta)

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(-self.delta, self.delta, size=n)


@dataclass(frozen=True)
class GaussianBoxNoise:
    """Shift/scale factors drawn from N(mu, sigma^2)."""

    mu: float = 0.0
    sigma: float = 0.1

    def __post_init__(self):
        check_positive("sigma", self.sigma)

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.normal(self.mu, self.sigma, size=n)


BoxNoiseModel = Union[UniformBoxNoise, GaussianBoxNoise]


@dataclass(frozen=True)
class NoiseSpec:
    """Corruption parameters: label flip rate p_c, box noise rate p_b, and the box model."""

    p_c: float = 0.0
    p_b: float = 0.0
    box_model: BoxNoiseModel = UniformBoxNoise()
    seed: int = 0

    def __post_init__(self):
        check_probability("p_c", self.p_c)
        check_probability("p_b", self.p_b)


@dataclass(frozen=True)
class CategoryChange:
    annotation_id: int
    old: int
    new: int


@dataclass(frozen=True)
class BoxChange:
    annotation_id: int
    old: BBoxXYWH
    new: BBoxXYWH
    deltas: tuple[float, float, float, float]


def changes_to_json(changes: list[CategoryChange | BoxChange]) -> list[dict[str, Any]]:
    """ChangeLog records as JSON-ready dicts, tagged by kind."""
    out: list[dict[str, Any]] = []
    for c in changes:
        if isinstance(c, CategoryChange):
            out.append(
                {"kind": "category", "annotation_id": c.annotation_id,
                 "old": c.old, "new": c.new}
            )
        else:
            out.append(
                {"kind": "bbox", "annotation_id": c.annotation_id,
                 "old": c.old.as_list(), "new": c.new.as_list(),
                 "deltas": list(c.deltas)}
            )
    return out


def corrupt_labels(d: Dataset, spec: NoiseSpec) -> tuple[Dataset, list[CategoryChange]]:
    """Flip each label with probability p_c to a category drawn uniformly from the others.

    An annotation is never assigned its own category. Deterministic given
    spec.seed; untouched annotations are returned as-is.
    """
    if spec.p_c == 0.0:
        return d, []
    category_ids = [cat.id for cat in d.categories]
    if len(category_ids) < 2:
        raise ValueError("category noise needs at least 2 categories to flip between")

    changes = []
    annotations = []
    for ann in d.annotations:
        rng = substream(spec.seed, "category-noise", ann.id)
        if rng.random() >= spec.p_c:
            annotations.append(ann)
            continue
        others = [c for c in category_ids if c != ann.category_id]
        new_cat = others[int(rng.integers(len(others)))]
        annotations.append(replace(ann, category_id=new_cat))
        changes.append(CategoryChange(ann.id, ann.category_id, new_cat))
    return replace(d, annotations=annotations), changes


def shift_scale_box(b: BBoxXYWH, dx: float, dy: float, dw: float, dh: float) -> BBoxXYWH:
    """Relative shift/scale update: move by (dx*w, dy*h), scale sides by (1+dw, 1+dh)."""
    return BBoxXYWH(
        x=b.x + dx * b.w,
        y=b.y + dy * b.h,
        w=b.w * (1.0 + dw),
        h=b.h * (1.0 + dh),
    )


def clamp_box(b: BBoxXYWH, img_w: int, img_h: int) -> BBoxXYWH:
    """Clip a box to the image, keeping at least 1 pixel of width and height."""
    x1 = min(max(b.x, 0.0), float(img_w))
    x2 = min(max(b.x + b.w, 0.0), float(img_w))
    y1 = min(max(b.y, 0.0), float(img_h))
    y2 = min(max(b.y + b.h, 0.0), float(img_h))
    w = max(x2 - x1, 0.0)
    h = max(y2 - y1, 0.0)
    if w < 1.0:
        w = 1.0
        x1 = min(x1, img_w - 1.0)
    if h < 1.0:
        h = 1.0
        y1 = min(y1, img_h - 1.0)
    return BBoxXYWH(x1, y1, w, h)


def perturb_boxes(d: Dataset, spec: NoiseSpec) -> tuple[Dataset, list[BoxChange]]:
    """Perturb each box with probability p_b using four independent draws from the box model.

    Perturbed boxes are clamped to their image; untouched annotations are
    bit-identical. Deterministic given spec.seed.
    """
    if spec.p_b == 0.0:
        return d, []
    images = d.images_by_id

    changes = []
    annotations: list[Annotation] = []
    for ann in d.annotations:
        rng = substream(spec.seed, "box-noise", ann.id)
        if rng.random() >= spec.p_b:
            annotations.append(ann)
            continue
        dx, dy, dw, dh = (float(v) for v in spec.box_model.draw(rng, 4))
        img = images[ann.image_id]
        moved = clamp_box(shift_scale_box(ann.bbox, dx, dy, dw, dh), img.width, img.height)
        annotations.append(replace(ann, bbox=moved))
        changes.append(BoxChange(ann.id, ann.bbox, moved, (dx, dy, dw, dh)))
    return replace(d, annotations=annotations), changes


__all__ = [
    "BoxChange",
    "BoxNoiseModel",
    "CategoryChange",
    "GaussianBoxNoise",
    "NoiseSpec",
    "UniformBoxNoise",
    "changes_to_json",
    "clamp_box",
    "corrupt_labels",
    "perturb_boxes",
    "shift_scale_box",
]
