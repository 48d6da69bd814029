"""COCO-format detection datasets: parsing, validation, indexing, serialization.

This module is the single source of truth for annotation semantics. Records
are plain dataclasses and are treated as immutable after construction; every
transform in the toolkit builds new values instead of mutating, so datasets
and indices can be shared freely across parallel workers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, NamedTuple

from .errors import DataFormatError

_IMAGE_KEYS = ("id", "file_name", "width", "height")
_ANN_KEYS = ("id", "image_id", "category_id", "bbox")
_CAT_KEYS = ("id", "name")


@dataclass(frozen=True)
class BBoxXYWH:
    """Axis-aligned box anchored at its top-left corner, in pixels.

    Coordinates are real-valued: perturbation and clamping produce
    non-integer boxes and must not lose precision.
    """

    x: float
    y: float
    w: float
    h: float

    @property
    def x2(self) -> float:
        return self.x + self.w

    @property
    def y2(self) -> float:
        return self.y + self.h

    @property
    def area(self) -> float:
        return self.w * self.h

    def as_list(self) -> list[float]:
        return [self.x, self.y, self.w, self.h]


@dataclass
class ImageRecord:
    id: int
    file_name: str
    width: int
    height: int
    extra: dict[str, Any] = field(default_factory=dict)


@dataclass
class Annotation:
    id: int
    image_id: int
    category_id: int
    bbox: BBoxXYWH
    extra: dict[str, Any] = field(default_factory=dict)


@dataclass
class Category:
    id: int
    name: str
    extra: dict[str, Any] = field(default_factory=dict)


@dataclass
class Dataset:
    """A detection dataset: images, their annotations, and the label set.

    Unknown document fields (``area``, ``iscrowd``, ``info``, ...) are kept
    opaquely in ``extra`` dicts and survive round trips untouched.
    """

    images: list[ImageRecord]
    annotations: list[Annotation]
    categories: list[Category]
    extra: dict[str, Any] = field(default_factory=dict)

    @cached_property
    def images_by_id(self) -> dict[int, ImageRecord]:
        return {img.id: img for img in self.images}

    @cached_property
    def annotations_by_id(self) -> dict[int, Annotation]:
        return {ann.id: ann for ann in self.annotations}

    @cached_property
    def categories_by_id(self) -> dict[int, Category]:
        return {cat.id: cat for cat in self.categories}

    @cached_property
    def annotations_by_image(self) -> dict[int, tuple[Annotation, ...]]:
        groups: dict[int, list[Annotation]] = {img.id: [] for img in self.images}
        for ann in self.annotations:
            groups.setdefault(ann.image_id, []).append(ann)
        return {k: tuple(v) for k, v in groups.items()}


@dataclass(frozen=True)
class Violation:
    """One invariant breach found by validate(). Violations are data, not errors."""

    kind: str
    message: str


class PeerRef(NamedTuple):
    annotation_id: int
    image_id: int


@dataclass(frozen=True)
class CategoryIndex:
    """Per-category (annotation id, image id) pairs covering every annotation once."""

    by_category: dict[int, tuple[PeerRef, ...]]

    def entries(self, category_id: int) -> tuple[PeerRef, ...]:
        return self.by_category.get(category_id, ())


def _require(obj: dict, key: str, where: str) -> Any:
    if key not in obj:
        raise DataFormatError(f"missing required field {where}.{key}")
    return obj[key]


def _as_int(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise DataFormatError(f"{where} must be an integer, got {value!r}")
    if isinstance(value, float) and not value.is_integer():
        raise DataFormatError(f"{where} must be an integer, got {value!r}")
    return int(value)


def _as_str(value: Any, where: str) -> str:
    if not isinstance(value, str):
        raise DataFormatError(f"{where} must be a string, got {value!r}")
    return value


def _as_bbox(value: Any, where: str) -> BBoxXYWH:
    if not isinstance(value, (list, tuple)) or len(value) != 4:
        raise DataFormatError(f"{where} must be a 4-element [x, y, w, h] array")
    coords = []
    for i, v in enumerate(value):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise DataFormatError(f"{where}[{i}] must be a number, got {v!r}")
        coords.append(float(v))
    return BBoxXYWH(*coords)


def _extras(obj: dict, reserved: tuple[str, ...]) -> dict[str, Any]:
    return {k: v for k, v in obj.items() if k not in reserved}


def load_dataset(path: str | Path, strict: bool = True) -> Dataset:
    """Read a COCO-format JSON document.

    With ``strict=True`` (the default) the loader also enforces unique ids
    and referential integrity. ``strict=False`` defers those checks to
    :func:`validate`, so imperfect files can still be loaded and reported on.

    Raises DataFormatError for malformed documents (with the offending key
    path) and OSError for unreadable files.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise DataFormatError(f"{path}: top-level value must be an object")
    for key in ("images", "annotations", "categories"):
        if key not in doc:
            raise DataFormatError(f"missing required field {key}")
        if not isinstance(doc[key], list):
            raise DataFormatError(f"{key} must be an array")

    images = []
    for i, obj in enumerate(doc["images"]):
        where = f"images[{i}]"
        if not isinstance(obj, dict):
            raise DataFormatError(f"{where} must be an object")
        images.append(
            ImageRecord(
                id=_as_int(_require(obj, "id", where), f"{where}.id"),
                file_name=_as_str(_require(obj, "file_name", where), f"{where}.file_name"),
                width=_as_int(_require(obj, "width", where), f"{where}.width"),
                height=_as_int(_require(obj, "height", where), f"{where}.height"),
                extra=_extras(obj, _IMAGE_KEYS),
            )
        )

    categories = []
    for i, obj in enumerate(doc["categories"]):
        where = f"categories[{i}]"
        if not isinstance(obj, dict):
            raise DataFormatError(f"{where} must be an object")
        categories.append(
            Category(
                id=_as_int(_require(obj, "id", where), f"{where}.id"),
                name=_as_str(_require(obj, "name", where), f"{where}.name"),
                extra=_extras(obj, _CAT_KEYS),
            )
        )

    annotations = []
    for i, obj in enumerate(doc["annotations"]):
        where = f"annotations[{i}]"
        if not isinstance(obj, dict):
            raise DataFormatError(f"{where} must be an object")
        annotations.append(
            Annotation(
                id=_as_int(_require(obj, "id", where), f"{where}.id"),
                image_id=_as_int(_require(obj, "image_id", where), f"{where}.image_id"),
                category_id=_as_int(_require(obj, "category_id", where), f"{where}.category_id"),
                bbox=_as_bbox(_require(obj, "bbox", where), f"{where}.bbox"),
                extra=_extras(obj, _ANN_KEYS),
            )
        )

    ds = Dataset(
        images=images,
        annotations=annotations,
        categories=categories,
        extra=_extras(doc, ("images", "annotations", "categories")),
    )
    if strict:
        problems = [
            v
            for v in validate(ds)
            if v.kind in ("duplicate-id", "dangling-reference")
        ]
        if problems:
            raise DataFormatError(
                "; ".join(v.message for v in problems[:5])
                + (f" (+{len(problems) - 5} more)" if len(problems) > 5 else "")
            )
    return ds


def dataset_to_dict(d: Dataset) -> dict[str, Any]:
    """The JSON-ready document form of a dataset. Known keys win over extras."""
    return {
        "images": [
            {**img.extra, "id": img.id, "file_name": img.file_name,
             "width": img.width, "height": img.height}
            for img in d.images
        ],
        "annotations": [
            {**ann.extra, "id": ann.id, "image_id": ann.image_id,
             "category_id": ann.category_id, "bbox": ann.bbox.as_list()}
            for ann in d.annotations
        ],
        "categories": [
            {**cat.extra, "id": cat.id, "name": cat.name} for cat in d.categories
        ],
        **d.extra,
    }


def save_dataset(d: Dataset, path: str | Path) -> None:
    """Write a COCO-format document such that load_dataset(path) reproduces d."""
    path = Path(path)
    path.write_text(json.dumps(dataset_to_dict(d), indent=2) + "\n", encoding="utf-8")


def validate(d: Dataset) -> list[Violation]:
    """List every invariant violation in d; an empty list means valid.

    Never mutates or raises: the toolkit routinely has to describe what is
    wrong with imperfect annotation files.
    """
    violations = []

    def dup_check(ids: list[int], what: str) -> None:
        seen: set[int] = set()
        for i in ids:
            if i in seen:
                violations.append(
                    Violation("duplicate-id", f"duplicate {what} id {i}")
                )
            seen.add(i)

    dup_check([img.id for img in d.images], "image")
    dup_check([ann.id for ann in d.annotations], "annotation")
    dup_check([cat.id for cat in d.categories], "category")

    image_ids = {img.id for img in d.images}
    category_ids = {cat.id for cat in d.categories}

    for img in d.images:
        if img.width <= 0 or img.height <= 0:
            violations.append(
                Violation(
                    "bad-image-size",
                    f"image {img.id} has non-positive size {img.width}x{img.height}",
                )
            )

    for ann in d.annotations:
        if ann.image_id not in image_ids:
            violations.append(
                Violation(
                    "dangling-reference",
                    f"annotation {ann.id} references unknown image_id {ann.image_id}",
                )
            )
        if ann.category_id not in category_ids:
            violations.append(
                Violation(
                    "dangling-reference",
                    f"annotation {ann.id} references unknown category_id {ann.category_id}",
                )
            )
        if ann.bbox.w <= 0 or ann.bbox.h <= 0:
            violations.append(
                Violation(
                    "degenerate-box",
                    f"annotation {ann.id} has non-positive box size "
                    f"{ann.bbox.w}x{ann.bbox.h}",
                )
            )

    return violations


def index_by_category(d: Dataset) -> CategoryIndex:
    """Index every annotation under its category, in dataset order.

    Categories without annotations map to an empty tuple, so the index always
    partitions the annotation set across exactly the dataset's categories.
    """
    groups: dict[int, list[PeerRef]] = {cat.id: [] for cat in d.categories}
    for ann in d.annotations:
        groups.setdefault(ann.category_id, []).append(
            PeerRef(annotation_id=ann.id, image_id=ann.image_id)
        )
    return CategoryIndex(by_category={k: tuple(v) for k, v in groups.items()})


__all__ = [
    "Annotation",
    "BBoxXYWH",
    "Category",
    "CategoryIndex",
    "Dataset",
    "ImageRecord",
    "PeerRef",
    "Violation",
    "dataset_to_dict",
    "index_by_category",
    "load_dataset",
    "save_dataset",
    "validate",
]
