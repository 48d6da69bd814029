"""Prediction-outcome partitioning and loss masking for training on noisy labels.

All functions here are pure: losses are supplied by the caller's criterion,
nothing here computes or backpropagates them.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Final, Sequence

from .dataset import Annotation, BBoxXYWH
from .errors import DataFormatError

BACKGROUND: Final[int] = -1


@dataclass(frozen=True)
class Prediction:
    """One detector output on an image: box, predicted label, and its classification loss."""

    bbox: BBoxXYWH
    label: int
    score: float = 1.0
    cls_loss: float = 0.0

    def __post_init__(self):
        if self.cls_loss < 0:
            raise ValueError(f"cls_loss must be non-negative, got {self.cls_loss}")


@dataclass(frozen=True)
class Detection(Prediction):
    """A Prediction tagged with the image it belongs to (wire form of detection files)."""

    image_id: int = 0

    def as_prediction(self) -> Prediction:
        return Prediction(self.bbox, self.label, self.score, self.cls_loss)


@dataclass(frozen=True)
class OutcomePartition:
    """Disjoint, exhaustive split of prediction indices into four outcome sets.

    neg: no ground-truth match at or above the IoU threshold
    fb:  matched, predicted background
    pos: matched, predicted label agrees with the matched ground truth
    pp:  matched, predicted label is a different non-background class
    """

    neg: tuple[int, ...]
    fb: tuple[int, ...]
    pos: tuple[int, ...]
    pp: tuple[int, ...]


@dataclass(frozen=True)
class LossBreakdown:
    """Classification losses summed per kept outcome set; pp contributes nothing."""

    l_bbox: float
    l_cls_neg: float
    l_cls_pos: float
    l_cls_fb: float

    @property
    def total(self) -> float:
        return self.l_bbox + self.l_cls_neg + self.l_cls_pos + self.l_cls_fb


def iou(a: BBoxXYWH, b: BBoxXYWH) -> float:
    """Intersection area over union area; 0 when the union is empty."""
    ix = max(a.x, b.x)
    iy = max(a.y, b.y)
    ix2 = min(a.x + a.w, b.x + b.w)
    iy2 = min(a.y + a.h, b.y + b.h)
    inter = max(ix2 - ix, 0.0) * max(iy2 - iy, 0.0)
    union = a.w * a.h + b.w * b.h - inter
    return inter / union if union > 0 else 0.0


def partition_outcomes(
    preds: Sequence[Prediction],
    gts: Sequence[Annotation],
    iou_thr: float = 0.5,
) -> OutcomePartition:
    """Classify each prediction by its single max-IoU ground-truth match.

    Ties on IoU go to the lowest annotation id. A prediction whose best match
    falls below iou_thr is neg regardless of label; with no ground truths at
    all, everything is neg.
    """
    if not 0.0 < iou_thr < 1.0:
        raise ValueError(f"iou_thr must be in (0, 1), got {iou_thr}")
    neg: list[int] = []
    fb: list[int] = []
    pos: list[int] = []
    pp: list[int] = []
    for i, pred in enumerate(preds):
        best: Annotation | None = None
        best_iou = -1.0
        for gt in gts:
            v = iou(pred.bbox, gt.bbox)
            if v > best_iou or (v == best_iou and best is not None and gt.id < best.id):
                best = gt
                best_iou = v
        if best is None or best_iou < iou_thr:
            neg.append(i)
        elif pred.label == BACKGROUND:
            fb.append(i)
        elif pred.label == best.category_id:
            pos.append(i)
        else:
            pp.append(i)
    return OutcomePartition(tuple(neg), tuple(fb), tuple(pos), tuple(pp))


def masked_loss(
    preds: Sequence[Prediction],
    partition: OutcomePartition,
    l_bbox: float = 0.0,
) -> LossBreakdown:
    """Sum classification losses over neg, pos, and fb; suppress pp entirely."""

    def group_sum(indices: tuple[int, ...]) -> float:
        return math.fsum(preds[i].cls_loss for i in indices)

    return LossBreakdown(
        l_bbox=float(l_bbox),
        l_cls_neg=group_sum(partition.neg),
        l_cls_pos=group_sum(partition.pos),
        l_cls_fb=group_sum(partition.fb),
    )


def keep_fraction_schedule(tau: float, epoch: int) -> float:
    """Presumed-clean keep fraction 1 - tau * min(epoch/5, 1) for small-loss selection."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must be in [0, 1], got {tau}")
    if epoch < 0:
        raise ValueError(f"epoch must be non-negative, got {epoch}")
    return 1.0 - tau * min(epoch / 5.0, 1.0)


def _keep_count(keep: float, n: int) -> int:
    # floor, with a tiny guard so e.g. keep=2/3 of 3 items counts as 2
    return int(math.floor(keep * n + 1e-9))


def small_loss_select(losses: Sequence[float], keep: float) -> list[int]:
    """Indices of the floor(keep * n) smallest losses, ascending; ties keep the earlier index.

    Whether the losses are classification-only or totals is the caller's
    choice of input vector; the selection rule is identical.
    """
    if not 0.0 <= keep <= 1.0:
        raise ValueError(f"keep must be in [0, 1], got {keep}")
    count = _keep_count(keep, len(losses))
    order = sorted(range(len(losses)), key=lambda i: (losses[i], i))
    return sorted(order[:count])


def small_loss_select_grouped(
    losses: Sequence[float],
    positive: Sequence[bool],
    keep: float,
) -> list[int]:
    """Apply the keep fraction independently within the positive and negative groups.

    ``positive[i]`` marks predictions whose box matched a ground truth at the
    caller's IoU threshold; the result is the union of both selections.
    """
    if len(losses) != len(positive):
        raise ValueError("losses and positive mask must have equal length")
    if not 0.0 <= keep <= 1.0:
        raise ValueError(f"keep must be in [0, 1], got {keep}")
    selected: list[int] = []
    for wanted in (True, False):
        group = [i for i, flag in enumerate(positive) if bool(flag) == wanted]
        count = _keep_count(keep, len(group))
        order = sorted(group, key=lambda i: (losses[i], i))
        selected.extend(order[:count])
    return sorted(selected)


def load_detections(path: str | Path) -> list[Detection]:
    """Read a detections file: a JSON array of {image_id, bbox, label, score, cls_loss}.

    ``label`` may be null or -1 for background; score and cls_loss default to
    1.0 and 0.0 when absent.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, list):
        raise DataFormatError(f"{path}: detections file must be a JSON array")
    detections = []
    for i, obj in enumerate(doc):
        where = f"detections[{i}]"
        if not isinstance(obj, dict):
            raise DataFormatError(f"{where} must be an object")
        for key in ("image_id", "bbox"):
            if key not in obj:
                raise DataFormatError(f"missing required field {where}.{key}")
        bbox = obj["bbox"]
        if not isinstance(bbox, (list, tuple)) or len(bbox) != 4:
            raise DataFormatError(f"{where}.bbox must be a 4-element [x, y, w, h] array")
        label = obj.get("label", BACKGROUND)
        if label is None:
            label = BACKGROUND
        try:
            detections.append(
                Detection(
                    bbox=BBoxXYWH(*(float(v) for v in bbox)),
                    label=int(label),
                    score=float(obj.get("score", 1.0)),
                    cls_loss=float(obj.get("cls_loss", 0.0)),
                    image_id=int(obj["image_id"]),
                )
            )
        except (TypeError, ValueError) as exc:
            raise DataFormatError(f"{where}: {exc}") from exc
    return detections


__all__ = [
    "BACKGROUND",
    "Detection",
    "LossBreakdown",
    "OutcomePartition",
    "Prediction",
    "iou",
    "keep_fraction_schedule",
    "load_detections",
    "masked_loss",
    "partition_outcomes",
    "small_loss_select",
    "small_loss_select_grouped",
]
