"""Noise-rate probing: annotation-vs-detection agreement screening and
simulation of the clean-item presence probability under patch mixing."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, NamedTuple, Sequence

import numpy as np

from ._validation import check_int_at_least, check_probability
from .dataset import Dataset
from .lls import Detection, iou


@dataclass(frozen=True)
class SuspectBox:
    """A ground-truth annotation no detection overlapped well enough."""

    annotation_id: int
    category_id: int
    best_iou: float


@dataclass(frozen=True)
class CategorySuspectStats:
    category_id: int
    name: str
    total: int
    suspects: int

    @property
    def rate(self) -> float:
        return self.suspects / self.total if self.total else 0.0


@dataclass(frozen=True)
class SuspectReport:
    """Per-category suspect counts plus the flagged annotations themselves."""

    cutoff: float
    per_category: list[CategorySuspectStats]
    suspects: list[SuspectBox]

    @property
    def total(self) -> CategorySuspectStats:
        return CategorySuspectStats(
            category_id=-1,
            name="Total",
            total=sum(s.total for s in self.per_category),
            suspects=sum(s.suspects for s in self.per_category),
        )

    def to_json(self) -> dict[str, Any]:
        def row(s: CategorySuspectStats) -> dict[str, Any]:
            return {
                "category_id": s.category_id,
                "name": s.name,
                "total": s.total,
                "suspects": s.suspects,
                "rate": s.rate,
                "rate_percent": f"{100.0 * s.rate:.2f}%",
            }

        return {
            "cutoff": self.cutoff,
            "per_category": [row(s) for s in self.per_category],
            "total": row(self.total),
            "suspects": [
                {
                    "annotation_id": s.annotation_id,
                    "category_id": s.category_id,
                    "best_iou": s.best_iou,
                }
                for s in self.suspects
            ],
        }

    def to_table(self) -> str:
        """Aligned plain-text summary: one row per category plus a total row."""
        rows = [("category", "annotations", "suspects", "rate")]
        for s in [*self.per_category, self.total]:
            rows.append((s.name, str(s.total), str(s.suspects), f"{100.0 * s.rate:.2f}%"))
        widths = [max(len(r[i]) for r in rows) for i in range(4)]
        lines = []
        for r in rows:
            lines.append(
                r[0].ljust(widths[0])
                + "  "
                + "  ".join(r[i].rjust(widths[i]) for i in range(1, 4))
            )
        return "\n".join(lines)


def suspect_boxes(
    detections: Sequence[Detection],
    gts: Dataset,
    iou_cutoff: float = 0.70,
) -> SuspectReport:
    """Flag ground-truth boxes whose best class-agnostic detection IoU is below the cutoff.

    Matching ignores labels entirely; each annotation is scored by its own
    best IoU against the detections on its image (no detection is consumed),
    and an annotation with no detections at all scores 0. The report is the
    review list a human annotation audit starts from.
    """
    if not 0.0 < iou_cutoff < 1.0:
        raise ValueError(f"iou_cutoff must be in (0, 1), got {iou_cutoff}")
    dets_by_image: dict[int, list[Detection]] = {}
    for det in detections:
        dets_by_image.setdefault(det.image_id, []).append(det)

    suspects = []
    totals: dict[int, int] = {cat.id: 0 for cat in gts.categories}
    flagged: dict[int, int] = {cat.id: 0 for cat in gts.categories}
    for ann in gts.annotations:
        totals[ann.category_id] = totals.get(ann.category_id, 0) + 1
        best = 0.0
        for det in dets_by_image.get(ann.image_id, ()):
            v = iou(ann.bbox, det.bbox)
            if v > best:
                best = v
        if best < iou_cutoff:
            flagged[ann.category_id] = flagged.get(ann.category_id, 0) + 1
            suspects.append(SuspectBox(ann.id, ann.category_id, best))

    per_category = [
        CategorySuspectStats(cat.id, cat.name, totals.get(cat.id, 0), flagged.get(cat.id, 0))
        for cat in gts.categories
    ]
    return SuspectReport(cutoff=iou_cutoff, per_category=per_category, suspects=suspects)


class PresenceEstimate(NamedTuple):
    estimate: float
    stderr: float


def monte_carlo_presence(
    p_noise: float,
    k: int,
    trials: int,
    rng: np.random.Generator | int | None = None,
) -> PresenceEstimate:
    """Simulated fraction of k-patch groups keeping at least one clean label.

    Each trial draws k independent Bernoulli(p_noise) corruption flags; the
    estimate converges to 1 - p_noise**k with the returned binomial standard
    error.
    """
    check_probability("p_noise", p_noise)
    check_int_at_least("k", k, 1)
    check_int_at_least("trials", trials, 1)
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    corrupted = gen.random((trials, k)) < p_noise
    estimate = float(np.mean(~corrupted.all(axis=1)))
    stderr = math.sqrt(estimate * (1.0 - estimate) / trials)
    return PresenceEstimate(estimate, stderr)


__all__ = [
    "CategorySuspectStats",
    "PresenceEstimate",
    "SuspectBox",
    "SuspectReport",
    "monte_carlo_presence",
    "suspect_boxes",
]
