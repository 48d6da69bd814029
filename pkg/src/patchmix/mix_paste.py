"""Same-label patch mixing: peer sampling, edge-weight masks, per-image pasting.

For every annotated item rectangle the augmentation samples same-category
patches from other images, mixes them with the original under an edge
smoothing mask, and writes the mixed patch back over the rectangle. Labels
and boxes are never touched; only pixels inside annotation rectangles of
selected images change.

Whole-dataset runs select images by an independent per-image Bernoulli draw
and distribute the work across threads; every random decision comes from a
substream keyed by (seed, image id, annotation id), so output bytes are
identical for any worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path, PurePosixPath
from typing import Any, Callable, Sequence

import numpy as np

from ._rng import substream
from ._validation import (
    check_band_fraction,
    check_int_at_least,
    check_positive,
    check_probability,
)
from .dataset import Annotation, CategoryIndex, Dataset, PeerRef, index_by_category
from .raster import (
    EmptyCropError,
    Patch,
    Raster,
    WeightField,
    blend,
    crop,
    load_image,
    resize,
    save_image,
)


@dataclass(frozen=True)
class MixConfig:
    """Mixing parameters.

    k is the total number of patches mixed, original included. apply_prob is
    the per-image chance of augmenting at all. beta_frac sets the smoothing
    band as a fraction of the patch width. The interior weight of the
    original patch is drawn from Beta(lambda_a, lambda_b) once per mix.
    """

    k: int = 2
    apply_prob: float = 0.6
    beta_frac: float = 0.10
    lambda_a: float = 1.0
    lambda_b: float = 1.0
    seed: int = 0

    def __post_init__(self):
        check_int_at_least("k", self.k, 2)
        check_probability("apply_prob", self.apply_prob)
        check_band_fraction("beta_frac", self.beta_frac)
        check_positive("lambda_a", self.lambda_a)
        check_positive("lambda_b", self.lambda_b)


@dataclass(frozen=True)
class Skip:
    """Why an item was left unmixed. A Skip is data, not an error."""

    reason: str


@dataclass(frozen=True)
class MixRecord:
    """Outcome for one target annotation: its peers and lambda, or a skip reason."""

    annotation_id: int
    peer_annotation_ids: tuple[int, ...] = ()
    lam: float | None = None
    skipped: str | None = None

    def to_json(self) -> dict[str, Any]:
        return {
            "annotation_id": self.annotation_id,
            "peer_annotation_ids": list(self.peer_annotation_ids),
            "lambda": self.lam,
            "skipped": self.skipped,
        }


def sample_peers(
    idx: CategoryIndex,
    target: Annotation,
    k: int,
    rng: np.random.Generator,
) -> list[PeerRef] | Skip:
    """Draw k-1 same-category annotations uniformly, excluding the target's own image.

    Returns a Skip when the category has no cross-image entries, or fewer
    than k-1 of them.
    """
    check_int_at_least("k", k, 2)
    pool = [e for e in idx.entries(target.category_id) if e.image_id != target.image_id]
    if not pool:
        return Skip("no cross-image peer")
    if len(pool) < k - 1:
        return Skip("insufficient cross-image peers")
    chosen = rng.choice(len(pool), size=k - 1, replace=False)
    return [pool[int(i)] for i in chosen]


def edge_mask(w: int, h: int, beta_frac: float, lam: float) -> WeightField:
    """Original-patch weight field: 1 on the border, decaying linearly to lam.

    The decay runs over a band of beta_frac * w pixels measured from the
    nearest patch edge (minimum of the four edge distances), so the band
    wraps all four sides; beyond it the weight is lam everywhere.
    """
    check_int_at_least("w", w, 1)
    check_int_at_least("h", h, 1)
    check_band_fraction("beta_frac", beta_frac)
    check_probability("lambda", lam)
    rows = np.arange(h, dtype=np.float64)
    cols = np.arange(w, dtype=np.float64)
    d_rows = np.minimum(rows, (h - 1) - rows)[:, None]
    d_cols = np.minimum(cols, (w - 1) - cols)[None, :]
    d = np.minimum(d_rows, d_cols)
    t = beta_frac * w
    alpha = np.where(d <= t, 1.0 - (1.0 - lam) * (d / t), lam)
    return WeightField(alpha)


def mix_weight_fields(alpha: WeightField, k: int) -> list[WeightField]:
    """The k per-patch weight fields of one mix: alpha, then (1-alpha)/(k-1) per peer.

    Per pixel the fields sum to 1 before quantization.
    """
    check_int_at_least("k", k, 2)
    peer = WeightField((1.0 - alpha.weights) / (k - 1))
    return [alpha] + [peer] * (k - 1)


def mix_patches(
    original: Patch,
    peers: Sequence[Patch],
    cfg: MixConfig,
    rng: np.random.Generator,
) -> tuple[Patch, float]:
    """Mix the original patch with its peers under a fresh edge mask.

    Draws lambda from Beta(lambda_a, lambda_b), resizes every peer to the
    original's pixel size, and blends. Returns the mixed patch (keeping the
    original's origin) and the sampled lambda.
    """
    if not peers:
        raise ValueError("at least one peer patch is required")
    lam = float(rng.beta(cfg.lambda_a, cfg.lambda_b))
    alpha = edge_mask(original.width, original.height, cfg.beta_frac, lam)
    resized = [resize(p, original.width, original.height) for p in peers]
    fields = mix_weight_fields(alpha, len(peers) + 1)
    mixed = blend([original, *resized], fields)
    return mixed, lam


PeerPatchLoader = Callable[[PeerRef], "Patch | None"]


def apply_to_image(
    img: Raster,
    anns: Sequence[Annotation],
    idx: CategoryIndex,
    cfg: MixConfig,
    peer_patches: PeerPatchLoader,
) -> tuple[Raster, list[MixRecord]]:
    """Mix-and-paste every annotation's rectangle on one image.

    Annotations are processed in ascending id order; each one gets its own
    keyed substream, samples peers, and overwrites its own rectangle with
    the mixed patch. Labels and boxes are not modified. Items that cannot
    be mixed (no peers, degenerate or fully outside boxes, unavailable peer
    pixels) are recorded as skipped and leave their pixels alone.
    """
    records: list[MixRecord] = []
    work = img.pixels.copy()
    for ann in sorted(anns, key=lambda a: a.id):
        rng = substream(cfg.seed, "item", ann.image_id, ann.id)
        peers = sample_peers(idx, ann, cfg.k, rng)
        if isinstance(peers, Skip):
            records.append(MixRecord(ann.id, skipped=peers.reason))
            continue
        if ann.bbox.w <= 0 or ann.bbox.h <= 0:
            records.append(MixRecord(ann.id, skipped="degenerate box"))
            continue
        try:
            target = crop(Raster(work), ann.bbox)
        except EmptyCropError:
            records.append(MixRecord(ann.id, skipped="box outside image"))
            continue
        peer_list = []
        for ref in peers:
            patch = peer_patches(ref)
            if patch is None:
                break
            peer_list.append(patch)
        if len(peer_list) != len(peers):
            records.append(MixRecord(ann.id, skipped="peer patch unavailable"))
            continue
        mixed, lam = mix_patches(target, peer_list, cfg, rng)
        x0, y0 = mixed.origin
        work[y0 : y0 + mixed.height, x0 : x0 + mixed.width] = mixed.pixels
        records.append(
            MixRecord(ann.id, tuple(ref.annotation_id for ref in peers), lam)
        )
    return Raster(work), records


def select_images(d: Dataset, cfg: MixConfig) -> set[int]:
    """Ids of images chosen for augmentation by independent Bernoulli(apply_prob) draws."""
    return {
        img.id
        for img in d.images
        if substream(cfg.seed, "select", img.id).random() < cfg.apply_prob
    }


def presence_probability(p_noise: float, k: int) -> float:
    """Chance that at least one of k independently corrupted annotations is clean."""
    check_probability("p_noise", p_noise)
    check_int_at_least("k", k, 1)
    return 1.0 - p_noise**k


@dataclass
class ImageResult:
    image_id: int
    file_name: str
    selected: bool
    records: list[MixRecord] = field(default_factory=list)
    error: str | None = None


@dataclass
class AugmentReport:
    """Aggregated outcome of a whole-dataset augmentation run."""

    total_images: int
    selected_images: int
    mixed_items: int
    skipped_items: int
    per_category: dict[int, dict[str, int]]
    lambda_stats: dict[str, Any]
    results: list[ImageResult]

    @property
    def selected_fraction(self) -> float:
        return self.selected_images / self.total_images if self.total_images else 0.0

    @property
    def errors(self) -> list[ImageResult]:
        return [r for r in self.results if r.error is not None]

    def to_json(self) -> dict[str, Any]:
        return {
            "total_images": self.total_images,
            "selected_images": self.selected_images,
            "selected_fraction": self.selected_fraction,
            "mixed_items": self.mixed_items,
            "skipped_items": self.skipped_items,
            "per_category": {
                str(cat): dict(counts) for cat, counts in self.per_category.items()
            },
            "lambda_stats": dict(self.lambda_stats),
            "errors": [
                {"image_id": r.image_id, "file_name": r.file_name, "error": r.error}
                for r in self.errors
            ],
            "images": [
                {
                    "image_id": r.image_id,
                    "file_name": r.file_name,
                    "selected": r.selected,
                    "records": [rec.to_json() for rec in r.records],
                }
                for r in self.results
            ],
        }


def _png_name(file_name: str) -> str:
    return str(PurePosixPath(file_name).with_suffix(".png"))


def augment_dataset(
    d: Dataset,
    image_root: str | Path,
    out_root: str | Path,
    cfg: MixConfig,
    workers: int = 1,
) -> tuple[Dataset, AugmentReport]:
    """Augment a whole dataset tree.

    Selected images are processed by apply_to_image and written as PNG under
    out_root (mirroring their relative paths); unselected images are copied
    byte-for-byte. The returned dataset only updates file names of selected
    images (to their .png form); annotations are emitted unchanged.

    Unreadable source images are reported per image and the run continues;
    errors writing under out_root abort.
    """
    check_int_at_least("workers", workers, 1)
    image_root = Path(image_root)
    out_root = Path(out_root)
    out_root.mkdir(parents=True, exist_ok=True)

    idx = index_by_category(d)
    annotations_by_id = d.annotations_by_id
    images_by_id = d.images_by_id
    anns_by_image = d.annotations_by_image
    selected = select_images(d, cfg)

    @lru_cache(maxsize=64)
    def _source_raster(image_id: int) -> Raster:
        return load_image(image_root / images_by_id[image_id].file_name)

    def peer_patch(ref: PeerRef) -> Patch | None:
        ann = annotations_by_id[ref.annotation_id]
        if ann.bbox.w <= 0 or ann.bbox.h <= 0:
            return None
        try:
            return crop(_source_raster(ref.image_id), ann.bbox)
        except (OSError, ValueError):
            return None

    def process(img_rec) -> ImageResult:
        src = image_root / img_rec.file_name
        if img_rec.id not in selected:
            dest = out_root / img_rec.file_name
            try:
                data = src.read_bytes()
            except OSError as exc:
                return ImageResult(img_rec.id, img_rec.file_name, False, error=str(exc))
            dest.parent.mkdir(parents=True, exist_ok=True)
            dest.write_bytes(data)
            return ImageResult(img_rec.id, img_rec.file_name, False)
        try:
            raster = load_image(src)
        except (OSError, ValueError) as exc:
            return ImageResult(img_rec.id, img_rec.file_name, True, error=str(exc))
        out_raster, records = apply_to_image(
            raster, anns_by_image.get(img_rec.id, ()), idx, cfg, peer_patch
        )
        new_name = _png_name(img_rec.file_name)
        dest = out_root / new_name
        dest.parent.mkdir(parents=True, exist_ok=True)
        save_image(out_raster, dest)
        return ImageResult(img_rec.id, new_name, True, records=records)

    if workers == 1:
        results = [process(img) for img in d.images]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(process, d.images))
    results.sort(key=lambda r: r.image_id)

    categories_of = {ann.id: ann.category_id for ann in d.annotations}
    per_category: dict[int, dict[str, int]] = {
        cat.id: {"mixed": 0, "skipped": 0} for cat in d.categories
    }
    lams: list[float] = []
    mixed_items = 0
    skipped_items = 0
    for res in results:
        for rec in res.records:
            bucket = per_category.setdefault(
                categories_of[rec.annotation_id], {"mixed": 0, "skipped": 0}
            )
            if rec.skipped is None:
                bucket["mixed"] += 1
                mixed_items += 1
                lams.append(rec.lam)
            else:
                bucket["skipped"] += 1
                skipped_items += 1

    lambda_stats: dict[str, Any] = {"count": len(lams)}
    if lams:
        lambda_stats.update(
            mean=float(np.mean(lams)), min=float(np.min(lams)), max=float(np.max(lams))
        )
    else:
        lambda_stats.update(mean=None, min=None, max=None)

    out_images = []
    by_id = {r.image_id: r for r in results}
    for img in d.images:
        res = by_id[img.id]
        if res.selected and res.error is None:
            out_images.append(replace(img, file_name=res.file_name))
        else:
            out_images.append(img)
    out_dataset = replace(d, images=out_images)

    report = AugmentReport(
        total_images=len(d.images),
        selected_images=len(selected),
        mixed_items=mixed_items,
        skipped_items=skipped_items,
        per_category=per_category,
        lambda_stats=lambda_stats,
        results=results,
    )
    return out_dataset, report


__all__ = [
    "AugmentReport",
    "ImageResult",
    "MixConfig",
    "MixRecord",
    "PeerPatchLoader",
    "Skip",
    "apply_to_image",
    "augment_dataset",
    "edge_mask",
    "mix_patches",
    "mix_weight_fields",
    "presence_probability",
    "sample_peers",
    "select_images",
]
