"""Pixel primitives: 8-bit RGB buffers, clamped crops, bilinear resize, weighted blends.

All operations are pure functions on immutable buffers. Mixing arithmetic is
accumulated in float64 and quantized exactly once (round half-up), so outputs
are byte-deterministic across platforms and worker counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image

from .dataset import BBoxXYWH

WEIGHT_SUM_TOL = 1e-6


class EmptyCropError(ValueError):
    """The requested box does not intersect the image at all."""


@dataclass(frozen=True, eq=False)
class Raster:
    """An 8-bit RGB image held as a C-contiguous (height, width, 3) uint8 array."""

    pixels: np.ndarray

    def __post_init__(self):
        p = np.ascontiguousarray(self.pixels)
        if p.ndim != 3 or p.shape[2] != 3 or p.dtype != np.uint8:
            raise ValueError(
                f"expected a (height, width, 3) uint8 buffer, got shape "
                f"{self.pixels.shape} dtype {self.pixels.dtype}"
            )
        object.__setattr__(self, "pixels", p)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def channels(self) -> int:
        return 3


@dataclass(frozen=True, eq=False)
class Patch(Raster):
    """A Raster plus the (x, y) origin of its rectangle in source-image coordinates."""

    origin: tuple[int, int] = (0, 0)


@dataclass(frozen=True, eq=False)
class WeightField:
    """Per-pixel weights in [0, 1], shared across channels."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.ascontiguousarray(self.weights, dtype=np.float64)
        if w.ndim != 2:
            raise ValueError(f"expected a (height, width) weight array, got shape {self.weights.shape}")
        if w.size and (w.min() < 0.0 or w.max() > 1.0):
            raise ValueError("weights must lie in [0, 1]")
        object.__setattr__(self, "weights", w)

    @property
    def width(self) -> int:
        return self.weights.shape[1]

    @property
    def height(self) -> int:
        return self.weights.shape[0]


def load_image(path: str | Path) -> Raster:
    """Decode a PNG or JPEG file to 8-bit RGB; grayscale is promoted to 3 channels."""
    with Image.open(path) as im:
        rgb = im.convert("RGB")
        return Raster(np.asarray(rgb, dtype=np.uint8))


def save_image(r: Raster, path: str | Path) -> None:
    """Write PNG regardless of extension; lossless, so augmented bytes survive exactly."""
    Image.fromarray(r.pixels, mode="RGB").save(path, format="PNG")


def _quantize(values: np.ndarray) -> np.ndarray:
    # round half-up, then clip; inputs are convex combinations of uint8 samples
    return np.clip(np.floor(values + 0.5), 0.0, 255.0).astype(np.uint8)


def box_to_rect(b: BBoxXYWH, img_w: int, img_h: int) -> tuple[int, int, int, int]:
    """Enclosing integer rectangle of b clipped to the image, as (x0, y0, x1, y1).

    Floor the top-left and ceil the bottom-right so no item pixel is lost to
    rounding; boxes reaching outside the image are clamped, not rejected.
    """
    x0 = max(math.floor(b.x), 0)
    y0 = max(math.floor(b.y), 0)
    x1 = min(math.ceil(b.x + b.w), img_w)
    y1 = min(math.ceil(b.y + b.h), img_h)
    return x0, y0, x1, y1


def crop(r: Raster, b: BBoxXYWH) -> Patch:
    """Pixels of b's enclosing integer rectangle, clipped to the image bounds.

    The returned patch records its actual origin, which is also its actual
    extent when b reached outside the image.
    """
    if b.w <= 0 or b.h <= 0:
        raise ValueError(f"cannot crop a degenerate box {b.w}x{b.h}")
    x0, y0, x1, y1 = box_to_rect(b, r.width, r.height)
    if x0 >= x1 or y0 >= y1:
        raise EmptyCropError(f"box ({b.x}, {b.y}, {b.w}, {b.h}) lies entirely outside the image")
    return Patch(r.pixels[y0:y1, x0:x1].copy(), origin=(x0, y0))


def _sample_grid(src: int, dst: int) -> np.ndarray:
    # corner-aligned: output endpoints sample input endpoints exactly
    if dst == 1 or src == 1:
        return np.zeros(dst, dtype=np.float64)
    return np.arange(dst, dtype=np.float64) * ((src - 1) / (dst - 1))


def resize(p: Patch, target_w: int, target_h: int) -> Patch:
    """Corner-aligned bilinear resample to exactly (target_w, target_h)."""
    if target_w < 1 or target_h < 1:
        raise ValueError(f"target size must be positive, got {target_w}x{target_h}")
    if (target_w, target_h) == (p.width, p.height):
        return Patch(p.pixels.copy(), origin=p.origin)

    src = p.pixels.astype(np.float64)
    xs = _sample_grid(p.width, target_w)
    ys = _sample_grid(p.height, target_h)
    x0 = np.floor(xs).astype(np.intp)
    y0 = np.floor(ys).astype(np.intp)
    x1 = np.minimum(x0 + 1, p.width - 1)
    y1 = np.minimum(y0 + 1, p.height - 1)
    fx = (xs - x0)[None, :, None]
    fy = (ys - y0)[:, None, None]

    tl = src[y0[:, None], x0[None, :]]
    tr = src[y0[:, None], x1[None, :]]
    bl = src[y1[:, None], x0[None, :]]
    br = src[y1[:, None], x1[None, :]]
    out = (1.0 - fy) * ((1.0 - fx) * tl + fx * tr) + fy * ((1.0 - fx) * bl + fx * br)
    return Patch(_quantize(out), origin=p.origin)


def blend(patches: Sequence[Patch], weights: Sequence[WeightField]) -> Patch:
    """Per-pixel, per-channel convex combination of patches, quantized once.

    Per-pixel weights must sum to 1 within WEIGHT_SUM_TOL, so every output
    sample lies within the [min, max] envelope of the inputs at its position.
    The result keeps the first patch's origin.
    """
    if not patches or len(patches) != len(weights):
        raise ValueError("need equally many patches and weight fields, at least one each")
    w0, h0 = patches[0].width, patches[0].height
    for item in (*patches, *weights):
        if (item.width, item.height) != (w0, h0):
            raise ValueError(
                f"dimension mismatch: expected {w0}x{h0}, got {item.width}x{item.height}"
            )
    total = np.zeros((h0, w0), dtype=np.float64)
    for wf in weights:
        total += wf.weights
    if np.any(np.abs(total - 1.0) > WEIGHT_SUM_TOL):
        worst = float(np.max(np.abs(total - 1.0)))
        raise ValueError(f"per-pixel weights must sum to 1 (max deviation {worst:.3g})")

    acc = np.zeros((h0, w0, 3), dtype=np.float64)
    for patch, wf in zip(patches, weights):
        acc += wf.weights[:, :, None] * patch.pixels
    return Patch(_quantize(acc), origin=patches[0].origin)


def paste(img: Raster, patch: Patch) -> Raster:
    """A new raster with patch written over its rectangle at patch.origin."""
    x0, y0 = patch.origin
    if x0 < 0 or y0 < 0 or x0 + patch.width > img.width or y0 + patch.height > img.height:
        raise ValueError("patch rectangle reaches outside the image")
    out = img.pixels.copy()
    out[y0 : y0 + patch.height, x0 : x0 + patch.width] = patch.pixels
    return Raster(out)


__all__ = [
    "EmptyCropError",
    "Patch",
    "Raster",
    "WeightField",
    "WEIGHT_SUM_TOL",
    "blend",
    "box_to_rect",
    "crop",
    "load_image",
    "paste",
    "resize",
    "save_image",
]
