"""Shared raster helpers: PNG I/O, bilinear sampling, crops.

Warping code addresses pixels in plain index coordinates: raster pixel
(i, j) is the point (i, j), so an image spans [0, W-1] x [0, H-1]. Sample
points inside that box interpolate between their four neighbors (edge
neighbors are clamped); points outside take the background color.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image


def load_png(path) -> np.ndarray:
    """Read an image file as H x W x 3 uint8."""
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"), dtype=np.uint8)


def save_png(img: np.ndarray, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.ascontiguousarray(img)).save(path, format="PNG")


def sample_bilinear(
    img: np.ndarray,
    x: np.ndarray,
    y: np.ndarray,
    background,
) -> np.ndarray:
    """Bilinearly sample ``img`` (H x W x C float) at points (x, y).

    Returns an array shaped like ``x`` with a trailing channel axis.
    """
    h, w = img.shape[:2]
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    inside = (x >= 0.0) & (x <= w - 1.0) & (y >= 0.0) & (y <= h - 1.0)

    x0 = np.floor(x)
    y0 = np.floor(y)
    tx = x - x0
    ty = y - y0
    x0 = np.clip(x0.astype(np.int64), 0, w - 1)
    y0 = np.clip(y0.astype(np.int64), 0, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)

    tx = tx[..., np.newaxis]
    ty = ty[..., np.newaxis]
    value = (
        img[y0, x0] * (1.0 - tx) * (1.0 - ty)
        + img[y0, x1] * tx * (1.0 - ty)
        + img[y1, x0] * (1.0 - tx) * ty
        + img[y1, x1] * tx * ty
    )
    bg = np.asarray(background, dtype=np.float64)
    return np.where(inside[..., np.newaxis], value, bg)


def to_uint8(img: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def central_crop(img: np.ndarray, area_fraction: float) -> np.ndarray:
    """Centered crop keeping ``area_fraction`` of the pixel area."""
    if not 0.0 < area_fraction <= 1.0:
        raise ValueError("area fraction must be in (0, 1]")
    h, w = img.shape[:2]
    scale = np.sqrt(area_fraction)
    ch, cw = int(round(h * scale)), int(round(w * scale))
    y0 = (h - ch) // 2
    x0 = (w - cw) // 2
    return img[y0 : y0 + ch, x0 : x0 + cw]
