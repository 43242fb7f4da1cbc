"""Manifest consumption and network-input assembly.

This package deliberately re-derives the block/mask geometry from the
manifest contract (element PNGs are flip-normalized with the distortion
center at their top-left corner; blocks of one eighth of the image sit at
diagonal fractions (2i-1)/(2n)); the derivation is validated against the
manifest's recorded block centers in the test suite.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from PIL import Image

FLIP_AXES = {"none": None, "horizontal": 1, "vertical": 0, "diagonal": (0, 1)}


@dataclass(frozen=True)
class ManifestRecord:
    id: str
    split: str
    element_paths: tuple[str, ...]
    flips: tuple[str, ...]
    radii: tuple[float, ...]
    ordinal: tuple[float, ...]
    k: tuple[float, ...]
    r_norm: float
    model: str
    principal_point: tuple[float, float]
    source_path: str
    distorted_path: str


def read_manifest(path) -> list[ManifestRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            data = json.loads(line)
            records.append(
                ManifestRecord(
                    id=data["id"],
                    split=data["split"],
                    element_paths=tuple(data["element_paths"]),
                    flips=tuple(data["flips"]),
                    radii=tuple(data["radii"]),
                    ordinal=tuple(data["ordinal"]),
                    k=tuple(data["coefficients"]["k"]),
                    r_norm=float(data["coefficients"]["r_norm"]),
                    model=data["coefficients"]["model"],
                    principal_point=(
                        float(data["principal_point"]["xc"]),
                        float(data["principal_point"]["yc"]),
                    ),
                    source_path=data["source_path"],
                    distorted_path=data["distorted_path"],
                )
            )
    return records


def load_image(path) -> np.ndarray:
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"), dtype=np.float32) / 255.0


def unflip(element: np.ndarray, flip: str) -> np.ndarray:
    axis = FLIP_AXES[flip]
    if axis is None:
        return element
    return np.flip(element, axis=axis).copy()


def block_geometry(element_hw: tuple[int, int], n: int):
    """Block size, per-block origins, and continuous centers for one element."""
    eh, ew = element_hw
    bw, bh = ew // 4, eh // 4  # one eighth of the full image
    fractions = (2 * np.arange(1, n + 1) - 1) / (2 * n)
    centers_x = -0.5 + fractions * ew
    centers_y = -0.5 + fractions * eh
    origins = [
        (int(round(cx - bw / 2 + 0.5)), int(round(cy - bh / 2 + 0.5)))
        for cx, cy in zip(centers_x, centers_y)
    ]
    return (bw, bh), origins, np.stack([centers_x, centers_y], axis=-1)


def region_masks(element_hw: tuple[int, int], n: int) -> np.ndarray:
    """(n, 2, H, W) box and blob channels, blob anchored on the pixel grid."""
    eh, ew = element_hw
    (bw, bh), origins, centers = block_geometry(element_hw, n)
    sigma = min(bw, bh) / 4.0
    xs = np.arange(ew, dtype=np.float32)
    ys = np.arange(eh, dtype=np.float32)
    masks = np.zeros((n, 2, eh, ew), dtype=np.float32)
    for i, ((x0, y0), (cx, cy)) in enumerate(zip(origins, centers)):
        masks[i, 0, y0 : y0 + bh, x0 : x0 + bw] = 1.0
        ax, ay = math.floor(cx + 0.5), math.floor(cy + 0.5)
        masks[i, 1] = np.exp(
            -((xs[np.newaxis, :] - ax) ** 2 + (ys[:, np.newaxis] - ay) ** 2)
            / (2.0 * sigma**2)
        )
    return masks


@dataclass
class SampleTensors:
    """Inputs for one (record, element) pair plus both target kinds."""

    global_ctx: torch.Tensor  # (5, H/2, W/2)
    local_ctxs: torch.Tensor  # (n, 5, h, w)
    levels: torch.Tensor  # (n,)
    k: torch.Tensor  # (n,)
    record_id: str


def build_inputs(
    element: np.ndarray,
    n: int,
    use_masks: bool,
) -> tuple[torch.Tensor, torch.Tensor]:
    eh, ew = element.shape[:2]
    (bw, bh), origins, _ = block_geometry((eh, ew), n)
    masks = region_masks((eh, ew), n)
    if not use_masks:
        masks = np.zeros_like(masks)

    box_union = masks[:, 0].max(axis=0)
    blob_union = masks[:, 1].max(axis=0)
    global_ctx = np.concatenate(
        [element.transpose(2, 0, 1), box_union[None], blob_union[None]], axis=0
    )

    locals_ = np.zeros((n, 5, bh, bw), dtype=np.float32)
    for i, (x0, y0) in enumerate(origins):
        crop = element[y0 : y0 + bh, x0 : x0 + bw]
        locals_[i, :3] = crop.transpose(2, 0, 1)
        locals_[i, 3] = masks[i, 0, y0 : y0 + bh, x0 : x0 + bw]
        locals_[i, 4] = masks[i, 1, y0 : y0 + bh, x0 : x0 + bw]
    return torch.from_numpy(global_ctx.astype(np.float32)), torch.from_numpy(locals_)


def load_samples(
    manifest_path,
    split: str,
    n: int,
    use_masks: bool = True,
    flip_normalized: bool = True,
    element_indices: tuple[int, ...] = (0, 1, 2, 3),
) -> list[SampleTensors]:
    """Materialize input tensors for every (record, element) pair of a split.

    Training consumes all four elements; evaluation passes a single index
    (the canonical bottom-right element, index 3).
    """
    manifest_path = Path(manifest_path)
    root = manifest_path.parent
    samples = []
    for record in read_manifest(manifest_path):
        if record.split != split:
            continue
        for idx in element_indices:
            element = load_image(root / record.element_paths[idx])
            if not flip_normalized:
                element = unflip(element, record.flips[idx])
            global_ctx, local_ctxs = build_inputs(element, n, use_masks)
            samples.append(
                SampleTensors(
                    global_ctx=global_ctx,
                    local_ctxs=local_ctxs,
                    levels=torch.tensor(record.ordinal, dtype=torch.float32),
                    k=torch.tensor(record.k, dtype=torch.float32),
                    record_id=record.id,
                )
            )
    return samples


def stack_samples(samples: list[SampleTensors]):
    """Batch tensors: (globals, locals, levels, ks)."""
    return (
        torch.stack([s.global_ctx for s in samples]),
        torch.stack([s.local_ctxs for s in samples]),
        torch.stack([s.levels for s in samples]),
        torch.stack([s.k for s in samples]),
    )
