import math

import numpy as np
import pytest

from ordest.data import (
    block_geometry,
    build_inputs,
    load_image,
    load_samples,
    read_manifest,
    region_masks,
    unflip,
)


def test_manifest_fields(toy_manifest):
    records = read_manifest(toy_manifest)
    assert len(records) == 10
    splits = {r.split for r in records}
    assert splits == {"train", "val", "test"}
    record = records[0]
    assert len(record.element_paths) == 4
    assert len(record.radii) == len(record.ordinal) == len(record.k) == 4


def test_block_geometry_matches_manifest_centers(toy_manifest):
    """Local block centers, mapped to image coordinates per quadrant, must
    reproduce the manifest's recorded block_centers exactly."""
    import json

    with open(toy_manifest, encoding="utf-8") as fh:
        raw = json.loads(fh.readline())
    record = read_manifest(toy_manifest)[0]
    root = toy_manifest.parent
    element = load_image(root / record.element_paths[0])
    eh, ew = element.shape[:2]
    _, _, centers_local = block_geometry((eh, ew), 4)
    width, height = 2 * ew, 2 * eh

    def to_image(quadrant, x, y):
        if quadrant == 3:  # bottom-right, canonical
            return width / 2 + x, height / 2 + y
        if quadrant == 0:  # top-left
            return width / 2 - 1 - x, height / 2 - 1 - y
        if quadrant == 1:  # top-right
            return width / 2 + x, height / 2 - 1 - y
        return width / 2 - 1 - x, height / 2 + y

    for quadrant, recorded in enumerate(raw["block_centers"]):
        mapped = [to_image(quadrant, x, y) for x, y in centers_local]
        np.testing.assert_allclose(mapped, recorded, atol=1e-9)


def test_radii_match_manifest(toy_manifest):
    record = read_manifest(toy_manifest)[0]
    root = toy_manifest.parent
    element = load_image(root / record.element_paths[3])
    eh, ew = element.shape[:2]
    _, _, centers_local = block_geometry((eh, ew), 4)
    cx, cy = record.principal_point
    width, height = 2 * ew, 2 * eh
    measured = [
        math.hypot(width / 2 + x - cx, height / 2 + y - cy) / record.r_norm
        for x, y in centers_local
    ]
    np.testing.assert_allclose(measured, record.radii, atol=1e-12)


def test_region_masks_shape_and_peak():
    masks = region_masks((32, 32), 4)
    assert masks.shape == (4, 2, 32, 32)
    for i in range(4):
        assert masks[i, 0].sum() == 64  # 8x8 box
        assert masks[i, 1].max() == 1.0


def test_unflip_is_involution():
    rng = np.random.default_rng(3)
    img = rng.random((6, 8, 3)).astype(np.float32)
    for tag in ("none", "horizontal", "vertical", "diagonal"):
        np.testing.assert_array_equal(unflip(unflip(img, tag), tag), img)


def test_build_inputs_shapes(toy_manifest):
    samples = load_samples(toy_manifest, "train", 4)
    assert len(samples) == 6 * 4  # every element of every training record
    sample = samples[0]
    assert sample.global_ctx.shape == (5, 32, 32)
    assert sample.local_ctxs.shape == (4, 5, 8, 8)
    assert sample.levels.shape == (4,)
    assert sample.k.shape == (4,)


def test_blocks_crop_from_element(toy_manifest):
    record = read_manifest(toy_manifest)[0]
    element = load_image(toy_manifest.parent / record.element_paths[3])
    global_ctx, local_ctxs = build_inputs(element, 4, use_masks=True)
    (bw, bh), origins, _ = block_geometry(element.shape[:2], 4)
    for i, (x0, y0) in enumerate(origins):
        expected = element[y0 : y0 + bh, x0 : x0 + bw].transpose(2, 0, 1)
        np.testing.assert_allclose(local_ctxs[i, :3].numpy(), expected, atol=1e-7)


def test_mask_ablation_zeroes_channels(toy_manifest):
    record = read_manifest(toy_manifest)[0]
    element = load_image(toy_manifest.parent / record.element_paths[3])
    global_ctx, local_ctxs = build_inputs(element, 4, use_masks=False)
    assert float(global_ctx[3:].abs().sum()) == 0.0
    assert float(local_ctxs[:, 3:].abs().sum()) == 0.0


def test_single_element_selection(toy_manifest):
    samples = load_samples(toy_manifest, "val", 4, element_indices=(3,))
    assert len(samples) == 2
