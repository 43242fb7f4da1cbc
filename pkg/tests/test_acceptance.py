"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines. Thresholds are pinned here and never relaxed at runtime.

One criterion (the distort/rectify round trip) is expected to fail for a
geometric reason documented in its docstring and in the project notes: under
the division model the corrected field of a full frame reaches only
r_norm / delta(1), which for delta(1) > sqrt(2) ~ 1.4142 is less than the
50%-area crop's corner radius (0.7071 * r_norm). Draws in (sqrt(2), 1.5]
therefore lose crop-corner content no matter how good the resampling is.
The assertion is kept faithful to the stated tolerance instead of being
narrowed to the passing regime.
"""

import hashlib
import math
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import random_valid_coefficients
from ordcal.camera import (
    DistortionCoefficients,
    Model,
    PrincipalPoint,
    forward_radius,
    half_diagonal,
    solve_distorted_radius_many,
)
from ordcal.imageops import central_crop, load_png
from ordcal.metrics import LfrGroup, learning_friendly_rate, mdld, psnr, rmse_params
from ordcal.ordinal import (
    DEFAULT_RADII,
    DistortionDistributionMap,
    check_symmetry,
    compute_ordinal,
    ddm,
    ordinal_to_coefficients,
)
from ordcal.rectify import rectify_image
from ordcal.synth import (
    CoefficientRanges,
    GenerateConfig,
    default_ranges,
    distort_image,
    generate_dataset,
    make_scene,
    sample_coefficients,
)


def report(name: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")


def test_ordinal_coefficient_round_trip():
    """1000 random k: coefficients -> levels -> coefficients to 1e-6, < 5 s."""
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        k = random_valid_coefficients(rng)
        back = ordinal_to_coefficients(compute_ordinal(k, DEFAULT_RADII))
        worst = max(worst, max(abs(a - b) for a, b in zip(k.k, back.coefficients.k)))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-6 and elapsed < 5.0
    report("ordinal round trip", ok, f"max error {worst:.3e}, {elapsed:.2f}s")
    assert worst <= 1e-6
    assert elapsed < 5.0


def test_radial_inversion():
    """1000 random (k, r): |solve(k, fwd(r)) - r| <= 1e-8 * r_norm, < 5 s."""
    rng = np.random.default_rng(102)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        r_norm = float(rng.uniform(50.0, 400.0))
        k = random_valid_coefficients(rng, r_norm=r_norm)
        r = float(rng.uniform(0.0, r_norm))
        solved = float(solve_distorted_radius_many(k, np.asarray([forward_radius(k, r)]))[0])
        worst = max(worst, abs(solved - r) / r_norm)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-8 and elapsed < 5.0
    report("radial inversion", ok, f"max error {worst:.3e} r_norm, {elapsed:.2f}s")
    assert worst <= 1e-8
    assert elapsed < 5.0


def test_symmetry_exact_for_centered_maps():
    """check_symmetry(ddm) == 0 exactly for 100 random k at 128x128."""
    rng = np.random.default_rng(103)
    r_norm = half_diagonal(128, 128)
    worst = 0.0
    for _ in range(100):
        k = random_valid_coefficients(rng, r_norm=r_norm)
        worst = max(worst, check_symmetry(ddm(k, PrincipalPoint(64.0, 64.0), 128, 128)))
    report("mirror symmetry", worst == 0.0, f"max asymmetry {worst!r}")
    assert worst == 0.0


def test_distort_rectify_round_trip():
    """PSNR >= 28 dB on the central 50%-area crop for 50 draws, delta(1) <= 1.5.

    Smooth (band-limited) scenes isolate warp fidelity; hard-edged content
    measures resampling of step edges instead (see scripts/roundtrip_probe.py).
    Expected to FAIL on draws with delta(1) > sqrt(2): those lose crop-corner
    content to the bounded corrected field, a property of the synthesis
    geometry rather than of the rectification code. Kept as stated.
    """
    rng = np.random.default_rng(104)
    size = 256
    r_norm = half_diagonal(size, size)
    ranges = CoefficientRanges(default_ranges(4).intervals, 1.05, 1.5)
    start = time.perf_counter()
    results = []
    for _ in range(50):
        scene = make_scene(rng, size, size, "smooth")
        unit = sample_coefficients(ranges, rng)
        k = DistortionCoefficients(Model.DIVISION, unit.k, r_norm)
        restored = rectify_image(distort_image(scene, k), k)
        value = psnr(central_crop(scene, 0.5), central_crop(restored, 0.5))
        results.append((value, 1.0 + sum(unit.k)))
    elapsed = time.perf_counter() - start
    failures = [(v, d) for v, d in results if v < 28.0]
    ok = not failures and elapsed < 60.0
    detail = f"min PSNR {min(v for v, _ in results):.2f} dB, {elapsed:.1f}s"
    if failures:
        geometric = all(d > math.sqrt(2) for _, d in failures)
        detail += (
            f"; {len(failures)} draws under 28 dB, all with delta(1) > sqrt(2): "
            f"{geometric} -> "
            + ", ".join(f"{v:.1f}dB@delta1={d:.3f}" for v, d in failures)
        )
    report("distort/rectify round trip", ok, detail)
    assert elapsed < 60.0
    assert not failures, (
        "crop-corner content is unreachable for delta(1) > sqrt(2); "
        "see the module docstring and notes/decisions.md"
    )


def test_metric_hand_values():
    """The four hand-computed metric examples match to 1e-6."""
    a = np.zeros((2, 2, 1), dtype=np.uint8)
    b = a.copy()
    b[0, 0, 0] = 16
    psnr_value = psnr(a, b)
    psnr_ok = abs(psnr_value - 10 * math.log10(255**2 / 64)) <= 1e-6

    maps = (
        DistortionDistributionMap(2, 2, np.array([[1.0, 1.1], [1.2, 1.3]]), PrincipalPoint(1, 1)),
        DistortionDistributionMap(2, 2, np.ones((2, 2)), PrincipalPoint(1, 1)),
    )
    mdld_value = mdld(maps[0], maps[1])
    mdld_ok = abs(mdld_value - 0.15) <= 1e-6

    rmse_value = rmse_params((1.0, 1.0), (0.0, 3.0))
    rmse_ok = abs(rmse_value - 1.5) <= 1e-6

    lfr_value = learning_friendly_rate([LfrGroup(0.07, 10, 5)], 10, 10)
    lfr_ok = abs(lfr_value - math.log(1.5) / 0.07) <= 1e-6

    ok = psnr_ok and mdld_ok and rmse_ok and lfr_ok
    report(
        "metric hand values", ok,
        f"psnr {psnr_value:.4f} dB, mdld {mdld_value}, rmse {rmse_value}, "
        f"lfr {lfr_value:.6f}",
    )
    assert psnr_ok and mdld_ok and rmse_ok and lfr_ok


def test_mdld_metric_axioms():
    """Non-negativity, identity, symmetry, triangle on 500 random map pairs."""
    rng = np.random.default_rng(106)
    ok = True
    for _ in range(500):
        shape = (int(rng.integers(2, 9)), int(rng.integers(2, 9)))
        a, b, c = (rng.uniform(0.5, 3.0, size=shape) for _ in range(3))
        make = lambda v: DistortionDistributionMap(
            shape[1], shape[0], v, PrincipalPoint(shape[1] / 2, shape[0] / 2)
        )
        ma, mb, mc = make(a), make(b), make(c)
        ok &= mdld(ma, mb) >= 0.0
        ok &= mdld(ma, ma) == 0.0
        ok &= (mdld(ma, mb) == 0.0) == bool(np.array_equal(a, b))
        ok &= mdld(ma, mb) == mdld(mb, ma)
        ok &= mdld(ma, mc) <= mdld(ma, mb) + mdld(mb, mc) + 1e-12
    report("mdld metric axioms", ok, "500 random map pairs")
    assert ok


def _tree_hash(root: Path) -> str:
    digest = hashlib.sha256()
    for path in sorted(root.rglob("*")):
        if path.is_file():
            digest.update(path.relative_to(root).as_posix().encode())
            digest.update(path.read_bytes())
    return digest.hexdigest()


def test_dataset_determinism(tmp_path, monkeypatch):
    """generate --seed S is byte-identical for any ORDCAL_THREADS setting."""
    counts = {"train": 3, "val": 1, "test": 1}
    hashes = []
    for threads, name in (("1", "a"), ("4", "b"), ("7", "c")):
        monkeypatch.setenv("ORDCAL_THREADS", threads)
        generate_dataset(GenerateConfig(tmp_path / name, counts, 64, 64, seed=20240601))
        hashes.append(_tree_hash(tmp_path / name))
    ok = len(set(hashes)) == 1
    report("dataset determinism", ok, f"3 runs, threads 1/4/7, identical: {ok}")
    assert ok


def test_rectification_headroom_over_reported_numbers(tmp_path):
    """Ground-truth rectification beats the 24.82 dB reference on the test split.

    Absolute reported numbers (PSNR 24.82 / SSIM 0.84 / MDLD 0.04) need the
    full-scale trained model and corpus, so they are explicitly not
    reproduced here. Instead the test split is rectified with its recorded
    ground-truth coefficients and the mean PSNR on the central 50%-area crop
    (the toolkit's canonical fidelity region, see the round-trip criterion)
    must exceed that reference value.
    """
    manifest = generate_dataset(
        GenerateConfig(tmp_path, {"train": 0, "val": 0, "test": 24}, 256, 256, seed=108)
    )
    values = []
    for record in manifest.by_split("test"):
        source = load_png(tmp_path / record.source_path)
        distorted = load_png(tmp_path / record.distorted_path)
        restored = rectify_image(distorted, record.coefficients, record.principal_point)
        values.append(psnr(central_crop(source, 0.5), central_crop(restored, 0.5)))
    mean = float(np.mean(values))
    ok = mean > 24.82
    report(
        "rectification headroom", ok,
        f"mean PSNR {mean:.2f} dB over 24 test samples (reference 24.82)",
    )
    assert mean > 24.82
