"""Synthetic distorted-image generation with full ground truth.

A generated sample couples a clean scene with its distorted rendering, the
sampled model coefficients, the four flip-normalized image elements, the
radially ordered block geometry inside each element, and the distortion
levels at the block radii. Everything is reproducible from a single seed;
each sample derives its own RNG stream from (seed, index) so results do
not depend on worker count or completion order.
"""

from __future__ import annotations

import enum
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .camera import (
    DistortionCoefficients,
    Model,
    PrincipalPoint,
    distortion_level_many,
    half_diagonal,
    validate_monotone,
)
from .errors import ConfigurationError
from .imageops import load_png, sample_bilinear, save_png, to_uint8
from .ordinal import compute_ordinal

THREADS_ENV = "ORDCAL_THREADS"


def worker_count() -> int:
    value = os.environ.get(THREADS_ENV)
    if value:
        return max(1, int(value))
    return min(8, os.cpu_count() or 1)


class FlipTag(enum.Enum):
    NONE = "none"
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"
    DIAGONAL = "diagonal"


class Quadrant(enum.IntEnum):
    TOP_LEFT = 0
    TOP_RIGHT = 1
    BOTTOM_LEFT = 2
    BOTTOM_RIGHT = 3


QUADRANT_FLIPS = {
    Quadrant.TOP_LEFT: FlipTag.DIAGONAL,
    Quadrant.TOP_RIGHT: FlipTag.VERTICAL,
    Quadrant.BOTTOM_LEFT: FlipTag.HORIZONTAL,
    Quadrant.BOTTOM_RIGHT: FlipTag.NONE,
}


def apply_flip(img: np.ndarray, tag: FlipTag) -> np.ndarray:
    """Flip an array in place-free fashion; the operation is an involution."""
    if tag is FlipTag.NONE:
        return img.copy()
    if tag is FlipTag.HORIZONTAL:
        return img[:, ::-1].copy()
    if tag is FlipTag.VERTICAL:
        return img[::-1, :].copy()
    return img[::-1, ::-1].copy()


@dataclass(frozen=True)
class CoefficientRanges:
    """Per-coefficient uniform sampling intervals, in normalized units.

    ``delta_lo``/``delta_hi`` bound the accepted level at normalized radius
    1 so sampled models stay visibly distorted but invertible. Degenerate
    ranges (every interval a single point) bypass that acceptance window,
    which keeps the zero-distortion configuration usable.
    """

    intervals: tuple[tuple[float, float], ...]
    delta_lo: float = 1.05
    delta_hi: float = 3.0

    def __post_init__(self):
        object.__setattr__(
            self,
            "intervals",
            tuple((float(lo), float(hi)) for lo, hi in self.intervals),
        )
        for lo, hi in self.intervals:
            if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
                raise ValueError(f"invalid interval [{lo}, {hi}]")

    @property
    def n(self) -> int:
        return len(self.intervals)

    @property
    def degenerate(self) -> bool:
        return all(lo == hi for lo, hi in self.intervals)


def default_ranges(n: int = 4) -> CoefficientRanges:
    """Mild-to-severe distortion defaults: a dominant leading coefficient
    plus small higher-order terms."""
    intervals = [(0.05, 1.0)] + [(-0.1, 0.1)] * (n - 1)
    return CoefficientRanges(tuple(intervals[:n]))


MAX_SAMPLE_TRIES = 100


def sample_coefficients(
    ranges: CoefficientRanges,
    rng: np.random.Generator | int,
    model: Model = Model.DIVISION,
    r_norm: float = 1.0,
) -> DistortionCoefficients:
    """Draw coefficients uniformly from ``ranges``, rejecting invalid models.

    A draw is accepted once the induced radial map is strictly increasing
    on normalized [0, 1] and the level at radius 1 falls inside the
    acceptance window. More than 100 rejections means the window and the
    ranges are incompatible and raises :class:`ConfigurationError`.
    """
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(rng)
    lows = np.array([lo for lo, _ in ranges.intervals])
    highs = np.array([hi for _, hi in ranges.intervals])
    for _ in range(MAX_SAMPLE_TRIES):
        k = tuple(rng.uniform(lows, highs))
        candidate = DistortionCoefficients(model, k, r_norm)
        if not validate_monotone(candidate, r_norm):
            if ranges.degenerate:
                raise ConfigurationError("fixed ranges define a non-monotone model")
            continue
        if ranges.degenerate:
            return candidate
        delta_edge = float(distortion_level_many(candidate, np.asarray([r_norm]))[0])
        if ranges.delta_lo <= delta_edge <= ranges.delta_hi:
            return candidate
    raise ConfigurationError(
        f"no acceptable coefficients after {MAX_SAMPLE_TRIES} draws; "
        f"ranges {ranges.intervals} conflict with monotonicity or the "
        f"delta window [{ranges.delta_lo}, {ranges.delta_hi}]"
    )


def image_center(width: int, height: int) -> PrincipalPoint:
    """Geometric center in pixel-index coordinates."""
    return PrincipalPoint((width - 1) / 2.0, (height - 1) / 2.0)


def distort_image(
    clean: np.ndarray,
    k: DistortionCoefficients,
    c: PrincipalPoint | None = None,
    background=(0, 0, 0),
) -> np.ndarray:
    """Render the distorted view of a clean scene.

    Inverse warping: every output pixel looks up the clean image at its
    corrected position, so no holes appear. Out-of-bounds lookups take the
    background color.
    """
    h, w = clean.shape[:2]
    if c is None:
        c = image_center(w, h)
    xs = np.arange(w, dtype=np.float64)
    ys = np.arange(h, dtype=np.float64)
    dx = xs[np.newaxis, :] - c.xc
    dy = ys[:, np.newaxis] - c.yc
    radii = np.hypot(dx, dy)
    delta = distortion_level_many(k, radii)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = 1.0 / delta if k.model is Model.DIVISION else delta
    src_x = c.xc + dx * scale
    src_y = c.yc + dy * scale
    values = sample_bilinear(clean.astype(np.float64), src_x, src_y, background)
    return to_uint8(values)


def split_elements(
    img: np.ndarray, c: PrincipalPoint | None = None
) -> tuple[list[np.ndarray], list[FlipTag]]:
    """Cut an image into its four quadrant elements and flip-normalize them.

    The cut runs along the image center lines (``c`` is carried for record
    keeping only and does not move the cut). After flipping, every element
    has the image center at its top-left corner, so all four share one
    radial orientation. Order: top-left, top-right, bottom-left,
    bottom-right with flips diagonal, vertical, horizontal, none.
    """
    h, w = img.shape[:2]
    if h % 2 or w % 2:
        raise ValueError(f"even image dimensions required, got {w}x{h}")
    hh, hw = h // 2, w // 2
    quads = {
        Quadrant.TOP_LEFT: img[:hh, :hw],
        Quadrant.TOP_RIGHT: img[:hh, hw:],
        Quadrant.BOTTOM_LEFT: img[hh:, :hw],
        Quadrant.BOTTOM_RIGHT: img[hh:, hw:],
    }
    elements = []
    flips = []
    for quadrant in Quadrant:
        tag = QUADRANT_FLIPS[quadrant]
        elements.append(apply_flip(quads[quadrant], tag))
        flips.append(tag)
    return elements, flips


def assemble_elements(elements: Sequence[np.ndarray], flips: Sequence[FlipTag]) -> np.ndarray:
    """Inverse of :func:`split_elements`: undo the flips and re-tile."""
    tl, tr, bl, br = (apply_flip(e, t) for e, t in zip(elements, flips))
    top = np.concatenate([tl, tr], axis=1)
    bottom = np.concatenate([bl, br], axis=1)
    return np.concatenate([top, bottom], axis=0)


@dataclass(frozen=True)
class BlockSet:
    """Radially ordered blocks cropped from one flip-normalized element."""

    blocks: tuple[np.ndarray, ...]
    centers_local: np.ndarray  # (n, 2) continuous element coordinates
    centers_image: np.ndarray  # (n, 2) continuous full-image coordinates
    origins: tuple[tuple[int, int], ...]  # top-left pixel (x0, y0) per block
    size: tuple[int, int]  # (width, height) of each block


def element_to_image_coords(
    xy: np.ndarray, quadrant: Quadrant, image_size: tuple[int, int]
) -> np.ndarray:
    """Map flip-normalized element coordinates back to the full image."""
    w, h = image_size
    x, y = np.asarray(xy, dtype=np.float64).T
    if quadrant is Quadrant.BOTTOM_RIGHT:
        fx, fy = w / 2 + x, h / 2 + y
    elif quadrant is Quadrant.TOP_LEFT:
        fx, fy = w / 2 - 1 - x, h / 2 - 1 - y
    elif quadrant is Quadrant.TOP_RIGHT:
        fx, fy = w / 2 + x, h / 2 - 1 - y
    else:
        fx, fy = w / 2 - 1 - x, h / 2 + y
    return np.stack([fx, fy], axis=-1)


def crop_blocks(
    element: np.ndarray,
    n: int,
    quadrant: Quadrant = Quadrant.BOTTOM_RIGHT,
    image_size: tuple[int, int] | None = None,
) -> BlockSet:
    """Cut ``n`` blocks along the element diagonal at increasing radii.

    Block centers sit at fractions (2i-1)/(2n) of the diagonal running from
    the principal-point corner to the far corner, so block radii increase
    strictly. Blocks are one eighth of the full image on each side; they
    must fit inside the element (n <= 4 for that size).
    """
    eh, ew = element.shape[:2]
    if image_size is None:
        image_size = (2 * ew, 2 * eh)
    bw, bh = image_size[0] // 8, image_size[1] // 8
    if image_size[0] % 8 or image_size[1] % 8:
        raise ValueError("image dimensions must be divisible by 8")
    if n < 1:
        raise ValueError("need at least one block")

    fractions = (2 * np.arange(1, n + 1) - 1) / (2 * n)
    centers_x = -0.5 + fractions * ew
    centers_y = -0.5 + fractions * eh
    origins = []
    blocks = []
    for cx, cy in zip(centers_x, centers_y):
        x0 = int(round(cx - bw / 2 + 0.5))
        y0 = int(round(cy - bh / 2 + 0.5))
        if x0 < 0 or y0 < 0 or x0 + bw > ew or y0 + bh > eh:
            raise ValueError(
                f"block at ({cx:.1f}, {cy:.1f}) with size {bw}x{bh} "
                f"overflows the {ew}x{eh} element (n={n} too large)"
            )
        origins.append((x0, y0))
        blocks.append(element[y0 : y0 + bh, x0 : x0 + bw].copy())

    centers_local = np.stack([centers_x, centers_y], axis=-1)
    centers_image = element_to_image_coords(centers_local, quadrant, image_size)
    return BlockSet(tuple(blocks), centers_local, centers_image, tuple(origins), (bw, bh))


@dataclass(frozen=True)
class RegionMask:
    """Box and blob channels locating one block inside its element."""

    width: int
    height: int
    box: np.ndarray
    blob: np.ndarray


def build_masks(element_size: tuple[int, int], blocks: BlockSet) -> list[RegionMask]:
    """Region-aware masks: a binary bounding box and a Gaussian blob.

    The blob uses sigma = block_side / 4 and is anchored at the pixel
    nearest the geometric block center, so its discrete peak is exactly 1.
    """
    ew, eh = element_size
    bw, bh = blocks.size
    sigma = min(bw, bh) / 4.0
    xs = np.arange(ew, dtype=np.float64)
    ys = np.arange(eh, dtype=np.float64)
    masks = []
    for (x0, y0), (cx, cy) in zip(blocks.origins, blocks.centers_local):
        box = np.zeros((eh, ew), dtype=np.float64)
        box[y0 : y0 + bh, x0 : x0 + bw] = 1.0
        ax = math.floor(cx + 0.5)
        ay = math.floor(cy + 0.5)
        blob = np.exp(
            -((xs[np.newaxis, :] - ax) ** 2 + (ys[:, np.newaxis] - ay) ** 2)
            / (2.0 * sigma**2)
        )
        masks.append(RegionMask(ew, eh, box, blob))
    return masks


# --------------------------------------------------------------------------
# Procedural scenes


SCENE_KINDS = ("checker", "lines", "smooth")


def make_scene(rng: np.random.Generator, width: int, height: int, kind: str) -> np.ndarray:
    if kind == "checker":
        return _checker_scene(rng, width, height)
    if kind == "lines":
        return _line_scene(rng, width, height)
    if kind == "smooth":
        return _smooth_scene(rng, width, height)
    raise ValueError(f"unknown scene kind {kind!r}")


def _random_color(rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, 256, size=3).astype(np.float64)


def _checker_scene(rng, width, height):
    tile = int(rng.integers(16, 49))
    ox, oy = rng.integers(0, tile, size=2)
    a, b = _random_color(rng), _random_color(rng)
    while np.max(np.abs(a - b)) < 64:  # keep the pattern visible
        b = _random_color(rng)
    xs = (np.arange(width) + ox) // tile
    ys = (np.arange(height) + oy) // tile
    parity = (xs[np.newaxis, :] + ys[:, np.newaxis]) % 2
    img = np.where(parity[..., np.newaxis] == 0, a, b)
    return img.astype(np.uint8)


def _line_scene(rng, width, height):
    img = np.tile(_random_color(rng), (height, width, 1))
    xs = np.arange(width, dtype=np.float64)[np.newaxis, :]
    ys = np.arange(height, dtype=np.float64)[:, np.newaxis]
    for _ in range(int(rng.integers(12, 25))):
        # line through a random point with random direction
        px, py = rng.uniform(0, width), rng.uniform(0, height)
        theta = rng.uniform(0, np.pi)
        nx, ny = -np.sin(theta), np.cos(theta)
        thickness = rng.uniform(1.0, 4.0)
        color = _random_color(rng)
        dist = np.abs((xs - px) * nx + (ys - py) * ny)
        mask = dist <= thickness / 2.0
        img[mask] = color
    return to_uint8(img)


def _smooth_scene(rng, width, height):
    """Band-limited content: ramps plus broad Gaussian bumps, no hard edges."""
    xs = np.linspace(0.0, 1.0, width)[np.newaxis, :]
    ys = np.linspace(0.0, 1.0, height)[:, np.newaxis]
    img = np.zeros((height, width, 3), dtype=np.float64)
    for ch in range(3):
        gx, gy, bias = rng.uniform(-1.0, 1.0, size=3)
        img[..., ch] = 110.0 + 60.0 * (gx * xs + gy * ys + bias)
    for _ in range(int(rng.integers(6, 13))):
        px, py = rng.uniform(0, 1), rng.uniform(0, 1)
        spread = rng.uniform(0.05, 0.25)
        amp = rng.uniform(-80.0, 80.0)
        color = rng.uniform(0.3, 1.0, size=3)
        bump = np.exp(-((xs - px) ** 2 + (ys - py) ** 2) / (2.0 * spread**2))
        img += amp * bump[..., np.newaxis] * color
    return to_uint8(img)


# --------------------------------------------------------------------------
# Dataset generation


@dataclass(frozen=True)
class SampleRecord:
    id: str
    source_path: str
    distorted_path: str
    principal_point: PrincipalPoint
    coefficients: DistortionCoefficients
    radii: tuple[float, ...]
    ordinal: tuple[float, ...]
    element_paths: tuple[str, str, str, str]
    flips: tuple[FlipTag, FlipTag, FlipTag, FlipTag]
    block_centers: tuple[tuple[tuple[float, float], ...], ...]  # per element
    split: str

    def to_json(self) -> str:
        payload = {
            "id": self.id,
            "source_path": self.source_path,
            "distorted_path": self.distorted_path,
            "principal_point": {"xc": self.principal_point.xc, "yc": self.principal_point.yc},
            "coefficients": {
                "model": self.coefficients.model.value,
                "k": list(self.coefficients.k),
                "r_norm": self.coefficients.r_norm,
            },
            "radii": list(self.radii),
            "ordinal": list(self.ordinal),
            "element_paths": list(self.element_paths),
            "flips": [f.value for f in self.flips],
            "block_centers": [[list(c) for c in elem] for elem in self.block_centers],
            "split": self.split,
        }
        return json.dumps(payload)

    @staticmethod
    def from_json(line: str) -> "SampleRecord":
        data = json.loads(line)
        return SampleRecord(
            id=data["id"],
            source_path=data["source_path"],
            distorted_path=data["distorted_path"],
            principal_point=PrincipalPoint(**data["principal_point"]),
            coefficients=DistortionCoefficients(
                Model(data["coefficients"]["model"]),
                tuple(data["coefficients"]["k"]),
                data["coefficients"]["r_norm"],
            ),
            radii=tuple(data["radii"]),
            ordinal=tuple(data["ordinal"]),
            element_paths=tuple(data["element_paths"]),
            flips=tuple(FlipTag(f) for f in data["flips"]),
            block_centers=tuple(
                tuple(tuple(c) for c in elem) for elem in data["block_centers"]
            ),
            split=data["split"],
        )


@dataclass(frozen=True)
class DatasetManifest:
    directory: Path
    records: tuple[SampleRecord, ...]

    @property
    def path(self) -> Path:
        return self.directory / "manifest.jsonl"

    def by_split(self, split: str) -> list[SampleRecord]:
        return [r for r in self.records if r.split == split]


def write_manifest(manifest: DatasetManifest) -> Path:
    manifest.directory.mkdir(parents=True, exist_ok=True)
    with open(manifest.path, "w", encoding="utf-8") as fh:
        for record in manifest.records:
            fh.write(record.to_json() + "\n")
    return manifest.path


def read_manifest(path) -> DatasetManifest:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        records = tuple(SampleRecord.from_json(line) for line in fh if line.strip())
    return DatasetManifest(path.parent, records)


@dataclass(frozen=True)
class GenerateConfig:
    out_dir: Path
    counts: dict = field(default_factory=lambda: {"train": 500, "val": 100, "test": 100})
    width: int = 256
    height: int = 256
    n: int = 4
    ranges: CoefficientRanges | None = None
    model: Model = Model.DIVISION
    seed: int = 0
    scene_kinds: tuple[str, ...] = SCENE_KINDS
    source_dir: Path | None = None
    jitter_fraction: float = 0.0  # of the image diagonal, uniform in +/- this
    background: tuple[int, int, int] = (0, 0, 0)


def _list_sources(source_dir: Path) -> list[Path]:
    files = sorted(
        p for p in Path(source_dir).iterdir() if p.suffix.lower() in {".png", ".jpg", ".jpeg"}
    )
    if not files:
        raise ConfigurationError(f"no usable images in {source_dir}")
    return files


def _generate_one(cfg: GenerateConfig, index: int, split: str, ordinal_in_split: int,
                  sources: list[Path] | None) -> tuple[SampleRecord, dict]:
    rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, index)))
    sample_id = f"{split}-{ordinal_in_split:06d}"

    if sources is not None:
        scene = load_png(sources[index % len(sources)])
        if scene.shape[:2] != (cfg.height, cfg.width):
            raise ConfigurationError(
                f"source {sources[index % len(sources)]} is {scene.shape[1]}x{scene.shape[0]}, "
                f"expected {cfg.width}x{cfg.height}"
            )
    else:
        kind = cfg.scene_kinds[index % len(cfg.scene_kinds)]
        scene = make_scene(rng, cfg.width, cfg.height, kind)

    ranges = cfg.ranges if cfg.ranges is not None else default_ranges(cfg.n)
    k_unit = sample_coefficients(ranges, rng, cfg.model, r_norm=1.0)
    r_norm = half_diagonal(cfg.width, cfg.height)
    k = DistortionCoefficients(cfg.model, k_unit.k, r_norm)

    center = image_center(cfg.width, cfg.height)
    if cfg.jitter_fraction > 0.0:
        j = cfg.jitter_fraction * 2.0 * r_norm
        center = PrincipalPoint(
            center.xc + rng.uniform(-j, j), center.yc + rng.uniform(-j, j)
        )

    distorted = distort_image(scene, k, center, cfg.background)
    elements, flips = split_elements(distorted)

    block_sets = [
        crop_blocks(elements[q], cfg.n, Quadrant(q), (cfg.width, cfg.height))
        for q in range(4)
    ]
    # Levels are recorded at the canonical element's block radii, measured
    # from the actual principal point.
    br = block_sets[Quadrant.BOTTOM_RIGHT]
    dist = np.hypot(
        br.centers_image[:, 0] - center.xc, br.centers_image[:, 1] - center.yc
    )
    radii = tuple(float(r) for r in dist / r_norm)
    ordinal = compute_ordinal(k, radii)

    rel_src = f"images/{sample_id}_src.png"
    rel_dist = f"images/{sample_id}_dist.png"
    rel_elements = tuple(f"elements/{sample_id}_e{q}.png" for q in range(4))
    files = {rel_src: scene, rel_dist: distorted}
    for rel, element in zip(rel_elements, elements):
        files[rel] = element

    record = SampleRecord(
        id=sample_id,
        source_path=rel_src,
        distorted_path=rel_dist,
        principal_point=center,
        coefficients=k,
        radii=radii,
        ordinal=ordinal.levels,
        element_paths=rel_elements,
        flips=tuple(flips),
        block_centers=tuple(
            tuple((float(x), float(y)) for x, y in bs.centers_image) for bs in block_sets
        ),
        split=split,
    )
    return record, files


def generate_dataset(cfg: GenerateConfig) -> DatasetManifest:
    """Generate a labeled dataset; byte-identical for a fixed seed.

    Samples are produced in a fixed global order (train, val, test) with
    per-sample RNG streams, so the manifest and all image files are
    reproducible for any worker count.
    """
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sources = _list_sources(cfg.source_dir) if cfg.source_dir is not None else None

    jobs = []
    index = 0
    for split in ("train", "val", "test"):
        for ordinal_in_split in range(int(cfg.counts.get(split, 0))):
            jobs.append((index, split, ordinal_in_split))
            index += 1

    def run(job):
        idx, split, pos = job
        record, files = _generate_one(cfg, idx, split, pos, sources)
        for rel, img in files.items():
            save_png(img, out_dir / rel)
        return idx, record

    records: list[SampleRecord | None] = [None] * len(jobs)
    workers = worker_count()
    if workers == 1:
        for job in jobs:
            idx, record = run(job)
            records[idx] = record
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for idx, record in pool.map(run, jobs):
                records[idx] = record

    manifest = DatasetManifest(out_dir, tuple(records))
    write_manifest(manifest)
    return manifest
