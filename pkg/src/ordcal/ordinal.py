"""Ordinal distortion profiles and their conversion to model coefficients.

An ordinal distortion is the vector of distortion levels sampled at a
strictly increasing sequence of normalized radii. It is interchangeable
with the coefficient vector through an n-by-n linear system whose columns
are even powers of the sample radii; radius normalization keeps that
system well-conditioned for the default grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .camera import (
    DistortionCoefficients,
    Model,
    PrincipalPoint,
    distortion_level_many,
    validate_monotone,
)
from .errors import ConversionError, EstimationError

DEFAULT_RADII = (0.25, 0.5, 0.75, 1.0)

MAX_CONDITION = 1e12
MAX_RELATIVE_RESIDUAL = 1e-10


@dataclass(frozen=True)
class OrdinalDistortion:
    """Distortion levels at strictly increasing normalized radii in [0, 1]."""

    radii: tuple[float, ...]
    levels: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "radii", tuple(float(r) for r in self.radii))
        object.__setattr__(self, "levels", tuple(float(v) for v in self.levels))
        if len(self.radii) != len(self.levels) or not self.radii:
            raise ValueError("radii and levels must be non-empty and equal length")
        if any(b <= a for a, b in zip(self.radii, self.radii[1:])):
            raise ValueError("radii must be strictly increasing")
        if self.radii[0] < 0.0 or self.radii[-1] > 1.0:
            raise ValueError("radii must lie within [0, 1]")
        if any(not math.isfinite(v) or v <= 0.0 for v in self.levels):
            raise ValueError("levels must be finite and positive")

    @property
    def n(self) -> int:
        return len(self.radii)


@dataclass(frozen=True)
class ConversionSystem:
    """The linear system tying coefficients to level offsets.

    ``matrix`` holds r_j^(2i) with one row per power 2..2n and one column
    per sample radius; ``rhs`` is levels - 1. The solve is done against the
    transposed matrix (one equation per radius) with partial pivoting.
    """

    matrix: np.ndarray
    rhs: np.ndarray
    condition: float


@dataclass(frozen=True)
class ConversionResult:
    coefficients: DistortionCoefficients
    condition: float
    relative_residual: float


def compute_ordinal(
    k: DistortionCoefficients, radii: Sequence[float] = DEFAULT_RADII
) -> OrdinalDistortion:
    """Sample the distortion level of ``k`` at normalized radii."""
    radii = tuple(float(r) for r in radii)
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly increasing")
    levels = distortion_level_many(k, np.asarray(radii) * k.r_norm)
    return OrdinalDistortion(radii, tuple(float(v) for v in levels))


def build_conversion_system(d: OrdinalDistortion) -> ConversionSystem:
    """Assemble the power matrix and right-hand side for ``d``."""
    r = np.asarray(d.radii, dtype=np.float64)
    if np.any(r <= 0.0):
        raise ConversionError(f"radii must be positive for conversion, got {d.radii}")
    powers = 2 * np.arange(1, d.n + 1)
    matrix = r[np.newaxis, :] ** powers[:, np.newaxis]
    rhs = np.asarray(d.levels, dtype=np.float64) - 1.0
    condition = float(np.linalg.cond(matrix))
    return ConversionSystem(matrix, rhs, condition)


def ordinal_to_coefficients(
    d: OrdinalDistortion,
    model: Model = Model.DIVISION,
    r_norm: float = 1.0,
) -> ConversionResult:
    """Recover coefficients whose levels match ``d`` at its radii.

    Solves the n-by-n system with partial pivoting (no explicit inverse)
    and verifies the solution: condition number above 1e12 or relative
    residual above 1e-10 raises :class:`ConversionError`.
    """
    system = build_conversion_system(d)
    if not np.isfinite(system.condition) or system.condition > MAX_CONDITION:
        raise ConversionError(
            f"conversion system too ill-conditioned (cond={system.condition:.3e}) "
            f"for radii {d.radii}"
        )
    k = np.linalg.solve(system.matrix.T, system.rhs)
    residual = system.matrix.T @ k - system.rhs
    scale = max(float(np.max(np.abs(system.rhs))), np.finfo(np.float64).tiny)
    rel_residual = float(np.max(np.abs(residual))) / scale
    if rel_residual > MAX_RELATIVE_RESIDUAL:
        raise ConversionError(
            f"conversion residual {rel_residual:.3e} exceeds {MAX_RELATIVE_RESIDUAL:.0e} "
            f"for radii {d.radii}"
        )
    coefficients = DistortionCoefficients(model, tuple(k), r_norm)
    return ConversionResult(coefficients, system.condition, rel_residual)


@dataclass(frozen=True)
class FullParamsResult:
    principal_point: PrincipalPoint
    coefficients: DistortionCoefficients
    flat: bool
    converged: bool
    iterations: int
    residual_norm: float


FLATNESS_TOL = 1e-9


def _center_residual(
    center: np.ndarray,
    points: np.ndarray,
    levels: np.ndarray,
    n: int,
    r_norm: float,
):
    """Least-squares level residual for a candidate center (and the k solve)."""
    radii = np.hypot(points[:, 0] - center[0], points[:, 1] - center[1]) / r_norm
    powers = 2 * np.arange(1, n + 1)
    design = radii[:, np.newaxis] ** powers[np.newaxis, :]
    rhs = levels - 1.0
    k, *_ = np.linalg.lstsq(design, rhs, rcond=None)
    return design @ k - rhs, k


def estimate_full_params(
    levels: Sequence[float],
    sample_points: Sequence[tuple[float, float]],
    image_size: tuple[int, int],
    n: int | None = None,
    model: Model = Model.DIVISION,
    max_iterations: int = 200,
) -> FullParamsResult:
    """Recover principal point and coefficients from n+2 distortion levels.

    The center enters the level equations only through the sample radii, so
    the solve nests: for each candidate center the coefficient subproblem is
    the linear system of :func:`ordinal_to_coefficients` in least-squares
    form, and a damped Gauss-Newton loop moves the center to shrink the
    level residuals. Starts from the image center (centers are expected to
    be near it) and stops once the center step drops below 1e-6 px.

    With n coefficients, n+2 levels at non-collinear points are required.
    All-flat levels leave the center unconstrained; the initial center is
    returned with ``flat=True``.
    """
    levels = np.asarray(levels, dtype=np.float64)
    points = np.asarray(sample_points, dtype=np.float64).reshape(-1, 2)
    if n is None:
        n = len(levels) - 2
    if len(levels) < n + 2:
        raise ValueError(f"need at least {n + 2} levels for n={n}, got {len(levels)}")
    if points.shape[0] != len(levels):
        raise ValueError("one sample point per level required")

    width, height = image_size
    r_norm = 0.5 * math.hypot(width, height)
    nominal = np.array([(width - 1) / 2.0, (height - 1) / 2.0])

    if np.max(np.abs(levels - 1.0)) < FLATNESS_TOL:
        return FullParamsResult(
            PrincipalPoint(*nominal),
            DistortionCoefficients(model, (0.0,) * n, r_norm),
            flat=True,
            converged=True,
            iterations=0,
            residual_norm=0.0,
        )

    # With exactly n+2 levels the system is square in (xc, yc, k), so it can
    # have spurious exact roots with wild coefficients. Starts close to the
    # image center are tried first and a solution only counts when its
    # coefficients keep the radial map monotone.
    starts = [nominal]
    for ring in (0.01, 0.03):
        for angle in range(8):
            theta = angle * math.pi / 4.0
            starts.append(
                nominal + ring * r_norm * np.array([math.cos(theta), math.sin(theta)])
            )

    best: tuple[np.ndarray, np.ndarray, float] | None = None
    total_iterations = 0
    for start in starts:
        center, residual, k, iterations, converged = _gauss_newton_center(
            start, points, levels, n, r_norm, max_iterations
        )
        total_iterations += iterations
        norm = float(np.linalg.norm(residual))
        if best is None or norm < best[2]:
            best = (center, k, norm)
        if not converged:
            continue
        candidate = DistortionCoefficients(model, tuple(k), r_norm)
        if validate_monotone(candidate, r_norm).ok:
            return FullParamsResult(
                PrincipalPoint(*center),
                candidate,
                flat=False,
                converged=True,
                iterations=total_iterations,
                residual_norm=norm,
            )

    assert best is not None
    best_result = FullParamsResult(
        PrincipalPoint(*best[0]),
        DistortionCoefficients(model, tuple(best[1]), r_norm),
        flat=False,
        converged=False,
        iterations=total_iterations,
        residual_norm=best[2],
    )
    raise EstimationError(
        "center estimation found no monotone-valid solution "
        f"(best residual {best[2]:.3e})",
        best_result=best_result,
    )


def _gauss_newton_center(
    start: np.ndarray,
    points: np.ndarray,
    levels: np.ndarray,
    n: int,
    r_norm: float,
    max_iterations: int,
):
    """Damped Gauss-Newton over the center with a step cap of 2% r_norm."""
    center = start.copy()
    damping = 0.0
    fd_step = 1e-5 * r_norm
    step_cap = 0.02 * r_norm
    residual, k = _center_residual(center, points, levels, n, r_norm)
    for iterations in range(1, max_iterations + 1):
        jac = np.empty((len(levels), 2))
        for axis in range(2):
            bumped = center.copy()
            bumped[axis] += fd_step
            res_hi, _ = _center_residual(bumped, points, levels, n, r_norm)
            bumped[axis] -= 2 * fd_step
            res_lo, _ = _center_residual(bumped, points, levels, n, r_norm)
            jac[:, axis] = (res_hi - res_lo) / (2 * fd_step)

        gram = jac.T @ jac
        grad = jac.T @ residual
        step = np.zeros(2)
        for _ in range(12):
            try:
                step = np.linalg.solve(gram + damping * np.eye(2), -grad)
            except np.linalg.LinAlgError:
                damping = max(damping * 10.0, 1e-8)
                continue
            length = float(np.linalg.norm(step))
            if length > step_cap:
                step = step * (step_cap / length)
            trial = center + step
            trial_res, trial_k = _center_residual(trial, points, levels, n, r_norm)
            if np.linalg.norm(trial_res) <= np.linalg.norm(residual):
                center, residual, k = trial, trial_res, trial_k
                damping /= 4.0
                break
            damping = max(damping * 10.0, 1e-8)
        else:
            step = np.zeros(2)

        if np.linalg.norm(step) < 1e-6:
            return center, residual, k, iterations, True
    return center, residual, k, max_iterations, False


@dataclass(frozen=True)
class DistortionDistributionMap:
    """Per-pixel distortion level over a W x H raster.

    ``values[j, i]`` is the level at the center of pixel (i, j); pixel
    centers sit at half-integer coordinates, so the principal point is
    expressed in a frame where the image spans [0, W] x [0, H] and its
    geometric center is (W/2, H/2).
    """

    width: int
    height: int
    values: np.ndarray
    principal_point: PrincipalPoint

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        if values.shape != (self.height, self.width):
            raise ValueError(
                f"values shape {values.shape} does not match {self.height}x{self.width}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("map values must be finite")


def ddm(
    k: DistortionCoefficients,
    c: PrincipalPoint,
    width: int,
    height: int,
) -> DistortionDistributionMap:
    """Render the distortion level at every pixel center."""
    xs = np.arange(width, dtype=np.float64) + 0.5
    ys = np.arange(height, dtype=np.float64) + 0.5
    radii = np.hypot(xs[np.newaxis, :] - c.xc, ys[:, np.newaxis] - c.yc)
    values = distortion_level_many(k, radii)
    return DistortionDistributionMap(width, height, values, c)


def check_symmetry(m: DistortionDistributionMap) -> float:
    """Largest level mismatch under the three mirror reflections.

    Mirrored coordinates are resolved to the pixel grid, i.e. column i is
    compared with column W-1-i (and likewise for rows); with the principal
    point at the image center the reflections land exactly on pixel
    centers so a rendered map scores 0.
    """
    v = m.values
    gaps = (
        np.abs(v - v[:, ::-1]),
        np.abs(v - v[::-1, :]),
        np.abs(v - v[::-1, ::-1]),
    )
    return float(max(np.max(g) for g in gaps))


def ddm_to_csv(m: DistortionDistributionMap, path) -> None:
    """Write the map row-major, one image row per CSV line."""
    np.savetxt(path, m.values, delimiter=",", fmt="%.17g")


def ddm_from_csv(path, principal_point: PrincipalPoint | None = None) -> DistortionDistributionMap:
    values = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    height, width = values.shape
    if principal_point is None:
        principal_point = PrincipalPoint(width / 2.0, height / 2.0)
    return DistortionDistributionMap(width, height, values, principal_point)


def ddm_to_png16(m: DistortionDistributionMap, path) -> float:
    """Write a 16-bit grayscale PNG, levels affinely mapped to [0, 65535].

    The map is g = round((delta - 1) / (delta_max - 1) * 65535) clipped to
    the code range; a flat all-ones map writes all zeros. Returns the
    delta_max used so callers can record the scaling.
    """
    from PIL import Image

    delta_max = float(np.max(m.values))
    if delta_max <= 1.0:
        codes = np.zeros_like(m.values)
    else:
        codes = (m.values - 1.0) / (delta_max - 1.0) * 65535.0
    codes = np.clip(np.rint(codes), 0, 65535).astype(np.uint16)
    Image.fromarray(codes).save(path)
    return delta_max
