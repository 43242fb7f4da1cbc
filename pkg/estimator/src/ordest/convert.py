"""Level-to-coefficient conversion and MDLD, local to this package.

Small re-implementations of the two pieces of primary-toolkit math the
evaluator needs per sample (an n-by-n linear solve and a mean absolute
level-map deviation), kept here so the estimator stays decoupled from the
primary package; the test suite pins both against the primary CLI's output.
"""

from __future__ import annotations

import numpy as np

MAX_CONDITION = 1e12


class ConversionFailure(Exception):
    pass


LEVEL_FLOOR = 1.0
LEVEL_CEIL = 4.0


def project_levels(levels) -> np.ndarray:
    """Project raw level predictions onto the physically valid set.

    Levels are at least 1 (no negative distortion under the dataset
    conventions) and non-decreasing with radius; the running maximum plus a
    clip enforces both without moving already-valid predictions. Applied
    before conversion so one wild component cannot blow up the solve.
    """
    levels = np.clip(np.asarray(levels, dtype=np.float64), LEVEL_FLOOR, LEVEL_CEIL)
    return np.maximum.accumulate(levels)


def levels_to_coefficients(levels, radii) -> np.ndarray:
    """Solve sum_i k_i r^(2i) = level - 1 at the n sample radii."""
    levels = np.asarray(levels, dtype=np.float64)
    radii = np.asarray(radii, dtype=np.float64)
    if levels.shape != radii.shape:
        raise ConversionFailure("levels and radii lengths differ")
    n = len(radii)
    powers = 2 * np.arange(1, n + 1)
    design = radii[:, np.newaxis] ** powers[np.newaxis, :]
    if not np.all(np.isfinite(design)) or np.linalg.cond(design) > MAX_CONDITION:
        raise ConversionFailure(f"ill-conditioned system for radii {radii}")
    try:
        return np.linalg.solve(design, levels - 1.0)
    except np.linalg.LinAlgError as exc:
        raise ConversionFailure(str(exc)) from exc


def level_map(k, size: tuple[int, int], center: tuple[float, float], r_norm: float) -> np.ndarray:
    """Per-pixel distortion level; pixel centers at half-integer coordinates."""
    width, height = size
    xs = np.arange(width, dtype=np.float64) + 0.5
    ys = np.arange(height, dtype=np.float64) + 0.5
    rho = np.hypot(xs[np.newaxis, :] - center[0], ys[:, np.newaxis] - center[1]) / r_norm
    values = np.ones_like(rho)
    rho2 = rho * rho
    power = np.ones_like(rho)
    for coeff in np.asarray(k, dtype=np.float64):
        power = power * rho2
        values = values + coeff * power
    return values


def mdld_between(k_est, k_true, size, center, r_norm) -> float:
    est = level_map(k_est, size, center, r_norm)
    true = level_map(k_true, size, center, r_norm)
    return float(np.mean(np.abs(est - true)))
