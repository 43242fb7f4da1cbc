"""Evaluation metrics: PSNR, SSIM, parameter RMSE, MDLD, learning-friendly rate.

The parameter "RMSE" follows the printed definition used throughout this
problem domain, (1/N) * sum(sqrt((a_i - b_i)^2)), which reduces to the mean
absolute difference; the conventional root-mean-square variant sits behind
an explicit flag. MDLD compares distortion levels pixel by pixel and is a
true metric on distortion distribution maps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .camera import DistortionCoefficients, PrincipalPoint
from .ordinal import DistortionDistributionMap, ddm

PSNR_MAX = 255.0


@dataclass(frozen=True)
class MetricReport:
    psnr: float | None = None
    ssim: float | None = None
    rmse_params: float | None = None
    mdld: float | None = None


@dataclass(frozen=True)
class LfrGroup:
    """One training group: its error, data budget, and convergence epoch."""

    error: float
    data_count: float
    convergence_epoch: float


def _require_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB over all channels; inf when equal."""
    a = np.asarray(a)
    b = np.asarray(b)
    _require_same_shape(a, b)
    mse = float(np.mean(np.square(a.astype(np.float64) - b.astype(np.float64))))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(PSNR_MAX**2 / mse)


def _luma(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        return img
    if img.shape[2] == 1:
        return img[..., 0]
    return 0.299 * img[..., 0] + 0.587 * img[..., 1] + 0.114 * img[..., 2]


def _gaussian_kernel(size: int, sigma: float) -> np.ndarray:
    offsets = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    kernel = np.exp(-0.5 * (offsets / sigma) ** 2)
    return kernel / kernel.sum()


def _filter_valid(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Separable 2-D convolution keeping only fully covered windows."""
    pad = len(kernel) // 2
    rows = np.apply_along_axis(np.convolve, 1, img, kernel, mode="valid")
    cols = np.apply_along_axis(np.convolve, 0, rows, kernel, mode="valid")
    assert cols.shape == (img.shape[0] - 2 * pad, img.shape[1] - 2 * pad)
    return cols


SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Mean local SSIM on luma with an 11x11 Gaussian window (sigma 1.5)."""
    a = np.asarray(a)
    b = np.asarray(b)
    _require_same_shape(a, b)
    if a.shape[0] < SSIM_WINDOW or a.shape[1] < SSIM_WINDOW:
        raise ValueError(f"images must be at least {SSIM_WINDOW}x{SSIM_WINDOW}")
    x = _luma(a)
    y = _luma(b)
    kernel = _gaussian_kernel(SSIM_WINDOW, SSIM_SIGMA)

    mu_x = _filter_valid(x, kernel)
    mu_y = _filter_valid(y, kernel)
    xx = _filter_valid(x * x, kernel) - mu_x * mu_x
    yy = _filter_valid(y * y, kernel) - mu_y * mu_y
    xy = _filter_valid(x * y, kernel) - mu_x * mu_y

    c1 = (SSIM_K1 * PSNR_MAX) ** 2
    c2 = (SSIM_K2 * PSNR_MAX) ** 2
    numerator = (2.0 * mu_x * mu_y + c1) * (2.0 * xy + c2)
    denominator = (mu_x**2 + mu_y**2 + c1) * (xx + yy + c2)
    return float(np.mean(numerator / denominator))


def rmse_params(
    k_est: Sequence[float], k_true: Sequence[float], conventional: bool = False
) -> float:
    """Parameter error, (1/N) * sum |k_est - k_true| as printed.

    ``conventional=True`` computes sqrt(mean squared difference) instead.
    """
    est = np.asarray(k_est, dtype=np.float64)
    true = np.asarray(k_true, dtype=np.float64)
    if est.shape != true.shape:
        raise ValueError(f"length mismatch: {est.shape} vs {true.shape}")
    diff = est - true
    if conventional:
        return float(np.sqrt(np.mean(np.square(diff))))
    return float(np.mean(np.sqrt(np.square(diff))))


def mdld(
    est: DistortionDistributionMap | DistortionCoefficients,
    truth: DistortionDistributionMap | DistortionCoefficients,
    size: tuple[int, int] | None = None,
    center: PrincipalPoint | None = None,
) -> float:
    """Mean absolute distortion-level deviation over all pixels.

    Coefficient inputs are rendered to maps first; both inputs must then
    share the render size (``size``/``center`` apply to coefficient inputs,
    defaulting to the other argument's geometry).
    """
    est_map = _as_map(est, truth, size, center)
    truth_map = _as_map(truth, est, size, center)
    _require_same_shape(est_map.values, truth_map.values)
    return float(np.mean(np.abs(est_map.values - truth_map.values)))


def _as_map(
    value,
    other,
    size: tuple[int, int] | None,
    center: PrincipalPoint | None,
) -> DistortionDistributionMap:
    if isinstance(value, DistortionDistributionMap):
        return value
    if isinstance(other, DistortionDistributionMap):
        width, height = other.width, other.height
        c = center if center is not None else other.principal_point
    else:
        if size is None:
            raise ValueError("size required when both inputs are coefficients")
        width, height = size
        c = center if center is not None else PrincipalPoint(width / 2.0, height / 2.0)
    return ddm(value, c, width, height)


def learning_friendly_rate(
    groups: Sequence[LfrGroup],
    total_data: float,
    total_epochs: float,
    log_base_10: bool = False,
) -> float:
    """Score a learning representation from per-group error, data, and epochs.

    Computes (1/N) * sum (D_i/D) * (1/E_i) * log(2 - C_i/C). The log is
    natural by default with a base-10 switch, since the defining expression
    leaves the base open.
    """
    if not groups:
        raise ValueError("at least one group required")
    if total_data <= 0 or total_epochs <= 0:
        raise ValueError("totals must be positive")
    log = math.log10 if log_base_10 else math.log
    acc = 0.0
    for g in groups:
        if g.error <= 0:
            raise ValueError(f"group error must be positive, got {g.error}")
        if not 0 < g.convergence_epoch <= total_epochs:
            raise ValueError(
                f"convergence epoch {g.convergence_epoch} outside (0, {total_epochs}]"
            )
        if not 0 < g.data_count <= total_data:
            raise ValueError(f"data count {g.data_count} outside (0, {total_data}]")
        acc += (g.data_count / total_data) * (1.0 / g.error) * log(
            2.0 - g.convergence_epoch / total_epochs
        )
    return acc / len(groups)
