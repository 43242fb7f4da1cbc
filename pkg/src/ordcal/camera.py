"""Point-level radial camera models (division and polynomial).

Both models scale a point's offset from the principal point by a radial
profile delta(r) = 1 + k1*(r/r_norm)^2 + k2*(r/r_norm)^4 + ... The division
model divides by the profile to undistort, the polynomial model multiplies.
Radii are normalized by ``r_norm`` (conventionally half the image diagonal)
before evaluating the profile, so coefficients stay in a scale-free range.

Coordinates here are plain pixel units: a raster pixel (i, j) is the point
(i, j). All functions are pure and thread-safe.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, OutOfRangeError, SingularModelError


class Model(enum.Enum):
    DIVISION = "division"
    POLYNOMIAL = "polynomial"


class Frame(enum.Enum):
    DISTORTED = "distorted"
    CORRECTED = "corrected"


@dataclass(frozen=True)
class PrincipalPoint:
    """Center of radial distortion, in pixels."""

    xc: float
    yc: float

    def __post_init__(self):
        if not (math.isfinite(self.xc) and math.isfinite(self.yc)):
            raise ValueError("principal point must be finite")


@dataclass(frozen=True)
class Point:
    x: float
    y: float
    frame: Frame = Frame.DISTORTED

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("point must be finite")


@dataclass(frozen=True)
class DistortionCoefficients:
    """Radial model coefficients k_1..k_n in normalized-radius units.

    ``r_norm`` is the pixel radius that maps to normalized radius 1; raw
    radii are divided by it before the profile polynomial is evaluated.
    Monotonicity of the induced radial map is validated on demand (see
    :func:`validate_monotone`), not assumed at construction.
    """

    model: Model
    k: tuple[float, ...]
    r_norm: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "k", tuple(float(v) for v in self.k))
        if len(self.k) < 1:
            raise ValueError("need at least one coefficient")
        if not all(math.isfinite(v) for v in self.k):
            raise ValueError("coefficients must be finite")
        if not (math.isfinite(self.r_norm) and self.r_norm > 0):
            raise ValueError("r_norm must be positive and finite")

    @property
    def n(self) -> int:
        return len(self.k)


@dataclass(frozen=True)
class MonotoneReport:
    """Outcome of a monotonicity audit of the radial map."""

    ok: bool
    violation_radius: float | None = None

    def __bool__(self) -> bool:
        return self.ok


def radius(p: Point | tuple[float, float], c: PrincipalPoint) -> float:
    """Euclidean distance from ``p`` to the principal point, in pixels."""
    x, y = (p.x, p.y) if isinstance(p, Point) else p
    return math.hypot(x - c.xc, y - c.yc)


def _profile(k: DistortionCoefficients, rho):
    """delta as a function of normalized radius rho (scalar or ndarray)."""
    rho2 = np.square(rho)
    acc = np.zeros_like(rho2)
    with np.errstate(over="ignore", invalid="ignore"):
        for coeff in reversed(k.k):
            acc = (acc + coeff) * rho2
        return 1.0 + acc


def _profile_derivative(k: DistortionCoefficients, rho):
    """d(delta)/d(rho) in normalized units."""
    rho2 = np.square(rho)
    acc = np.zeros_like(rho2)
    for i in range(len(k.k), 0, -1):
        acc = acc * rho2 + 2 * i * k.k[i - 1]
    return acc * rho


def distortion_level(k: DistortionCoefficients, r: float) -> float:
    """Radial distortion level delta(r) for a pixel radius ``r`` >= 0.

    delta is the ratio of distorted to corrected offset at that radius; 1
    means no distortion.
    """
    if r < 0:
        raise ValueError("radius must be non-negative")
    value = float(_profile(k, np.float64(r) / k.r_norm))
    if not math.isfinite(value):
        raise DomainError(f"distortion level overflowed at r={r!r}")
    return value


def distortion_level_many(k: DistortionCoefficients, r: np.ndarray) -> np.ndarray:
    """Vectorized :func:`distortion_level` over an array of pixel radii."""
    values = _profile(k, np.asarray(r, dtype=np.float64) / k.r_norm)
    if not np.all(np.isfinite(values)):
        raise DomainError("distortion level overflowed")
    return values


def _forward_scale(k: DistortionCoefficients, delta):
    """Factor applied to a distorted offset to reach the corrected offset."""
    if k.model is Model.DIVISION:
        return 1.0 / delta
    return delta


def forward_radius(k: DistortionCoefficients, r) -> np.ndarray | float:
    """Corrected radius produced by a distorted radius ``r`` (pixel units).

    Division model: r / delta(r). Polynomial model: r * delta(r).
    """
    r = np.asarray(r, dtype=np.float64)
    delta = _profile(k, r / k.r_norm)
    out = r * _forward_scale(k, delta)
    return float(out) if out.ndim == 0 else out


def undistort_point(p: Point, k: DistortionCoefficients, c: PrincipalPoint) -> Point:
    """Map a point of the distorted image to its corrected position.

    The offset from the principal point is scaled by 1/delta (division
    model) or delta (polynomial model) and shifted back; the level is
    evaluated at the point's distorted radius.
    """
    r = radius(p, c)
    delta = distortion_level(k, r)
    if delta <= 0:
        raise SingularModelError(f"distortion level {delta} <= 0 at r={r}")
    s = _forward_scale(k, delta)
    return Point(c.xc + (p.x - c.xc) * s, c.yc + (p.y - c.yc) * s, Frame.CORRECTED)


def validate_monotone(k: DistortionCoefficients, r_max: float, samples: int = 4096) -> MonotoneReport:
    """Audit that the radial map r -> forward_radius(r) increases on [0, r_max].

    Uses a dense grid (>= 4096 samples) of the map itself plus a sign check
    of its analytic derivative, and also requires delta > 0 throughout.
    Returns the first violating radius instead of raising.
    """
    samples = max(int(samples), 4096)
    r = np.linspace(0.0, float(r_max), samples + 1)
    rho = r / k.r_norm
    delta = _profile(k, rho)
    ddelta = _profile_derivative(k, rho) / k.r_norm  # d(delta)/dr, pixel units

    bad = ~np.isfinite(delta) | (delta <= 0.0)
    # d/dr of r/delta is (delta - r*delta')/delta^2; of r*delta is delta + r*delta'.
    if k.model is Model.DIVISION:
        slope = delta - r * ddelta
    else:
        slope = delta + r * ddelta
    bad |= slope <= 0.0

    if np.any(bad):
        return MonotoneReport(False, float(r[int(np.argmax(bad))]))

    fwd = r * _forward_scale(k, delta)
    steps = np.diff(fwd)
    if np.any(steps <= 0.0):
        return MonotoneReport(False, float(r[int(np.argmax(steps <= 0.0)) + 1]))
    return MonotoneReport(True)


def solve_distorted_radius(
    k: DistortionCoefficients,
    r_corrected: float,
    r_max_search: float | None = None,
) -> float:
    """Invert the radial map: find r with forward_radius(r) == r_corrected.

    The map is assumed monotone on [0, r_max_search] (default: r_norm, i.e.
    normalized radius 1), which makes the root unique and bracketable.
    Bisection narrows the bracket and safeguarded Newton steps polish the
    root to 1e-10 in normalized radius. Raises :class:`OutOfRangeError` when
    ``r_corrected`` exceeds the map's reach; callers paint such pixels as
    background.
    """
    out = solve_distorted_radius_many(k, np.asarray([r_corrected]), r_max_search)
    return float(out[0])


def solve_distorted_radius_many(
    k: DistortionCoefficients,
    r_corrected: np.ndarray,
    r_max_search: float | None = None,
) -> np.ndarray:
    """Vectorized radial-map inversion (see :func:`solve_distorted_radius`)."""
    r_c = np.asarray(r_corrected, dtype=np.float64)
    if np.any(r_c < 0):
        raise ValueError("corrected radius must be non-negative")
    r_hi = float(r_max_search) if r_max_search is not None else k.r_norm
    reach = float(forward_radius(k, r_hi))
    if np.any(r_c > reach):
        worst = float(np.max(r_c))
        raise OutOfRangeError(
            f"corrected radius {worst:.6g} beyond invertible reach {reach:.6g} "
            f"(search limit {r_hi:.6g})"
        )

    lo = np.zeros_like(r_c)
    hi = np.full_like(r_c, r_hi)
    tol = 1e-10 * k.r_norm

    # Bisection gets within ~1e-5 of the root, inside the monotone bracket.
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        too_low = np.asarray(forward_radius(k, mid)) < r_c
        lo = np.where(too_low, mid, lo)
        hi = np.where(too_low, hi, mid)

    r = 0.5 * (lo + hi)
    for _ in range(8):
        rho = r / k.r_norm
        delta = _profile(k, rho)
        ddelta = _profile_derivative(k, rho) / k.r_norm
        if k.model is Model.DIVISION:
            f = r / delta - r_c
            df = (delta - r * ddelta) / np.square(delta)
        else:
            f = r * delta - r_c
            df = delta + r * ddelta
        step = np.where(df > 0, f / np.where(df > 0, df, 1.0), 0.0)
        r_new = r - step
        # Reject Newton steps that leave the bracket; bisection state is
        # still valid there.
        inside = (r_new >= lo) & (r_new <= hi)
        r_new = np.where(inside, r_new, 0.5 * (lo + hi))
        too_low = np.asarray(forward_radius(k, r_new)) < r_c
        lo = np.where(too_low, r_new, lo)
        hi = np.where(too_low, hi, r_new)
        if np.all(np.abs(r_new - r) <= tol):
            r = r_new
            break
        r = r_new
    return np.where(r_c == 0.0, 0.0, r)


DEFAULT_COEFF_COUNT = 4


def half_diagonal(width: int, height: int) -> float:
    """Default radius normalizer: half the image diagonal, in pixels."""
    return 0.5 * math.hypot(width, height)
