"""Radial camera-distortion toolkit.

Core pieces: point-level division/polynomial camera models, ordinal
distortion profiles and their coefficient conversion, synthetic dataset
generation with full ground truth, LUT-based rectification, and the
evaluation metrics (PSNR, SSIM, parameter RMSE, MDLD, learning-friendly
rate).
"""

from .camera import (
    DistortionCoefficients,
    Frame,
    Model,
    MonotoneReport,
    Point,
    PrincipalPoint,
    distortion_level,
    forward_radius,
    half_diagonal,
    radius,
    solve_distorted_radius,
    undistort_point,
    validate_monotone,
)
from .errors import (
    ConfigurationError,
    ConversionError,
    DomainError,
    EstimationError,
    OrdcalError,
    OutOfRangeError,
    SingularModelError,
)
from .metrics import LfrGroup, MetricReport, learning_friendly_rate, mdld, psnr, rmse_params, ssim
from .ordinal import (
    DEFAULT_RADII,
    ConversionResult,
    ConversionSystem,
    DistortionDistributionMap,
    OrdinalDistortion,
    check_symmetry,
    compute_ordinal,
    ddm,
    estimate_full_params,
    ordinal_to_coefficients,
)
from .rectify import InverseRadialMap, ScalePolicy, build_inverse_map, rectify_from_ordinal, rectify_image
from .synth import (
    CoefficientRanges,
    DatasetManifest,
    FlipTag,
    GenerateConfig,
    Quadrant,
    RegionMask,
    SampleRecord,
    build_masks,
    crop_blocks,
    default_ranges,
    distort_image,
    generate_dataset,
    image_center,
    read_manifest,
    sample_coefficients,
    split_elements,
)

__version__ = "0.1.0"
