"""Toy-scale learning component for ordinal distortion estimation."""

from .compare import ComparisonResult, compare_representations
from .config import Ablations, NetworkConfig, TrainConfig
from .convert import ConversionFailure, level_map, levels_to_coefficients, mdld_between
from .data import block_geometry, load_samples, read_manifest, region_masks
from .evaluate import EvaluationReport, evaluate
from .loss import LOSS_FLOOR, ordinal_loss
from .model import OrdinalEstimator, build_model
from .train import TrainResult, load_checkpoint, train

__version__ = "0.1.0"
