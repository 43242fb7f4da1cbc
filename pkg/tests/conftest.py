import numpy as np
import pytest

from ordcal.camera import DistortionCoefficients, Model
from ordcal.synth import default_ranges, sample_coefficients


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_valid_coefficients(rng, n=4, model=Model.DIVISION, r_norm=1.0):
    """One monotone-valid draw from the dataset default ranges."""
    k = sample_coefficients(default_ranges(n), rng, model)
    return DistortionCoefficients(model, k.k, r_norm)
