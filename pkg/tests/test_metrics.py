import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ordcal.camera import DistortionCoefficients, Model, PrincipalPoint
from ordcal.metrics import LfrGroup, learning_friendly_rate, mdld, psnr, rmse_params, ssim
from ordcal.ordinal import DistortionDistributionMap, ddm


class TestPsnr:
    def test_identical_is_infinite(self):
        img = np.full((8, 8, 3), 17, dtype=np.uint8)
        assert psnr(img, img) == math.inf

    def test_opposite_extremes_zero_db(self):
        a = np.zeros((4, 4, 3), dtype=np.uint8)
        b = np.full((4, 4, 3), 255, dtype=np.uint8)
        assert psnr(a, b) == pytest.approx(0.0, abs=1e-12)

    def test_single_pixel_difference(self):
        a = np.zeros((2, 2, 1), dtype=np.uint8)
        b = a.copy()
        b[0, 0, 0] = 16
        assert psnr(a, b) == pytest.approx(10 * math.log10(255**2 / 64), abs=1e-9)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            psnr(np.zeros((4, 4, 3)), np.zeros((4, 5, 3)))

    def test_monotone_in_noise_amplitude(self, rng):
        base = rng.integers(64, 192, size=(32, 32, 3)).astype(np.float64)
        noise = rng.standard_normal(base.shape)
        previous = math.inf
        for amplitude in (1.0, 2.0, 5.0, 10.0, 25.0):
            value = psnr(base, base + amplitude * noise)
            assert value < previous
            previous = value


class TestSsim:
    def test_identical_is_one(self, rng):
        img = rng.integers(0, 256, size=(32, 32, 3), dtype=np.uint8)
        assert ssim(img, img) == pytest.approx(1.0, abs=1e-12)

    def test_symmetric_on_degenerate_pair(self):
        a = np.full((16, 16, 3), 128, dtype=np.uint8)
        b = (255 - a).astype(np.uint8)
        assert ssim(a, b) == pytest.approx(ssim(b, a), abs=1e-15)

    def test_too_small_rejected(self):
        with pytest.raises(ValueError):
            ssim(np.zeros((8, 8, 3)), np.zeros((8, 8, 3)))

    def test_matches_reference_implementation(self, rng):
        """Cross-check against skimage's Gaussian-window SSIM on luma."""
        from skimage.metrics import structural_similarity

        base = rng.integers(0, 256, size=(48, 48, 3), dtype=np.uint8)
        shifted = np.clip(base.astype(np.int16) + 10, 0, 255).astype(np.uint8)
        mine = ssim(base, shifted)
        luma = lambda im: (
            0.299 * im[..., 0] + 0.587 * im[..., 1] + 0.114 * im[..., 2]
        ).astype(np.float64)
        reference = structural_similarity(
            luma(base),
            luma(shifted),
            gaussian_weights=True,
            sigma=1.5,
            use_sample_covariance=False,
            data_range=255,
        )
        assert mine == pytest.approx(reference, abs=1e-4)

    def test_matches_reference_on_noise(self, rng):
        from skimage.metrics import structural_similarity

        a = rng.integers(0, 256, size=(40, 56), dtype=np.uint8).astype(np.float64)
        b = np.clip(a + rng.normal(0, 12, a.shape), 0, 255)
        reference = structural_similarity(
            a, b, gaussian_weights=True, sigma=1.5,
            use_sample_covariance=False, data_range=255,
        )
        assert ssim(a, b) == pytest.approx(reference, abs=1e-4)


class TestRmseParams:
    def test_identical_zero(self):
        assert rmse_params((0.3, 0.1), (0.3, 0.1)) == 0.0

    def test_printed_form_is_mean_absolute(self):
        assert rmse_params((1.0, 1.0), (0.0, 3.0)) == pytest.approx(1.5, abs=1e-15)

    def test_single_parameter(self):
        assert rmse_params((0.25,), (0.5,)) == pytest.approx(0.25, abs=1e-15)

    def test_conventional_variant(self):
        assert rmse_params((1.0, 1.0), (0.0, 3.0), conventional=True) == pytest.approx(
            math.sqrt((1 + 4) / 2), abs=1e-12
        )

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            rmse_params((1.0,), (1.0, 2.0))

    @given(st.floats(-10, 10), st.lists(st.floats(-5, 5), min_size=1, max_size=6))
    def test_scale_equivariance(self, scale, values):
        est = np.asarray(values)
        true = est[::-1].copy()
        scaled = rmse_params(scale * est, scale * true)
        assert scaled == pytest.approx(abs(scale) * rmse_params(est, true), rel=1e-9, abs=1e-12)


def _map_from(values):
    values = np.asarray(values, dtype=np.float64)
    h, w = values.shape
    return DistortionDistributionMap(w, h, values, PrincipalPoint(w / 2, h / 2))


class TestMdld:
    def test_identical_zero(self):
        m = _map_from([[1.0, 1.1], [1.2, 1.3]])
        assert mdld(m, m) == 0.0

    def test_constant_offset(self):
        a = _map_from([[1.0, 1.1], [1.2, 1.3]])
        b = _map_from(np.asarray(a.values) + 0.05)
        assert mdld(a, b) == pytest.approx(0.05, abs=1e-15)

    def test_hand_case(self):
        a = _map_from([[1.0, 1.1], [1.2, 1.3]])
        b = _map_from([[1.0, 1.0], [1.0, 1.0]])
        assert mdld(a, b) == pytest.approx(0.15, abs=1e-15)

    def test_coefficient_form_equals_map_form(self):
        k1 = DistortionCoefficients(Model.DIVISION, (0.3, 0.05), 20.0)
        k2 = DistortionCoefficients(Model.DIVISION, (0.25, 0.0), 20.0)
        c = PrincipalPoint(16.0, 16.0)
        from_coeffs = mdld(k1, k2, size=(32, 32), center=c)
        from_maps = mdld(ddm(k1, c, 32, 32), ddm(k2, c, 32, 32))
        assert from_coeffs == from_maps

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            mdld(_map_from(np.ones((2, 2))), _map_from(np.ones((3, 3))))

    @given(
        arrays(np.float64, (3, 3), elements=st.floats(0.5, 3.0)),
        arrays(np.float64, (3, 3), elements=st.floats(0.5, 3.0)),
        arrays(np.float64, (3, 3), elements=st.floats(0.5, 3.0)),
    )
    @settings(max_examples=200, deadline=None)
    def test_metric_axioms(self, a, b, c):
        ma, mb, mc = _map_from(a), _map_from(b), _map_from(c)
        assert mdld(ma, mb) >= 0.0
        assert (mdld(ma, mb) == 0.0) == bool(np.array_equal(a, b))
        assert mdld(ma, mb) == mdld(mb, ma)
        assert mdld(ma, mc) <= mdld(ma, mb) + mdld(mb, mc) + 1e-12


class TestLearningFriendlyRate:
    def test_convergence_at_cap_scores_zero(self):
        groups = [LfrGroup(error=0.5, data_count=100, convergence_epoch=50)]
        assert learning_friendly_rate(groups, 100, 50) == pytest.approx(0.0, abs=1e-15)

    def test_hand_value(self):
        groups = [LfrGroup(error=0.07, data_count=200, convergence_epoch=30)]
        value = learning_friendly_rate(groups, 200, 60)
        assert value == pytest.approx(math.log(1.5) / 0.07, abs=1e-9)

    def test_log10_switch(self):
        groups = [LfrGroup(error=0.07, data_count=200, convergence_epoch=30)]
        value = learning_friendly_rate(groups, 200, 60, log_base_10=True)
        assert value == pytest.approx(math.log10(1.5) / 0.07, abs=1e-9)

    def test_improves_with_lower_error_and_faster_convergence(self):
        base = [LfrGroup(0.1, 50, 20), LfrGroup(0.2, 100, 40)]
        score = learning_friendly_rate(base, 100, 50)
        better_error = [LfrGroup(0.05, 50, 20), LfrGroup(0.2, 100, 40)]
        faster = [LfrGroup(0.1, 50, 10), LfrGroup(0.2, 100, 40)]
        assert learning_friendly_rate(better_error, 100, 50) > score
        assert learning_friendly_rate(faster, 100, 50) > score

    def test_invalid_groups_rejected(self):
        with pytest.raises(ValueError):
            learning_friendly_rate([LfrGroup(0.0, 10, 5)], 10, 10)
        with pytest.raises(ValueError):
            learning_friendly_rate([LfrGroup(0.1, 10, 15)], 10, 10)
        with pytest.raises(ValueError):
            learning_friendly_rate([], 10, 10)
