import json
import math

import numpy as np
import pytest
from scipy import ndimage
from skimage.metrics import structural_similarity as skimage_ssim

from uwrestore import LinearImage, MetricReport, evaluate_pair, mse, psnr, ssim, uiqm
from uwrestore.errors import ChannelError, ShapeError, SizeError
from uwrestore.metrics import ImageMetrics, to_grayscale, uicm, uiconm, uism


def image(arr):
    return LinearImage(np.asarray(arr, dtype=float))


def rand_image(rng, shape=(48, 64, 3), lo=0.0, hi=1.0):
    return image(rng.uniform(lo, hi, size=shape))


class TestMse:
    def test_identity_is_zero(self):
        rng = np.random.default_rng(0)
        img = rand_image(rng)
        assert mse(img, img) == 0.0

    def test_full_swing(self):
        a = image(np.zeros((4, 4, 3)))
        b = image(np.ones((4, 4, 3)))
        assert mse(a, b) == pytest.approx(255.0**2, abs=1e-9)

    def test_uniform_ten_level_offset(self):
        a = image(np.full((4, 4, 3), 0.5))
        b = image(np.full((4, 4, 3), 0.5 + 10.0 / 255.0))
        assert mse(a, b) == pytest.approx(100.0, abs=1e-9)

    def test_symmetry(self):
        rng = np.random.default_rng(1)
        a, b = rand_image(rng), rand_image(rng)
        assert mse(a, b) == mse(b, a)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            mse(np.zeros((4, 4, 3)), np.zeros((4, 5, 3)))


class TestPsnr:
    def test_identity_is_inf(self):
        img = image(np.full((4, 4, 3), 0.25))
        assert psnr(img, img) == math.inf

    def test_full_swing_is_zero_db(self):
        a = image(np.zeros((4, 4, 3)))
        b = image(np.ones((4, 4, 3)))
        assert psnr(a, b) == pytest.approx(0.0, abs=1e-12)

    def test_ratio_100_is_20_db(self):
        # Offset of 25.5 levels gives MSE = 650.25, a ratio of exactly 100.
        a = image(np.full((4, 4, 3), 0.2))
        b = image(np.full((4, 4, 3), 0.3))
        assert mse(a, b) == pytest.approx(650.25, abs=1e-9)
        assert psnr(a, b) == pytest.approx(20.0, abs=1e-9)

    def test_strictly_decreasing_in_mse(self):
        base = image(np.full((4, 4, 3), 0.5))
        offsets = [2.0, 5.0, 20.0, 80.0]
        values = [psnr(base, image(np.full((4, 4, 3), 0.5 + o / 255.0))) for o in offsets]
        assert all(x > y for x, y in zip(values, values[1:]))


class TestSsim:
    def test_identity_is_exactly_one(self):
        rng = np.random.default_rng(2)
        img = rand_image(rng, shape=(32, 32, 3))
        assert ssim(img, img) == 1.0

    def test_symmetry(self):
        rng = np.random.default_rng(3)
        a, b = rand_image(rng, (24, 24, 3)), rand_image(rng, (24, 24, 3))
        assert ssim(a, b) == pytest.approx(ssim(b, a), abs=1e-12)

    def test_matches_reference_implementation(self):
        # Oracle: the published reference formulation as implemented by
        # scikit-image (Gaussian weights, sigma 1.5, population covariance).
        rng = np.random.default_rng(4)
        for _ in range(5):
            a = rand_image(rng, (40, 56, 3))
            b = rand_image(rng, (40, 56, 3))
            expected = skimage_ssim(
                to_grayscale(a),
                to_grayscale(b),
                gaussian_weights=True,
                sigma=1.5,
                use_sample_covariance=False,
                data_range=255.0,
            )
            assert ssim(a, b) == pytest.approx(expected, abs=1e-7)

    def test_inverted_binary_image_matches_reference(self):
        rng = np.random.default_rng(5)
        a = image((rng.uniform(size=(32, 32, 3)) > 0.5).astype(float))
        b = image(1.0 - a.data)
        expected = skimage_ssim(
            to_grayscale(a), to_grayscale(b),
            gaussian_weights=True, sigma=1.5,
            use_sample_covariance=False, data_range=255.0,
        )
        assert ssim(a, b) == pytest.approx(expected, abs=1e-7)

    def test_small_noise_stays_high(self):
        rng = np.random.default_rng(6)
        a = rand_image(rng, (48, 48, 3), lo=0.2, hi=0.8)
        noise = rng.normal(0.0, 0.01, size=a.data.shape)
        b = image(np.clip(a.data + noise, 0.0, 1.0))
        assert 0.9 < ssim(a, b) < 1.0

    def test_too_small_image_rejected(self):
        with pytest.raises(SizeError):
            ssim(np.zeros((8, 8, 3)), np.zeros((8, 8, 3)))

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            ssim(np.zeros((16, 16, 3)), np.zeros((16, 17, 3)))


class TestUiqm:
    def test_constant_gray_scores_zero_color_and_sharpness(self):
        img = image(np.full((32, 32, 3), 0.5))
        colorfulness, sharpness, contrast, q = uiqm(img)
        assert colorfulness == 0.0
        assert sharpness == 0.0
        assert contrast == 0.0
        assert q == 0.0

    def test_blur_reduces_sharpness(self):
        # Ordering oracle: smoothing strictly weakens edge content.
        rng = np.random.default_rng(7)
        img = rand_image(rng, (64, 64, 3))
        blurred = image(np.clip(ndimage.gaussian_filter(img.data, (2.0, 2.0, 0.0)), 0, 1))
        assert uism(img) > uism(blurred)

    def test_colorful_beats_gray(self):
        rng = np.random.default_rng(8)
        gray = image(np.repeat(rng.uniform(0.2, 0.8, size=(32, 32, 1)), 3, axis=2))
        colorful = rand_image(rng, (32, 32, 3))
        assert uicm(colorful) > uicm(gray)

    def test_uiconm_nonnegative(self):
        rng = np.random.default_rng(9)
        for _ in range(5):
            assert uiconm(rand_image(rng, (32, 32, 3))) >= 0.0

    def test_weighted_combination(self):
        rng = np.random.default_rng(10)
        img = rand_image(rng, (40, 40, 3))
        colorfulness, sharpness, contrast, q = uiqm(img)
        assert q == pytest.approx(
            0.0282 * colorfulness + 0.2953 * sharpness + 3.5753 * contrast, abs=1e-12
        )

    def test_non_rgb_rejected(self):
        with pytest.raises(ChannelError):
            uiqm(np.zeros((16, 16, 2)))

    def test_block_size_override(self):
        rng = np.random.default_rng(11)
        img = rand_image(rng, (40, 40, 3))
        assert uiconm(img, block=8) != uiconm(img, block=10)


class TestReport:
    def rows(self):
        return [
            ImageMetrics("a.png", 0.0, math.inf, 1.0, 0.1, 2.0, 0.5, 2.4),
            ImageMetrics("b.png", 100.0, 28.13, 0.9, 0.2, 3.0, 0.6, 3.1),
        ]

    def test_summary_means(self):
        report = MetricReport(rows=self.rows())
        summary = report.summary()
        assert summary["mse"] == pytest.approx(50.0)
        assert summary["psnr_db"] == math.inf
        assert summary["ssim"] == pytest.approx(0.95)

    def test_inf_serialised_as_string(self, tmp_path):
        report = MetricReport(rows=self.rows(), fid=0.25)
        json_path = tmp_path / "report.json"
        csv_path = tmp_path / "report.csv"
        report.write_json(json_path)
        report.write_csv(csv_path)
        doc = json.loads(json_path.read_text(encoding="utf-8"))
        assert doc["images"][0]["psnr_db"] == "inf"
        assert doc["summary"]["psnr_db"] == "inf"
        assert doc["summary"]["fid"] == pytest.approx(0.25)
        lines = csv_path.read_text(encoding="utf-8").strip().splitlines()
        assert lines[0] == "name,mse,psnr_db,ssim,uicm,uism,uiconm,uiqm"
        assert lines[1].split(",")[2] == "inf"
        assert lines[-1].startswith("fid,")

    def test_psnr_mse_consistency_on_generated_report(self):
        rng = np.random.default_rng(12)
        rows = []
        for i in range(4):
            a = rand_image(rng, (24, 24, 3))
            b = rand_image(rng, (24, 24, 3))
            rows.append(evaluate_pair(f"img{i}.png", a, b))
        for row in rows:
            assert row.psnr_db == pytest.approx(
                10.0 * math.log10(255.0**2 / row.mse), abs=1e-9
            )

    def test_evaluate_pair_identity(self):
        rng = np.random.default_rng(13)
        img = rand_image(rng, (24, 24, 3))
        row = evaluate_pair("same.png", img, img)
        assert row.mse == 0.0
        assert row.psnr_db == math.inf
        assert row.ssim == 1.0
