import numpy as np
import pytest

from uwrestore import (
    GaussianStats,
    LinearImage,
    embed_images,
    fid,
    fid_from_features,
    gaussian_stats,
    load_features,
    save_features,
    toy_patch_features,
)
from uwrestore.errors import (
    FeatureFormatError,
    InsufficientSamplesError,
    NonPSDError,
    ShapeError,
)


def stats_1d(mu, sigma):
    return GaussianStats(np.array([mu]), np.array([[sigma**2]]), count=2)


def random_psd(rng, dim):
    a = rng.normal(size=(dim, dim))
    cov = a @ a.T / dim
    return (cov + cov.T) / 2.0


class TestGaussianStats:
    def test_identical_features_zero_covariance(self):
        feats = np.tile([1.0, -2.0, 3.0], (5, 1))
        stats = gaussian_stats(feats)
        assert np.array_equal(stats.covariance, np.zeros((3, 3)))
        assert stats.mean == pytest.approx([1.0, -2.0, 3.0])
        assert stats.count == 5

    def test_two_scalar_samples(self):
        stats = gaussian_stats(np.array([[0.0], [2.0]]))
        assert stats.mean[0] == pytest.approx(1.0)
        assert stats.covariance[0, 0] == pytest.approx(2.0)  # N-1 denominator

    def test_two_point_diagonal_case(self):
        stats = gaussian_stats(np.array([[0.0, 0.0], [1.0, 1.0]]))
        assert stats.covariance == pytest.approx(np.array([[0.5, 0.5], [0.5, 0.5]]))

    def test_covariance_exactly_symmetric(self):
        rng = np.random.default_rng(0)
        stats = gaussian_stats(rng.normal(size=(40, 7)))
        assert np.array_equal(stats.covariance, stats.covariance.T)

    def test_insufficient_samples(self):
        with pytest.raises(InsufficientSamplesError):
            gaussian_stats(np.ones((1, 4)))

    def test_non_matrix_rejected(self):
        with pytest.raises(ShapeError):
            gaussian_stats(np.ones(4))

    def test_validate_psd(self):
        good = GaussianStats(np.zeros(2), np.eye(2), count=3)
        assert good.validate_psd() is good
        bad = GaussianStats(np.zeros(2), np.array([[1.0, 2.0], [2.0, 1.0]]), count=3)
        with pytest.raises(NonPSDError):
            bad.validate_psd()


class TestFid:
    def test_identical_stats_near_zero(self):
        rng = np.random.default_rng(1)
        stats = GaussianStats(rng.normal(size=16), random_psd(rng, 16), count=64)
        assert abs(fid(stats, stats)) <= 1e-6

    def test_scalar_closed_form(self):
        # In 1-D the distance is (mu_r - mu_g)^2 + (sigma_r - sigma_g)^2.
        assert fid(stats_1d(0.0, 1.0), stats_1d(1.0, 2.0)) == pytest.approx(2.0, abs=1e-10)
        rng = np.random.default_rng(2)
        for _ in range(200):
            mu_r, mu_g = rng.normal(size=2)
            sig_r, sig_g = rng.uniform(0.05, 3.0, size=2)
            expected = (mu_r - mu_g) ** 2 + (sig_r - sig_g) ** 2
            got = fid(stats_1d(mu_r, sig_r), stats_1d(mu_g, sig_g))
            assert got == pytest.approx(expected, abs=1e-8)

    def test_diagonal_case_sums_per_dimension(self):
        rng = np.random.default_rng(3)
        mu_r, mu_g = rng.normal(size=(2, 3))
        sig_r, sig_g = rng.uniform(0.1, 2.0, size=(2, 3))
        r = GaussianStats(mu_r, np.diag(sig_r**2), count=10)
        g = GaussianStats(mu_g, np.diag(sig_g**2), count=10)
        expected = float(np.sum((mu_r - mu_g) ** 2 + (sig_r - sig_g) ** 2))
        assert fid(r, g) == pytest.approx(expected, abs=1e-10)

    def test_symmetry(self):
        rng = np.random.default_rng(4)
        r = GaussianStats(rng.normal(size=12), random_psd(rng, 12), count=30)
        g = GaussianStats(rng.normal(size=12), random_psd(rng, 12), count=30)
        assert abs(fid(r, g) - fid(g, r)) <= 1e-8

    def test_nonnegative_within_tolerance(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            feats_r = rng.normal(size=(30, 6))
            feats_g = rng.normal(size=(30, 6))
            assert fid_from_features(feats_r, feats_g) >= -1e-6

    def test_dimension_mismatch(self):
        r = GaussianStats(np.zeros(2), np.eye(2), count=3)
        g = GaussianStats(np.zeros(3), np.eye(3), count=3)
        with pytest.raises(ShapeError):
            fid(r, g)

    def test_non_psd_rejected(self):
        r = GaussianStats(np.zeros(1), np.array([[-1.0]]), count=3)
        g = stats_1d(0.0, 1.0)
        with pytest.raises(NonPSDError):
            fid(r, g)

    def test_tiny_negative_eigenvalues_clamped(self):
        cov = np.eye(2)
        cov[1, 1] = -1e-7  # inside the clamp window
        r = GaussianStats(np.zeros(2), cov, count=3)
        g = GaussianStats(np.zeros(2), np.eye(2), count=3)
        value = fid(r, g)
        assert np.isfinite(value)

    def test_matches_schur_sqrtm_reference(self):
        # Independent route: scipy's Schur-based matrix square root of the
        # raw (unsymmetrised) product.
        from scipy import linalg

        rng = np.random.default_rng(11)
        for _ in range(25):
            d = int(rng.integers(2, 32))
            a = rng.normal(size=(d, d))
            b = rng.normal(size=(d, d))
            cov_r = a @ a.T / d
            cov_g = b @ b.T / d
            mu_r, mu_g = rng.normal(size=(2, d))
            covmean = linalg.sqrtm(cov_r @ cov_g)
            if np.iscomplexobj(covmean):
                covmean = covmean.real
            expected = float(
                np.sum((mu_r - mu_g) ** 2) + np.trace(cov_r + cov_g - 2.0 * covmean)
            )
            got = fid(
                GaussianStats(mu_r, (cov_r + cov_r.T) / 2.0, 10),
                GaussianStats(mu_g, (cov_g + cov_g.T) / 2.0, 10),
            )
            assert got == pytest.approx(expected, abs=1e-7)


class TestFeatureFiles:
    def test_binary_roundtrip(self, tmp_path):
        rng = np.random.default_rng(6)
        feats = rng.normal(size=(17, 9))
        path = tmp_path / "feats.bin"
        save_features(path, feats)
        assert path.read_bytes()[:4] == b"FEAT"
        back = load_features(path)
        assert np.array_equal(back, feats)

    def test_csv_fallback(self, tmp_path):
        path = tmp_path / "feats.csv"
        path.write_text("# toy features\n1.0,2.0\n3.0,4.0\n", encoding="utf-8")
        back = load_features(path)
        assert np.array_equal(back, [[1.0, 2.0], [3.0, 4.0]])

    def test_single_row_csv(self, tmp_path):
        path = tmp_path / "feats.csv"
        path.write_text("1.0,2.0,3.0\n", encoding="utf-8")
        assert load_features(path).shape == (1, 3)

    def test_truncated_payload(self, tmp_path):
        rng = np.random.default_rng(7)
        path = tmp_path / "feats.bin"
        save_features(path, rng.normal(size=(4, 4)))
        data = path.read_bytes()
        path.write_bytes(data[:-8])
        with pytest.raises(FeatureFormatError):
            load_features(path)

    def test_garbage_file(self, tmp_path):
        path = tmp_path / "feats.bin"
        path.write_bytes(b"\x00\x01\x02\x03 not a feature file")
        with pytest.raises(FeatureFormatError):
            load_features(path)


class TestToyEmbedding:
    def test_shape_and_determinism(self):
        rng = np.random.default_rng(8)
        img = LinearImage(rng.uniform(size=(32, 48, 3)))
        vec = toy_patch_features(img)
        assert vec.shape == (4 * 4 * 3 * 2,)
        assert np.array_equal(vec, toy_patch_features(img))

    def test_constant_image_statistics(self):
        img = LinearImage(np.full((16, 16, 3), 0.25))
        vec = toy_patch_features(img, grid=(2, 2))
        means, stds = vec[: 2 * 2 * 3], vec[2 * 2 * 3 :]
        assert means == pytest.approx([0.25] * 12)
        assert stds == pytest.approx([0.0] * 12)

    def test_embed_images_stacks(self):
        rng = np.random.default_rng(9)
        imgs = [LinearImage(rng.uniform(size=(16, 16, 3))) for _ in range(3)]
        mat = embed_images(imgs)
        assert mat.shape == (3, 96)
        assert np.array_equal(mat[1], toy_patch_features(imgs[1]))

    def test_identical_sets_give_zero_fid(self):
        rng = np.random.default_rng(10)
        imgs = [LinearImage(rng.uniform(size=(16, 16, 3))) for _ in range(8)]
        feats = embed_images(imgs)
        assert abs(fid_from_features(feats, feats)) <= 1e-6

    def test_too_small_image(self):
        with pytest.raises(ShapeError):
            toy_patch_features(LinearImage(np.zeros((2, 2, 3))), grid=(4, 4))

    def test_empty_set(self):
        with pytest.raises(InsufficientSamplesError):
            embed_images([])
