import json

import cv2
import numpy as np
import pytest

from uwrestore import LinearImage, build_splits, load_image, load_manifest, save_image
from uwrestore.dataset import (
    CANONICAL_SPLIT_SEED,
    ImageRecord,
    Manifest,
    SiteRecord,
    SplitSpec,
    load_canonical_splits,
    load_site_table_fixture,
    synthesize_index,
)
from uwrestore.errors import (
    ImageDecodeError,
    ImageFormatError,
    ManifestParseError,
    ManifestValidationError,
    SplitError,
)


def site(site_id=1, low=4, good=3, ref=2, water="01", d1=6.8, d2=6.4):
    return SiteRecord(site_id, low, good, ref, water, d1, d2)


def small_manifest(**site5_kwargs):
    kwargs = dict(site_id=5, low=6, good=5, ref=4, water="05", d1=7.2, d2=7.4)
    kwargs.update(site5_kwargs)
    sites = (site(site_id=1), site(**kwargs))
    return Manifest(sites=sites, images=synthesize_index(sites)).validate()


class TestSiteRecord:
    def test_published_site5_record_accepted(self):
        record = SiteRecord(5, 1726, 1344, 1241, "05", 7.2, 7.4)
        record.check()

    def test_no_water_type_site_accepted(self):
        record = SiteRecord(3, 458, 151, 0, None, 7.3, 7.6)
        record.check()

    def test_reference_exceeding_good_rejected(self):
        with pytest.raises(ManifestValidationError, match="site 2"):
            SiteRecord(2, 10, 5, 6, "02", 5.7, 6.3).check()

    def test_no_water_type_with_references_rejected(self):
        with pytest.raises(ManifestValidationError, match="site 6"):
            SiteRecord(6, 117, 52, 3, None, 6.6, 6.5).check()

    def test_site_id_range(self):
        with pytest.raises(ManifestValidationError):
            SiteRecord(9, 1, 1, 0, None, 1.0, 1.0).check()


class TestManifest:
    def test_fixture_totals_match_published_sums(self):
        manifest = load_site_table_fixture()
        assert manifest.totals() == {"low": 6003, "good": 3673, "reference": 2000}
        assert len(manifest.sites) == 8
        assert len(manifest.images) == 6003 + 3673

    def test_fixture_site5(self):
        record = load_site_table_fixture().site(5)
        assert record.low_quality_count == 1726
        assert record.good_quality_count == 1344
        assert record.reference_count == 1241
        assert record.water_type == "05"
        assert record.diver1_max_depth_m == 7.2

    def test_synthetic_index_counts(self):
        manifest = small_manifest()
        lows = [i for i in manifest.images if i.quality == "low"]
        goods = [i for i in manifest.images if i.quality == "good"]
        refs = [i for i in goods if i.reference_path is not None]
        assert len(lows) == 10 and len(goods) == 8 and len(refs) == 6

    def test_reference_ids_are_derived(self):
        manifest = small_manifest()
        refs = [i for i in manifest.images if i.reference_path is not None]
        assert all(i.reference_id is not None for i in refs)

    def test_validation_catches_count_mismatch(self):
        sites = (site(),)
        images = synthesize_index(sites)[:-1]  # drop one good image
        with pytest.raises(ManifestValidationError, match="site 1"):
            Manifest(sites=sites, images=images).validate()

    def test_validation_catches_duplicate_reference_path(self):
        sites = (site(low=0, good=2, ref=2),)
        images = list(synthesize_index(sites))
        images[1] = ImageRecord(
            image_id=images[1].image_id,
            site_id=1,
            quality="good",
            path=images[1].path,
            reference_path=images[0].reference_path,
        )
        with pytest.raises(ManifestValidationError, match="more than one"):
            Manifest(sites=sites, images=tuple(images)).validate()

    def test_validation_catches_low_quality_reference(self):
        sites = (site(low=1, good=1, ref=1),)
        images = (
            ImageRecord("a", 1, "low", "a.png", reference_path="r.png"),
            ImageRecord("b", 1, "good", "b.png", reference_path="r2.png"),
        )
        with pytest.raises(ManifestValidationError, match="good-quality"):
            Manifest(sites=sites, images=images).validate()

    def test_distance_default(self):
        record = ImageRecord("a", 1, "good", "a.png")
        assert record.distance_or_default == 2.0
        record = ImageRecord("a", 1, "good", "a.png", distance_m=3.5)
        assert record.distance_or_default == 3.5


class TestLoadManifest(object):
    def test_load_fixture_file(self):
        manifest = load_site_table_fixture()
        assert manifest.schema_version == 1

    def test_explicit_image_index(self, tmp_path):
        doc = {
            "schema_version": 1,
            "sites": [
                {
                    "site_id": 1,
                    "low_quality_count": 1,
                    "good_quality_count": 1,
                    "reference_count": 1,
                    "water_type": "01",
                    "diver1_max_depth_m": 6.8,
                    "diver2_max_depth_m": 6.4,
                }
            ],
            "images": [
                {"id": "l0", "site_id": 1, "quality": "low", "path": "l0.png"},
                {
                    "id": "g0",
                    "site_id": 1,
                    "quality": "good",
                    "path": "g0.png",
                    "reference_path": "r0.png",
                    "distance_m": 2.5,
                },
            ],
        }
        path = tmp_path / "manifest.json"
        path.write_text(json.dumps(doc), encoding="utf-8")
        manifest = load_manifest(path)
        assert manifest.images[1].distance_m == 2.5
        assert manifest.images[1].reference_id == "g0_ref"

    def test_parse_error_reports_position(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"schema_version": 1,\n  "sites": [,]}', encoding="utf-8")
        with pytest.raises(ManifestParseError, match="broken.json:2"):
            load_manifest(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ManifestParseError):
            load_manifest(tmp_path / "nope.json")

    def test_wrong_schema_version(self, tmp_path):
        path = tmp_path / "manifest.json"
        path.write_text('{"schema_version": 99, "sites": []}', encoding="utf-8")
        with pytest.raises(ManifestParseError, match="schema_version"):
            load_manifest(path)

    def test_invariant_violation_names_site(self, tmp_path):
        doc = {
            "schema_version": 1,
            "sites": [
                {
                    "site_id": 4,
                    "low_quality_count": 0,
                    "good_quality_count": 1,
                    "reference_count": 2,
                    "water_type": "04",
                    "diver1_max_depth_m": 8.7,
                    "diver2_max_depth_m": 8.8,
                }
            ],
        }
        path = tmp_path / "manifest.json"
        path.write_text(json.dumps(doc), encoding="utf-8")
        with pytest.raises(ManifestValidationError, match="site 4"):
            load_manifest(path)


class TestBuildSplits:
    def test_canonical_sizes(self):
        manifest = load_site_table_fixture()
        split = build_splits(manifest, seed=123)
        assert len(split.unpaired_low) == 6003
        assert len(split.unpaired_ref) == 2000
        assert len(split.paired_train) == 1700
        assert len(split.test) == 300

    def test_test_set_is_exclusively_site5(self):
        split = build_splits(load_site_table_fixture(), seed=5)
        assert all(good.startswith("site5_") for good, _ in split.test)

    def test_paired_and_test_disjoint(self):
        split = build_splits(load_site_table_fixture(), seed=9)
        assert not set(split.paired_train) & set(split.test)
        assert len(set(split.paired_train)) == len(split.paired_train)

    def test_deterministic_given_seed(self):
        manifest = load_site_table_fixture()
        assert build_splits(manifest, seed=77) == build_splits(manifest, seed=77)
        assert build_splits(manifest, seed=77) != build_splits(manifest, seed=78)

    def test_insufficient_site_pairs(self):
        manifest = small_manifest(ref=4)
        with pytest.raises(SplitError, match="site 5"):
            build_splits(manifest, seed=0, test_size=5)

    def test_small_manifest_split(self):
        manifest = small_manifest()
        split = build_splits(manifest, seed=0, test_size=2)
        assert len(split.test) == 2
        assert len(split.paired_train) == 4  # 6 pairs total, 2 held out

    def test_canonical_fixture_matches_builder(self):
        fixture = load_canonical_splits()
        rebuilt = build_splits(load_site_table_fixture(), seed=CANONICAL_SPLIT_SEED)
        assert fixture == rebuilt

    def test_split_roundtrip(self, tmp_path):
        split = build_splits(small_manifest(), seed=3, test_size=2)
        path = tmp_path / "split.json"
        split.write_json(path)
        assert SplitSpec.from_json(path) == split


class TestImageIO:
    def test_8bit_roundtrip(self, tmp_path):
        rng = np.random.default_rng(0)
        codes = rng.integers(0, 256, size=(5, 7, 3), dtype=np.uint8)
        img = LinearImage(codes.astype(float) / 255.0)
        path = tmp_path / "img8.png"
        save_image(path, img)
        back = load_image(path)
        assert back.source_bit_depth == 8
        assert np.array_equal(back.data, img.data)

    def test_16bit_roundtrip(self, tmp_path):
        rng = np.random.default_rng(1)
        codes = rng.integers(0, 65536, size=(4, 6, 3), dtype=np.uint16)
        img = LinearImage(codes.astype(float) / 65535.0, source_bit_depth=16)
        path = tmp_path / "img16.png"
        save_image(path, img)
        back = load_image(path)
        assert back.source_bit_depth == 16
        assert np.array_equal(back.data, img.data)

    def test_double_roundtrip_is_identity(self, tmp_path):
        rng = np.random.default_rng(2)
        codes = rng.integers(0, 256, size=(6, 6, 3), dtype=np.uint8)
        first = tmp_path / "a.png"
        second = tmp_path / "b.png"
        cv2.imwrite(str(first), codes[:, :, ::-1])
        img = load_image(first)
        save_image(second, img)
        assert np.array_equal(load_image(second).data, img.data)

    def test_10bit_data_in_16bit_container(self, tmp_path):
        # Hand-built 2x2 image holding 10-bit codes; normalisation is by the
        # container maximum, not the sensor maximum.
        codes = np.array(
            [[[0, 1, 2], [100, 200, 300]], [[512, 600, 700], [1023, 1023, 1023]]],
            dtype=np.uint16,
        )
        path = tmp_path / "img10.png"
        cv2.imwrite(str(path), codes[:, :, ::-1])
        img = load_image(path)
        assert np.array_equal(img.data, codes.astype(float) / 65535.0)
        assert img.data.max() == pytest.approx(1023.0 / 65535.0, abs=1e-15)

    def test_resize(self, tmp_path):
        rng = np.random.default_rng(3)
        codes = rng.integers(0, 256, size=(20, 30, 3), dtype=np.uint8)
        path = tmp_path / "img.png"
        cv2.imwrite(str(path), codes[:, :, ::-1])
        img = load_image(path, resize=(15, 10))
        assert (img.width, img.height) == (15, 10)
        assert img.data.min() >= 0.0 and img.data.max() <= 1.0

    def test_native_resolution_to_eval_resize(self, tmp_path):
        from uwrestore.dataset import EVAL_RESOLUTION, NATIVE_RESOLUTION

        w, h = NATIVE_RESOLUTION
        gradient = np.linspace(0, 255, w, dtype=np.uint8)
        codes = np.broadcast_to(gradient[None, :, None], (h, w, 3)).copy()
        path = tmp_path / "native.png"
        cv2.imwrite(str(path), codes)
        img = load_image(path, resize=EVAL_RESOLUTION)
        assert (img.width, img.height) == EVAL_RESOLUTION == (1680, 892)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ImageDecodeError):
            load_image(tmp_path / "nope.png")

    def test_truncated_file(self, tmp_path):
        rng = np.random.default_rng(4)
        codes = rng.integers(0, 256, size=(16, 16, 3), dtype=np.uint8)
        path = tmp_path / "img.png"
        cv2.imwrite(str(path), codes[:, :, ::-1])
        path.write_bytes(path.read_bytes()[:20])
        with pytest.raises(ImageDecodeError):
            load_image(path)

    def test_grayscale_rejected(self, tmp_path):
        path = tmp_path / "gray.png"
        cv2.imwrite(str(path), np.zeros((8, 8), dtype=np.uint8))
        with pytest.raises(ImageFormatError):
            load_image(path)

    def test_alpha_channel_dropped(self, tmp_path):
        rgba = np.zeros((4, 4, 4), dtype=np.uint8)
        rgba[..., 0] = 10  # blue in BGRA
        rgba[..., 3] = 255
        path = tmp_path / "rgba.png"
        cv2.imwrite(str(path), rgba)
        img = load_image(path)
        assert img.data.shape == (4, 4, 3)
        assert img.data[0, 0, 2] == pytest.approx(10.0 / 255.0)

    def test_save_bit_depth_override(self, tmp_path):
        img = LinearImage(np.full((2, 2, 3), 0.5))
        path = tmp_path / "img16.png"
        save_image(path, img, bit_depth=16)
        assert load_image(path).source_bit_depth == 16
