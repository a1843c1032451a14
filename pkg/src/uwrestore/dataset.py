"""Reef-survey dataset tooling: site manifests, splits, and image loading.

A manifest is a JSON document with a ``schema_version``, a ``sites`` table
(per-site counts, water type, diver depths) and an optional ``images``
index. When the index is absent a deterministic synthetic index is
generated from the counts, so count-only fixtures remain usable for split
construction and validation.

Splits mirror the dataset's published structure: every low-quality image
plus every reference restored image form the unpaired training set, while
the (good, reference) pairs are divided into a paired training set and a
test set drawn from a single designated site.

Image IO reads and writes PNG in 8- and 16-bit containers (10-bit sensor
data is stored in 16-bit files) with intensities normalised by the
container maximum.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import cv2
import numpy as np

from .errors import (
    ImageDecodeError,
    ImageFormatError,
    ManifestParseError,
    ManifestValidationError,
    SplitError,
)
from .imaging import LinearImage

MANIFEST_SCHEMA_VERSION = 1

QUALITY_LOW = "low"
QUALITY_GOOD = "good"

#: Default manually-assigned camera-object distance when a record has none.
DEFAULT_DISTANCE_M = 2.0

#: Native capture resolution (width, height) and the evaluation-time resize.
NATIVE_RESOLUTION = (1842, 980)
EVAL_RESOLUTION = (1680, 892)

#: Canonical fixtures shipped with the package.
DATA_DIR = Path(__file__).parent / "data"
SITE_TABLE_FIXTURE = DATA_DIR / "hicrd_table1.json"
CANONICAL_SPLIT_FIXTURE = DATA_DIR / "hicrd_splits_seed0.json"
CANONICAL_SPLIT_SEED = 0


@dataclass(frozen=True)
class SiteRecord:
    """Per-site counts and metadata.

    ``water_type`` is None for sites without measured water parameters;
    those sites cannot have reference restored images.
    """

    site_id: int
    low_quality_count: int
    good_quality_count: int
    reference_count: int
    water_type: str | None
    diver1_max_depth_m: float
    diver2_max_depth_m: float

    def check(self) -> None:
        if not 1 <= self.site_id <= 8:
            raise ManifestValidationError(f"site {self.site_id}: site_id must be in 1..8")
        for name in ("low_quality_count", "good_quality_count", "reference_count"):
            if getattr(self, name) < 0:
                raise ManifestValidationError(f"site {self.site_id}: {name} must be >= 0")
        if self.reference_count > self.good_quality_count:
            raise ManifestValidationError(
                f"site {self.site_id}: reference_count {self.reference_count} exceeds "
                f"good_quality_count {self.good_quality_count}"
            )
        if self.water_type is None and self.reference_count != 0:
            raise ManifestValidationError(
                f"site {self.site_id}: no water type, so reference_count must be 0, "
                f"got {self.reference_count}"
            )


@dataclass(frozen=True)
class ImageRecord:
    """One dataset image: identity, site, quality label and file locations."""

    image_id: str
    site_id: int
    quality: str
    path: str
    reference_path: str | None = None
    reference_id: str | None = None
    distance_m: float | None = None

    def __post_init__(self):
        if self.quality not in (QUALITY_LOW, QUALITY_GOOD):
            raise ManifestValidationError(
                f"image {self.image_id}: quality must be '{QUALITY_LOW}' or '{QUALITY_GOOD}'"
            )
        if self.reference_path is not None and self.reference_id is None:
            object.__setattr__(self, "reference_id", f"{self.image_id}_ref")

    @property
    def distance_or_default(self) -> float:
        return self.distance_m if self.distance_m is not None else DEFAULT_DISTANCE_M


@dataclass(frozen=True)
class Manifest:
    """Validated collection of site records plus the image index."""

    sites: tuple[SiteRecord, ...]
    images: tuple[ImageRecord, ...]
    schema_version: int = MANIFEST_SCHEMA_VERSION

    def site(self, site_id: int) -> SiteRecord:
        for record in self.sites:
            if record.site_id == site_id:
                return record
        raise KeyError(f"no site {site_id} in manifest")

    def totals(self) -> dict[str, int]:
        return {
            "low": sum(s.low_quality_count for s in self.sites),
            "good": sum(s.good_quality_count for s in self.sites),
            "reference": sum(s.reference_count for s in self.sites),
        }

    def validate(self) -> "Manifest":
        seen_sites: set[int] = set()
        for record in self.sites:
            if record.site_id in seen_sites:
                raise ManifestValidationError(f"site {record.site_id}: duplicate site record")
            seen_sites.add(record.site_id)
            record.check()
        counts: dict[tuple[int, str], int] = {}
        refs: dict[int, int] = {}
        seen_ids: set[str] = set()
        seen_ref_paths: set[str] = set()
        for img in self.images:
            if img.site_id not in seen_sites:
                raise ManifestValidationError(
                    f"image {img.image_id}: unknown site {img.site_id}"
                )
            if img.image_id in seen_ids:
                raise ManifestValidationError(f"image {img.image_id}: duplicate image id")
            seen_ids.add(img.image_id)
            counts[(img.site_id, img.quality)] = counts.get((img.site_id, img.quality), 0) + 1
            if img.reference_path is not None:
                if img.quality != QUALITY_GOOD:
                    raise ManifestValidationError(
                        f"image {img.image_id}: only good-quality images carry references"
                    )
                if img.reference_path in seen_ref_paths:
                    raise ManifestValidationError(
                        f"image {img.image_id}: reference path {img.reference_path} "
                        "pairs with more than one image"
                    )
                seen_ref_paths.add(img.reference_path)
                refs[img.site_id] = refs.get(img.site_id, 0) + 1
        for record in self.sites:
            pairs = (
                (QUALITY_LOW, record.low_quality_count),
                (QUALITY_GOOD, record.good_quality_count),
            )
            for quality, expected in pairs:
                got = counts.get((record.site_id, quality), 0)
                if got != expected:
                    raise ManifestValidationError(
                        f"site {record.site_id}: index has {got} {quality}-quality images, "
                        f"site record says {expected}"
                    )
            got_refs = refs.get(record.site_id, 0)
            if got_refs != record.reference_count:
                raise ManifestValidationError(
                    f"site {record.site_id}: index has {got_refs} reference images, "
                    f"site record says {record.reference_count}"
                )
        return self


def synthesize_index(sites: Sequence[SiteRecord]) -> tuple[ImageRecord, ...]:
    """Deterministic image index generated from site counts alone.

    Ids and paths follow a fixed naming scheme; the first ``reference_count``
    good-quality images of each site carry the site's reference images.
    """
    images: list[ImageRecord] = []
    for record in sorted(sites, key=lambda s: s.site_id):
        sid = record.site_id
        for i in range(record.low_quality_count):
            images.append(
                ImageRecord(
                    image_id=f"site{sid}_low_{i:04d}",
                    site_id=sid,
                    quality=QUALITY_LOW,
                    path=f"site{sid}/low/{i:04d}.png",
                )
            )
        for i in range(record.good_quality_count):
            has_ref = i < record.reference_count
            images.append(
                ImageRecord(
                    image_id=f"site{sid}_good_{i:04d}",
                    site_id=sid,
                    quality=QUALITY_GOOD,
                    path=f"site{sid}/good/{i:04d}.png",
                    reference_path=f"site{sid}/reference/{i:04d}.png" if has_ref else None,
                    reference_id=f"site{sid}_ref_{i:04d}" if has_ref else None,
                )
            )
    return tuple(images)


def _site_from_json(obj: dict) -> SiteRecord:
    try:
        water = obj.get("water_type")
        return SiteRecord(
            site_id=int(obj["site_id"]),
            low_quality_count=int(obj["low_quality_count"]),
            good_quality_count=int(obj["good_quality_count"]),
            reference_count=int(obj["reference_count"]),
            water_type=None if water in (None, "") else str(water),
            diver1_max_depth_m=float(obj["diver1_max_depth_m"]),
            diver2_max_depth_m=float(obj["diver2_max_depth_m"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ManifestParseError(f"bad site record {obj!r}: {exc}") from exc


def _image_from_json(obj: dict) -> ImageRecord:
    try:
        return ImageRecord(
            image_id=str(obj["id"]),
            site_id=int(obj["site_id"]),
            quality=str(obj["quality"]),
            path=str(obj["path"]),
            reference_path=obj.get("reference_path"),
            reference_id=obj.get("reference_id"),
            distance_m=None if obj.get("distance_m") is None else float(obj["distance_m"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ManifestParseError(f"bad image record {obj!r}: {exc}") from exc


def load_manifest(path) -> Manifest:
    """Parse and validate a manifest file.

    Parse problems raise :class:`ManifestParseError` with file/line context;
    consistency problems raise :class:`ManifestValidationError` naming the
    offending site or image and the violated rule.
    """
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ManifestParseError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ManifestParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ManifestParseError(f"{path}: top level must be a JSON object")
    version = doc.get("schema_version")
    if version != MANIFEST_SCHEMA_VERSION:
        raise ManifestParseError(
            f"{path}: schema_version must be {MANIFEST_SCHEMA_VERSION}, got {version!r}"
        )
    raw_sites = doc.get("sites")
    if not isinstance(raw_sites, list) or not raw_sites:
        raise ManifestParseError(f"{path}: field 'sites' must be a non-empty list")
    sites = tuple(_site_from_json(obj) for obj in raw_sites)
    raw_images = doc.get("images")
    if raw_images is None:
        images = synthesize_index(sites)
    elif isinstance(raw_images, list):
        images = tuple(_image_from_json(obj) for obj in raw_images)
    else:
        raise ManifestParseError(f"{path}: field 'images' must be a list when present")
    return Manifest(sites=sites, images=images, schema_version=version).validate()


def load_site_table_fixture() -> Manifest:
    """The canonical site-count fixture with its synthetic image index."""
    return load_manifest(SITE_TABLE_FIXTURE)


# ---------------------------------------------------------------------------
# Splits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SplitSpec:
    """Deterministic dataset split.

    ``unpaired_low`` and ``unpaired_ref`` together form the unpaired
    training set; ``paired_train`` and ``test`` are (good id, reference id)
    pairs, the test pairs all drawn from one site.
    """

    unpaired_low: tuple[str, ...]
    unpaired_ref: tuple[str, ...]
    paired_train: tuple[tuple[str, str], ...]
    test: tuple[tuple[str, str], ...]
    seed: int

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "unpaired_low": list(self.unpaired_low),
            "unpaired_ref": list(self.unpaired_ref),
            "paired_train": [list(p) for p in self.paired_train],
            "test": [list(p) for p in self.test],
        }

    def write_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=1, sort_keys=True)
            fh.write("\n")

    @classmethod
    def from_json(cls, path) -> "SplitSpec":
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        return cls(
            unpaired_low=tuple(doc["unpaired_low"]),
            unpaired_ref=tuple(doc["unpaired_ref"]),
            paired_train=tuple((a, b) for a, b in doc["paired_train"]),
            test=tuple((a, b) for a, b in doc["test"]),
            seed=int(doc["seed"]),
        )


def build_splits(manifest: Manifest, seed: int, *, test_size: int = 300,
                 test_site: int = 5) -> SplitSpec:
    """Construct the unpaired/paired/test splits from a validated manifest.

    The unpaired set takes every low-quality image and every reference
    image. Test pairs are sampled without replacement from the designated
    site's (good, reference) pairs using the seed; the remaining pairs form
    the paired training set. The same (manifest, seed) always produces the
    same split.
    """
    low_ids = sorted(img.image_id for img in manifest.images if img.quality == QUALITY_LOW)
    pairs = sorted(
        (img.image_id, img.reference_id)
        for img in manifest.images
        if img.quality == QUALITY_GOOD and img.reference_path is not None
    )
    ref_ids = sorted(ref for _, ref in pairs)
    site_pairs = sorted(
        (img.image_id, img.reference_id)
        for img in manifest.images
        if img.site_id == test_site and img.quality == QUALITY_GOOD and img.reference_path is not None
    )
    if len(site_pairs) < test_size:
        raise SplitError(
            f"site {test_site} has only {len(site_pairs)} (good, reference) pairs; "
            f"{test_size} test pairs required"
        )
    rng = np.random.default_rng(seed)
    chosen = rng.choice(len(site_pairs), size=test_size, replace=False)
    test = sorted(site_pairs[i] for i in chosen)
    test_set = set(test)
    paired_train = tuple(p for p in pairs if p not in test_set)
    return SplitSpec(
        unpaired_low=tuple(low_ids),
        unpaired_ref=tuple(ref_ids),
        paired_train=paired_train,
        test=tuple(test),
        seed=seed,
    )


def load_canonical_splits() -> SplitSpec:
    """The repo-canonical split fixture (seed 0 over the site-table fixture)."""
    return SplitSpec.from_json(CANONICAL_SPLIT_FIXTURE)


# ---------------------------------------------------------------------------
# Image IO
# ---------------------------------------------------------------------------

_CONTAINER_MAX = {8: 255.0, 16: 65535.0}


def load_image(path, resize: tuple[int, int] | None = None) -> LinearImage:
    """Read a PNG into a LinearImage, normalising by the container maximum.

    ``resize`` is (width, height); resizing is bilinear and happens after
    normalisation. 8- and 16-bit containers are supported; an alpha channel,
    if present, is dropped.
    """
    path = Path(path)
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise ImageDecodeError(f"{path}: cannot read or decode image")
    if raw.dtype == np.uint8:
        depth = 8
    elif raw.dtype == np.uint16:
        depth = 16
    else:
        raise ImageFormatError(f"{path}: unsupported sample type {raw.dtype}")
    if raw.ndim != 3 or raw.shape[2] not in (3, 4):
        raise ImageFormatError(f"{path}: expected an RGB image, got shape {raw.shape}")
    bgr = raw[:, :, :3]
    data = bgr[:, :, ::-1].astype(np.float64) / _CONTAINER_MAX[depth]
    if resize is not None:
        width, height = resize
        data = cv2.resize(data, (int(width), int(height)), interpolation=cv2.INTER_LINEAR)
        data = np.clip(data, 0.0, 1.0)
    return LinearImage(data, depth)


def save_image(path, image: LinearImage, bit_depth: int | None = None) -> None:
    """Write a LinearImage as PNG in an 8- or 16-bit container.

    Defaults to the image's source bit depth. Intensities are scaled by the
    container maximum and rounded to the nearest code.
    """
    depth = bit_depth if bit_depth is not None else image.source_bit_depth
    if depth not in _CONTAINER_MAX:
        raise ImageFormatError(f"bit depth must be 8 or 16, got {depth}")
    scale = _CONTAINER_MAX[depth]
    dtype = np.uint8 if depth == 8 else np.uint16
    codes = np.round(image.data * scale).astype(dtype)
    bgr = np.ascontiguousarray(codes[:, :, ::-1])
    if not cv2.imwrite(str(path), bgr):
        raise OSError(f"{path}: failed to write PNG")
