"""Fréchet distance between Gaussian fits of embedded feature sets.

The distance between two feature distributions summarised as Gaussians
(mu_r, Sigma_r) and (mu_g, Sigma_g) is

    ||mu_r - mu_g||^2 + Tr(Sigma_r + Sigma_g - 2 (Sigma_r Sigma_g)^(1/2)).

The trace of the matrix square root is evaluated through the symmetrised
product: Tr((Sigma_r Sigma_g)^(1/2)) = Tr((S Sigma_g S)^(1/2)) with
S = Sigma_r^(1/2), which keeps every eigendecomposition on a symmetric
matrix. Eigenvalues in [-1e-6, 0) are treated as numerical noise and clamped
to zero; anything more negative raises :class:`NonPSDError`.

This module knows nothing about how features were embedded. Real
evaluations consume feature files produced elsewhere; for self-contained
use there is a deterministic toy embedding based on downsampled patch
statistics (nothing like an Inception network; its scores are only
comparable to themselves).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    FeatureFormatError,
    InsufficientSamplesError,
    NonPSDError,
    ShapeError,
)
from .imaging import _as_data

#: Eigenvalues above this (negative) floor are clamped to zero.
EIGENVALUE_FLOOR = -1e-6

#: Feature file magic, the bytes "FEAT" read as a little-endian u32.
FEATURE_MAGIC = int.from_bytes(b"FEAT", "little")


@dataclass(frozen=True)
class GaussianStats:
    """Sample mean, covariance and count of a feature set."""

    mean: np.ndarray
    covariance: np.ndarray
    count: int

    def __post_init__(self):
        mu = np.asarray(self.mean, dtype=np.float64)
        cov = np.asarray(self.covariance, dtype=np.float64)
        if mu.ndim != 1:
            raise ShapeError(f"mean must be a vector, got shape {mu.shape}")
        if cov.shape != (mu.size, mu.size):
            raise ShapeError(f"covariance shape {cov.shape} does not match dimension {mu.size}")
        if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-10):
            raise ShapeError("covariance must be symmetric")
        object.__setattr__(self, "mean", mu)
        object.__setattr__(self, "covariance", cov)

    @property
    def dim(self) -> int:
        return self.mean.size

    def validate_psd(self, floor: float = -1e-8) -> "GaussianStats":
        """Check numerical positive semidefiniteness of the covariance."""
        smallest = float(np.linalg.eigvalsh(self.covariance)[0])
        if smallest < floor:
            raise NonPSDError(f"covariance has eigenvalue {smallest} below {floor}")
        return self


def gaussian_stats(features: np.ndarray) -> GaussianStats:
    """Fit mean and sample covariance (N-1 denominator) to an N x D matrix.

    The covariance is symmetrised as (C + C^T)/2 so downstream
    eigendecompositions see an exactly symmetric matrix.
    """
    feats = np.asarray(features, dtype=np.float64)
    if feats.ndim != 2:
        raise ShapeError(f"features must be an N x D matrix, got shape {feats.shape}")
    n = feats.shape[0]
    if n < 2:
        raise InsufficientSamplesError(f"need at least 2 feature vectors, got {n}")
    mu = feats.mean(axis=0)
    centered = feats - mu
    cov = centered.T @ centered / (n - 1)
    cov = (cov + cov.T) / 2.0
    return GaussianStats(mu, cov, n)


def _clamped_eigh(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    vals, vecs = np.linalg.eigh(matrix)
    if vals[0] < EIGENVALUE_FLOOR:
        raise NonPSDError(f"matrix has eigenvalue {vals[0]} below {EIGENVALUE_FLOOR}")
    return np.maximum(vals, 0.0), vecs


def _sqrtm_psd(matrix: np.ndarray) -> np.ndarray:
    vals, vecs = _clamped_eigh(matrix)
    return (vecs * np.sqrt(vals)) @ vecs.T


def fid(r: GaussianStats, g: GaussianStats) -> float:
    """Fréchet distance between two Gaussian feature summaries."""
    if r.dim != g.dim:
        raise ShapeError(f"feature dimensions differ: {r.dim} vs {g.dim}")
    diff = r.mean - g.mean
    sqrt_r = _sqrtm_psd(r.covariance)
    inner = sqrt_r @ g.covariance @ sqrt_r
    inner = (inner + inner.T) / 2.0
    vals, _ = _clamped_eigh(inner)
    trace_sqrt = float(np.sqrt(vals).sum())
    return float(diff @ diff + np.trace(r.covariance) + np.trace(g.covariance) - 2.0 * trace_sqrt)


def fid_from_features(real_features: np.ndarray, generated_features: np.ndarray) -> float:
    """Convenience: fit both Gaussians and return their Fréchet distance."""
    return fid(gaussian_stats(real_features), gaussian_stats(generated_features))


# ---------------------------------------------------------------------------
# Feature files
# ---------------------------------------------------------------------------

_HEADER = struct.Struct("<III")  # magic, D, N


def save_features(path, features: np.ndarray) -> None:
    """Write an N x D feature matrix in the binary feature-file format.

    Layout: header of three little-endian u32 (magic ``b"FEAT"``, D, N)
    followed by N*D little-endian float64 values, row major.
    """
    feats = np.ascontiguousarray(np.asarray(features, dtype=np.float64))
    if feats.ndim != 2:
        raise ShapeError(f"features must be an N x D matrix, got shape {feats.shape}")
    n, d = feats.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(FEATURE_MAGIC, d, n))
        fh.write(feats.astype("<f8").tobytes())


def load_features(path) -> np.ndarray:
    """Read a feature matrix from the binary format, or CSV as a fallback.

    A file is binary iff it starts with the magic bytes; anything else is
    parsed as comma-separated rows (``#`` comments allowed).
    """
    path = Path(path)
    with path.open("rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) == _HEADER.size:
            magic, d, n = _HEADER.unpack(head)
            if magic == FEATURE_MAGIC:
                payload = fh.read()
                expected = n * d * 8
                if len(payload) != expected:
                    raise FeatureFormatError(
                        f"{path}: payload is {len(payload)} bytes, expected {expected}"
                    )
                return np.frombuffer(payload, dtype="<f8").reshape(n, d).astype(np.float64)
    try:
        data = np.loadtxt(path, delimiter=",", comments="#", dtype=np.float64, ndmin=2)
    except ValueError as exc:
        raise FeatureFormatError(f"{path}: neither binary feature file nor CSV ({exc})") from exc
    return data


# ---------------------------------------------------------------------------
# Toy embedding
# ---------------------------------------------------------------------------


def toy_patch_features(image, grid: tuple[int, int] = (4, 4)) -> np.ndarray:
    """Deterministic toy embedding: blockwise channel means and deviations.

    The image is divided into a grid of patches; each patch contributes its
    per-channel mean and standard deviation, giving a vector of length
    grid_h * grid_w * 6. This is a stand-in embedding for self-contained
    tests and demos only, not a learned feature space.
    """
    data = _as_data(image)
    gh, gw = grid
    h, w = data.shape[:2]
    if h < gh or w < gw:
        raise ShapeError(f"image {w}x{h} too small for a {gw}x{gh} patch grid")
    bh, bw = h // gh, w // gw
    cropped = data[: gh * bh, : gw * bw]
    blocks = cropped.reshape(gh, bh, gw, bw, 3)
    means = blocks.mean(axis=(1, 3))
    stds = blocks.std(axis=(1, 3))
    return np.concatenate([means.ravel(), stds.ravel()])


def embed_images(images, grid: tuple[int, int] = (4, 4)) -> np.ndarray:
    """Stack toy embeddings of an iterable of images into an N x D matrix."""
    rows = [toy_patch_features(img, grid) for img in images]
    if not rows:
        raise InsufficientSamplesError("no images to embed")
    return np.stack(rows)
