"""Image quality metrics: MSE, PSNR, SSIM, and the underwater UIQM family.

MSE and PSNR are computed on the 0-255 intensity scale so their magnitudes
line up with the values commonly reported for 8-bit imagery. PSNR of
identical images is the ``inf`` sentinel (serialised as the string "inf" in
reports).

SSIM follows the original reference formulation: grayscale conversion,
11x11 Gaussian window with sigma 1.5, K1=0.01, K2=0.03, dynamic range 255,
population (weighted-average) covariances, mean taken over the valid
interior where the window fits entirely.

UIQM combines three underwater attribute measures:

* UICM - colorfulness from asymmetric alpha-trimmed statistics of the RG
  and YB opponent channels,
* UISM - sharpness from a Sobel edge map per channel scored by EME
  (blockwise log max/min ratio),
* UIConM - contrast from logAMEE (blockwise Michelson-entropy) over the
  colour blocks,

with linear weights (0.0282, 0.2953, 3.5753). All block sizes, trim
fractions and weights are overridable; the defaults follow the metric's
original publication.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import ShapeError, SizeError
from .imaging import _as_data

#: Grayscale conversion weights (ITU-R BT.601 luma).
GRAY_WEIGHTS = (0.299, 0.587, 0.114)

#: UIQM combination weights c1, c2, c3 for (UICM, UISM, UIConM).
UIQM_WEIGHTS = (0.0282, 0.2953, 3.5753)
#: Opponent-channel statistics weights inside UICM.
UICM_COEFFS = (-0.0268, 0.1586)
#: Per-channel weights for the UISM edge-map sum (R, G, B).
UISM_LAMBDAS = (0.299, 0.587, 0.144)


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    x = _as_data(a)
    y = _as_data(b)
    if x.shape != y.shape:
        raise ShapeError(f"image shapes differ: {x.shape} vs {y.shape}")
    return x, y


def mse(a, b) -> float:
    """Mean squared error on the 0-255 scale, over all pixels and channels."""
    x, y = _pair(a, b)
    d = (x - y) * 255.0
    return float(np.mean(d * d))


def psnr(a, b) -> float:
    """Peak signal-to-noise ratio in dB: 10*log10(255^2 / MSE); inf when MSE=0."""
    m = mse(a, b)
    if m == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0**2 / m)


def to_grayscale(image) -> np.ndarray:
    """Luma image on the 0-255 scale, shape (H, W)."""
    data = _as_data(image) * 255.0
    r, g, b = GRAY_WEIGHTS
    return r * data[:, :, 0] + g * data[:, :, 1] + b * data[:, :, 2]


def _gaussian_kernel(size: int, sigma: float) -> np.ndarray:
    offsets = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    return np.exp(-(offsets**2) / (2.0 * sigma**2))


def _windowed_mean(img: np.ndarray, kernel: np.ndarray, radius: int) -> np.ndarray:
    # Separable correlation, then crop to the valid interior; border handling
    # never reaches the retained region.
    out = ndimage.correlate1d(img, kernel, axis=0, mode="nearest")
    out = ndimage.correlate1d(out, kernel, axis=1, mode="nearest")
    out = out[radius:-radius, radius:-radius]
    return out / kernel.sum() ** 2


def ssim(a, b, *, k1: float = 0.01, k2: float = 0.03, data_range: float = 255.0,
         window_size: int = 11, sigma: float = 1.5) -> float:
    """Mean structural similarity between two images.

    Images are converted to grayscale first; the index is averaged over all
    window positions where the full window fits.
    """
    x, y = _pair(a, b)
    h, w = x.shape[:2]
    if min(h, w) < window_size:
        raise SizeError(f"image {w}x{h} is smaller than the {window_size}x{window_size} window")
    gx = to_grayscale(x)
    gy = to_grayscale(y)
    kernel = _gaussian_kernel(window_size, sigma)
    radius = (window_size - 1) // 2

    mu_x = _windowed_mean(gx, kernel, radius)
    mu_y = _windowed_mean(gy, kernel, radius)
    xx = _windowed_mean(gx * gx, kernel, radius)
    yy = _windowed_mean(gy * gy, kernel, radius)
    xy = _windowed_mean(gx * gy, kernel, radius)

    var_x = xx - mu_x * mu_x
    var_y = yy - mu_y * mu_y
    cov = xy - mu_x * mu_y

    c1 = (k1 * data_range) ** 2
    c2 = (k2 * data_range) ** 2
    ssim_map = ((2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)) / (
        (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    )
    return float(np.mean(ssim_map))


def _alpha_trimmed_mean(values: np.ndarray, alpha: float) -> float:
    """Mean of the sorted values with the alpha tails dropped on both sides."""
    k = values.size
    t_lo = math.ceil(alpha * k)
    t_hi = math.floor(alpha * k)
    kept = np.sort(values)[t_lo : k - t_hi]
    if kept.size == 0:
        return 0.0
    return float(np.mean(kept))


def uicm(image, *, alpha: float = 0.1, coeffs: tuple[float, float] = UICM_COEFFS) -> float:
    """Underwater image colorfulness measure.

    Asymmetric alpha-trimmed means and (full-sample) second moments about
    them are taken on the RG and YB opponent channels.
    """
    data = _as_data(image) * 255.0
    r = data[:, :, 0].ravel()
    g = data[:, :, 1].ravel()
    b = data[:, :, 2].ravel()
    rg = r - g
    yb = (r + g) / 2.0 - b
    mu_rg = _alpha_trimmed_mean(rg, alpha)
    mu_yb = _alpha_trimmed_mean(yb, alpha)
    var_rg = float(np.mean((rg - mu_rg) ** 2))
    var_yb = float(np.mean((yb - mu_yb) ** 2))
    c_mu, c_sigma = coeffs
    return c_mu * math.hypot(mu_rg, mu_yb) + c_sigma * math.sqrt(var_rg + var_yb)


def _block_reduce(img: np.ndarray, block: int):
    """Crop to whole blocks and return (blocks_y, blocks_x, blockwise view)."""
    h, w = img.shape[:2]
    k2, k1 = h // block, w // block
    if k1 == 0 or k2 == 0:
        raise SizeError(f"image {w}x{h} is smaller than the {block}x{block} block")
    cropped = img[: k2 * block, : k1 * block]
    if img.ndim == 2:
        view = cropped.reshape(k2, block, k1, block)
        axes = (1, 3)
    else:
        view = cropped.reshape(k2, block, k1, block, img.shape[2])
        axes = (1, 3, 4)
    return k1, k2, view, axes


def eme(img: np.ndarray, block: int = 8) -> float:
    """Enhancement measure: mean blockwise log of the max/min intensity ratio.

    Blocks containing a zero are skipped (log of zero is undefined; they
    contribute nothing, so a flat zero image scores exactly 0).
    """
    k1, k2, view, axes = _block_reduce(img, block)
    bmax = view.max(axis=axes)
    bmin = view.min(axis=axes)
    ok = (bmin > 0.0) & (bmax > 0.0)
    terms = np.zeros_like(bmax)
    terms[ok] = np.log(bmax[ok] / bmin[ok])
    return float(2.0 / (k1 * k2) * terms.sum())


def uism(image, *, block: int = 8, lambdas: tuple[float, float, float] = UISM_LAMBDAS) -> float:
    """Underwater image sharpness measure.

    Each channel is multiplied by its normalised Sobel gradient magnitude to
    form an edge map, scored by EME, and the channel scores are combined with
    the luma-like weights.
    """
    data = _as_data(image) * 255.0
    total = 0.0
    for c, lam in enumerate(lambdas):
        chan = data[:, :, c]
        dx = ndimage.sobel(chan, axis=0)
        dy = ndimage.sobel(chan, axis=1)
        mag = np.hypot(dx, dy)
        peak = mag.max()
        if peak > 0.0:
            mag = mag * (255.0 / peak)
        total += lam * eme(mag * chan, block)
    return total


def uiconm(image, *, block: int = 8) -> float:
    """Underwater image contrast measure (logAMEE over colour blocks).

    Each block contributes (c)*log(c) with c the Michelson contrast
    (max-min)/(max+min) over block pixels across all channels; flat or black
    blocks contribute nothing.
    """
    data = _as_data(image) * 255.0
    k1, k2, view, axes = _block_reduce(data, block)
    bmax = view.max(axis=axes)
    bmin = view.min(axis=axes)
    top = bmax - bmin
    bot = bmax + bmin
    ok = (top > 0.0) & (bot > 0.0)
    terms = np.zeros_like(top)
    ratio = top[ok] / bot[ok]
    terms[ok] = ratio * np.log(ratio)
    return float(-1.0 / (k1 * k2) * terms.sum())


def uiqm(image, *, alpha: float = 0.1, block: int = 8,
         weights: tuple[float, float, float] = UIQM_WEIGHTS) -> tuple[float, float, float, float]:
    """(UICM, UISM, UIConM, UIQM) for one RGB image."""
    c1, c2, c3 = weights
    colorfulness = uicm(image, alpha=alpha)
    sharpness = uism(image, block=block)
    contrast = uiconm(image, block=block)
    return colorfulness, sharpness, contrast, c1 * colorfulness + c2 * sharpness + c3 * contrast


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

#: Column order for per-image report rows.
REPORT_FIELDS = ("mse", "psnr_db", "ssim", "uicm", "uism", "uiconm", "uiqm")


@dataclass
class ImageMetrics:
    """Per-image metric record for a (prediction, reference) pair."""

    name: str
    mse: float
    psnr_db: float
    ssim: float
    uicm: float
    uism: float
    uiconm: float
    uiqm: float


@dataclass
class MetricReport:
    """Per-image rows plus a mean summary; ``fid`` is a set-level extra."""

    rows: list[ImageMetrics] = field(default_factory=list)
    fid: float | None = None

    def summary(self) -> dict[str, float]:
        out: dict[str, float] = {}
        for key in REPORT_FIELDS:
            vals = [getattr(row, key) for row in self.rows]
            out[key] = float(np.mean(vals)) if vals else math.nan
        if self.fid is not None:
            out["fid"] = float(self.fid)
        return out

    def to_dict(self) -> dict:
        return {
            "images": [
                {"name": row.name, **{k: _json_number(getattr(row, k)) for k in REPORT_FIELDS}}
                for row in self.rows
            ],
            "summary": {k: _json_number(v) for k, v in self.summary().items()},
        }

    def write_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("name," + ",".join(REPORT_FIELDS) + "\n")
            for row in self.rows:
                cells = [row.name] + [_csv_number(getattr(row, k)) for k in REPORT_FIELDS]
                fh.write(",".join(cells) + "\n")
            summary = self.summary()
            cells = ["mean"] + [_csv_number(summary[k]) for k in REPORT_FIELDS]
            fh.write(",".join(cells) + "\n")
            if self.fid is not None:
                fh.write(f"fid,{_csv_number(self.fid)}\n")


def _json_number(x: float):
    # JSON has no inf or nan; use the "inf" sentinel string, null for disabled.
    if math.isinf(x):
        return "inf"
    if math.isnan(x):
        return None
    return x


def _csv_number(x: float) -> str:
    if math.isinf(x):
        return "inf"
    if math.isnan(x):
        return ""
    return f"{x:.6f}"


def evaluate_pair(name: str, prediction, reference) -> ImageMetrics:
    """All per-image metrics for one prediction against its reference.

    Full-reference scores compare the pair; the UIQM family scores the
    prediction alone.
    """
    colorfulness, sharpness, contrast, q = uiqm(prediction)
    return ImageMetrics(
        name=name,
        mse=mse(prediction, reference),
        psnr_db=psnr(prediction, reference),
        ssim=ssim(prediction, reference),
        uicm=colorfulness,
        uism=sharpness,
        uiconm=contrast,
        uiqm=q,
    )
