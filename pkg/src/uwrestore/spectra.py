"""Wavelength-resolved optics: diffuse attenuation and per-channel coefficients.

Two measurement products feed the imaging pipeline. Downwelling irradiance
depth profiles give the diffuse attenuation coefficient (the slope of
log-irradiance against depth). A spectral attenuation curve, weighted by the
camera's per-channel quantum efficiency, collapses to one total attenuation
coefficient per RGB channel:

    p_c = integral(beta(lambda) * S_c(lambda)) / integral(S_c(lambda))

over a wavelength window covering the visible spectrum (400-750 nm by
default). The normalisation by the response integral keeps p_c in 1/m; the
raw unnormalised integral is available behind ``normalize=False``.

All quadrature is trapezoidal on the merged sample grid: measured curves are
densely sampled, and the rule is exact for piecewise-linear integrands, which
is what linear interpolation of the samples produces anyway.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    CoverageError,
    DegenerateIntervalError,
    DomainError,
    ExtrapolationError,
    InvalidProfileError,
    ZeroResponseError,
)

#: Integration window for channel coefficients (nm), spanning visible light.
DEFAULT_LAMBDA_MIN_NM = 400.0
DEFAULT_LAMBDA_MAX_NM = 750.0


def _ascending_pair(name: str, x: np.ndarray, y: np.ndarray, min_samples: int = 2):
    if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape:
        raise InvalidProfileError(f"{name}: coordinate and value arrays must be 1-d and equal length")
    if x.size < min_samples:
        raise InvalidProfileError(f"{name}: need at least {min_samples} samples, got {x.size}")
    if not np.all(np.diff(x) > 0):
        raise InvalidProfileError(f"{name}: coordinates must be strictly ascending")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise InvalidProfileError(f"{name}: samples must be finite")


@dataclass(frozen=True)
class SpectralCurve:
    """A sampled function of wavelength: attenuation (1/m) or sensor response.

    Wavelengths must be strictly ascending. Values in between samples are
    taken as linear interpolants. Measured curves loaded from file carry at
    least two samples; a single-sample curve can only arise from resampling
    onto a one-point grid.
    """

    wavelengths_nm: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.wavelengths_nm, dtype=np.float64)
        v = np.asarray(self.values, dtype=np.float64)
        _ascending_pair("spectral curve", w, v, min_samples=1)
        object.__setattr__(self, "wavelengths_nm", w)
        object.__setattr__(self, "values", v)

    @property
    def support(self) -> tuple[float, float]:
        return float(self.wavelengths_nm[0]), float(self.wavelengths_nm[-1])

    def covers(self, a_nm: float, b_nm: float) -> bool:
        lo, hi = self.support
        return lo <= a_nm and b_nm <= hi

    def validate_response(self) -> "SpectralCurve":
        """Check the value range expected of a quantum-efficiency curve."""
        if np.any(self.values < 0.0) or np.any(self.values > 1.0):
            raise DomainError("response values must lie in [0, 1]")
        return self


@dataclass(frozen=True)
class IrradianceProfile:
    """Downwelling irradiance E(z) sampled at strictly increasing depths (m)."""

    depths_m: np.ndarray
    irradiance: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.depths_m, dtype=np.float64)
        e = np.asarray(self.irradiance, dtype=np.float64)
        _ascending_pair("irradiance profile", z, e)
        if np.any(e <= 0.0):
            raise InvalidProfileError("irradiance profile: all irradiance values must be positive")
        object.__setattr__(self, "depths_m", z)
        object.__setattr__(self, "irradiance", e)


@dataclass(frozen=True)
class ChannelCoefficients:
    """Total attenuation coefficient per RGB channel, in 1/m."""

    p_r: float
    p_g: float
    p_b: float

    def __post_init__(self):
        for name in ("p_r", "p_g", "p_b"):
            val = float(getattr(self, name))
            if not math.isfinite(val) or val <= 0.0:
                raise DomainError(f"{name} must be finite and > 0 for physical water, got {val}")
            object.__setattr__(self, name, val)

    def as_array(self) -> np.ndarray:
        return np.array([self.p_r, self.p_g, self.p_b], dtype=np.float64)


def kd_from_profile(profile: IrradianceProfile, z0_index: int, z_index: int) -> float:
    """Diffuse attenuation coefficient Kd (1/m) from one pair of profile samples.

    Kd is the slope of log-irradiance over depth between the uppermost sample
    z0 and a deeper sample z:

        Kd = ln(E(z0) / E(z)) / (z - z0)

    The log-ratio is oriented so attenuating water (irradiance decaying with
    depth) yields a positive Kd. Exact for perfectly exponential profiles.
    """
    n = profile.depths_m.size
    if not (0 <= z0_index < n and 0 <= z_index < n):
        raise IndexError(f"sample index out of range for profile of {n} samples")
    if z_index <= z0_index:
        raise DegenerateIntervalError("z_index must select a strictly deeper sample than z0_index")
    z0 = profile.depths_m[z0_index]
    z = profile.depths_m[z_index]
    e0 = profile.irradiance[z0_index]
    e = profile.irradiance[z_index]
    return float(math.log(e0 / e) / (z - z0))


def kd_depth_average(kd_samples: Iterable[tuple[float, float]], z: float) -> float:
    """Depth-averaged Kd over [0, z]: (1/z) * integral of Kd(z') dz'.

    ``kd_samples`` are (depth, Kd) pairs whose depths must cover [0, z];
    the integral is trapezoidal on the sample grid restricted to [0, z],
    with end values interpolated linearly.
    """
    pairs = np.asarray(list(kd_samples), dtype=np.float64)
    if pairs.ndim != 2 or pairs.shape[1] != 2 or pairs.shape[0] < 2:
        raise InvalidProfileError("kd_samples must contain at least two (depth, Kd) pairs")
    depths = pairs[:, 0]
    kd = pairs[:, 1]
    _ascending_pair("Kd samples", depths, kd)
    if z <= 0.0:
        raise DegenerateIntervalError(f"averaging depth must be positive, got {z}")
    if depths[0] > 0.0 or depths[-1] < z:
        raise CoverageError(
            f"Kd samples cover [{depths[0]}, {depths[-1]}] m but [0, {z}] m is required"
        )
    inner = depths[(depths > 0.0) & (depths < z)]
    grid = np.concatenate(([0.0], inner, [z]))
    vals = np.interp(grid, depths, kd)
    return float(np.trapezoid(vals, grid) / z)


def resample_curve(curve: SpectralCurve, grid: Sequence[float]) -> SpectralCurve:
    """Linearly interpolate a curve onto a new ascending wavelength grid.

    Grid points coinciding with existing samples are preserved exactly;
    points outside the curve's support raise :class:`ExtrapolationError`.
    """
    g = np.asarray(grid, dtype=np.float64)
    if g.ndim != 1 or g.size < 1:
        raise DomainError("resampling grid must be a non-empty 1-d array")
    if g.size > 1 and not np.all(np.diff(g) > 0):
        raise DomainError("resampling grid must be strictly ascending")
    lo, hi = curve.support
    if g[0] < lo or g[-1] > hi:
        raise ExtrapolationError(
            f"grid [{g[0]}, {g[-1]}] nm extends outside curve support [{lo}, {hi}] nm"
        )
    vals = np.interp(g, curve.wavelengths_nm, curve.values)
    return SpectralCurve(g, vals)


def channel_attenuation(
    beta: SpectralCurve,
    response: SpectralCurve,
    a_nm: float = DEFAULT_LAMBDA_MIN_NM,
    b_nm: float = DEFAULT_LAMBDA_MAX_NM,
    normalize: bool = True,
) -> float:
    """Sensor-response-weighted attenuation coefficient for one channel.

    Integrates beta(lambda) * S(lambda) over [a_nm, b_nm] by the trapezoidal
    rule on the union of both curves' sample grids. With ``normalize=True``
    (the default) the result is divided by the integral of S, giving a
    response-weighted mean attenuation in 1/m; with ``normalize=False`` the
    raw product integral is returned (units 1/m * nm).
    """
    if a_nm >= b_nm:
        raise DegenerateIntervalError(f"need a_nm < b_nm, got [{a_nm}, {b_nm}]")
    for name, curve in (("attenuation", beta), ("response", response)):
        if not curve.covers(a_nm, b_nm):
            lo, hi = curve.support
            raise CoverageError(
                f"{name} curve spans [{lo}, {hi}] nm but the window [{a_nm}, {b_nm}] nm is required"
            )
    merged = np.union1d(beta.wavelengths_nm, response.wavelengths_nm)
    inner = merged[(merged > a_nm) & (merged < b_nm)]
    grid = np.concatenate(([a_nm], inner, [b_nm]))
    bw = np.interp(grid, beta.wavelengths_nm, beta.values)
    sw = np.interp(grid, response.wavelengths_nm, response.values)
    if np.any(sw < 0.0):
        raise DomainError("response values must be non-negative")
    weighted = float(np.trapezoid(bw * sw, grid))
    if not normalize:
        return weighted
    total = float(np.trapezoid(sw, grid))
    if total == 0.0:
        raise ZeroResponseError("response integrates to zero over the window; cannot normalize")
    return weighted / total


def channel_coefficients(
    beta: SpectralCurve,
    response_r: SpectralCurve,
    response_g: SpectralCurve,
    response_b: SpectralCurve,
    a_nm: float = DEFAULT_LAMBDA_MIN_NM,
    b_nm: float = DEFAULT_LAMBDA_MAX_NM,
    normalize: bool = True,
) -> ChannelCoefficients:
    """Channel coefficients for all three RGB responses at once."""
    return ChannelCoefficients(
        p_r=channel_attenuation(beta, response_r, a_nm, b_nm, normalize),
        p_g=channel_attenuation(beta, response_g, a_nm, b_nm, normalize),
        p_b=channel_attenuation(beta, response_b, a_nm, b_nm, normalize),
    )


def _read_csv_rows(path) -> tuple[list[str], list[list[float]]]:
    path = Path(path)
    header: list[str] | None = None
    rows: list[list[float]] = []
    with path.open("r", encoding="utf-8", newline="") as fh:
        for lineno, raw in enumerate(csv.reader(fh), start=1):
            if not raw or raw[0].lstrip().startswith("#"):
                continue
            if header is None:
                header = [c.strip().lower() for c in raw]
                continue
            try:
                rows.append([float(c) for c in raw])
            except ValueError as exc:
                raise InvalidProfileError(f"{path}:{lineno}: non-numeric value ({exc})") from exc
    if header is None or not rows:
        raise InvalidProfileError(f"{path}: no header or no data rows")
    return header, rows


def load_curve_csv(path) -> SpectralCurve:
    """Read a single spectral curve from CSV with header ``wavelength_nm,value``."""
    header, rows = _read_csv_rows(path)
    if header[:2] != ["wavelength_nm", "value"] or any(len(r) < 2 for r in rows):
        raise InvalidProfileError(f"{path}: expected header 'wavelength_nm,value'")
    data = np.asarray(rows, dtype=np.float64)
    _ascending_pair(str(path), data[:, 0], data[:, 1])
    return SpectralCurve(data[:, 0], data[:, 1])


def load_camera_response_csv(path) -> tuple[SpectralCurve, SpectralCurve, SpectralCurve]:
    """Read R/G/B quantum-efficiency curves from CSV.

    Expected header ``wavelength_nm,qe_r,qe_g,qe_b``; QE values must lie in
    [0, 1]. Digitised curves are a user-supplied input; the package ships a
    synthetic demo file only.
    """
    header, rows = _read_csv_rows(path)
    if header[:4] != ["wavelength_nm", "qe_r", "qe_g", "qe_b"] or any(len(r) < 4 for r in rows):
        raise InvalidProfileError(f"{path}: expected header 'wavelength_nm,qe_r,qe_g,qe_b'")
    data = np.asarray(rows, dtype=np.float64)
    _ascending_pair(str(path), data[:, 0], data[:, 1])
    curves = tuple(
        SpectralCurve(data[:, 0], data[:, i]).validate_response() for i in (1, 2, 3)
    )
    return curves  # type: ignore[return-value]
