"""Forward underwater degradation and inverse restoration.

The simplified imaging model mixes the scene radiance J with a background
airlight A through the medium transmission t, per channel:

    I = J * t + A * (1 - t)
    t_c = exp(-p_c * d)        d: camera-object distance (m)
    A_c = exp(-p_c * z)        z: diving depth (m)

Restoration inverts the mix with a lower bound t0 on the transmission to
keep the division stable:

    J = (I - A) / max(t, t0) + A

Around that core sit two heuristics used when producing reference restored
images: an optional pixel-range mapping on the 8-bit scale (values in
[lo, hi] stretched to [0, 255], values below lo clipped to 0) applied before
inversion, and an optional global contrast rescale afterwards that maps the
image minimum to 0 and maximum to 1 without losing information.

All transforms are pure and per-pixel; results do not depend on how pixels
are partitioned across workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ChannelError, DomainError, ShapeError
from .spectra import ChannelCoefficients

#: Default lower bound on the transmission used during restoration.
DEFAULT_T0 = 0.1
#: Default pixel-range mapping bounds on the 8-bit scale.
DEFAULT_RANGE_MAP = (13.0, 255.0)


@dataclass(frozen=True)
class LinearImage:
    """An RGB image as float intensities in [0, 1].

    ``data`` has shape (height, width, 3), channels in RGB order;
    ``source_bit_depth`` records the integer container the pixels came from
    (8 or 16; 10-bit sensor data lives in 16-bit containers).
    """

    data: np.ndarray
    source_bit_depth: int = 8

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 3:
            raise ShapeError(f"image data must be 3-d (H, W, 3), got shape {arr.shape}")
        if arr.shape[2] != 3:
            raise ChannelError(f"image must have 3 RGB channels, got {arr.shape[2]}")
        if not np.all(np.isfinite(arr)):
            raise DomainError("image intensities must be finite")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise DomainError(
                f"image intensities must lie in [0, 1], got [{arr.min()}, {arr.max()}]"
            )
        if self.source_bit_depth not in (8, 16):
            raise DomainError(f"source_bit_depth must be 8 or 16, got {self.source_bit_depth}")
        # Own a frozen copy so the image cannot be mutated through either the
        # constructor argument or the attribute.
        arr = np.array(arr, dtype=np.float64)
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


def _as_data(image) -> np.ndarray:
    """Accept a LinearImage or a bare (H, W, 3) array in [0, 1]."""
    if isinstance(image, LinearImage):
        return image.data
    return LinearImage(image).data


def _bit_depth(image) -> int:
    return image.source_bit_depth if isinstance(image, LinearImage) else 8


@dataclass(frozen=True)
class RestorationParams:
    """Everything the degrade/restore pair needs besides the image itself.

    ``range_map`` bounds are on the 8-bit intensity scale; ``None`` disables
    the mapping. ``rescale_output`` applies the global contrast rescale after
    inversion.
    """

    p: ChannelCoefficients
    distance_m: float = 2.0
    depth_m: float = 0.0
    t0: float = DEFAULT_T0
    range_map: tuple[float, float] | None = DEFAULT_RANGE_MAP
    rescale_output: bool = True

    def __post_init__(self):
        if self.distance_m < 0.0:
            raise DomainError(f"distance must be >= 0 m, got {self.distance_m}")
        if self.depth_m < 0.0:
            raise DomainError(f"depth must be >= 0 m, got {self.depth_m}")
        if not 0.0 < self.t0 <= 1.0:
            raise DomainError(f"t0 must lie in (0, 1], got {self.t0}")
        if self.range_map is not None:
            lo, hi = self.range_map
            if not lo < hi:
                raise DomainError(f"range map needs lo < hi, got ({lo}, {hi})")

    def transmission(self) -> np.ndarray:
        return transmission(self.p, self.distance_m)

    def airlight(self) -> np.ndarray:
        return airlight(self.p, self.depth_m)


def transmission(p: ChannelCoefficients, distance_m: float) -> np.ndarray:
    """Medium transmission per channel, t_c = exp(-p_c * d). Shape (3,)."""
    if distance_m < 0.0:
        raise DomainError(f"distance must be >= 0 m, got {distance_m}")
    return np.exp(-p.as_array() * float(distance_m))


def airlight(p: ChannelCoefficients, depth_m: float) -> np.ndarray:
    """Background light per channel at diving depth z, A_c = exp(-p_c * z)."""
    if depth_m < 0.0:
        raise DomainError(f"depth must be >= 0 m, got {depth_m}")
    return np.exp(-p.as_array() * float(depth_m))


def degrade(image, params: RestorationParams) -> LinearImage:
    """Apply the forward model: I = J*t + A*(1-t), clipped to [0, 1].

    For inputs in [0, 1] the mix is a convex combination of the scene value
    and the airlight, so the clip never actually activates.
    """
    data = _as_data(image)
    t = params.transmission()
    a = params.airlight()
    out = data * t + a * (1.0 - t)
    return LinearImage(np.clip(out, 0.0, 1.0), _bit_depth(image))


def restore(image, params: RestorationParams, *, with_stats: bool = False):
    """Invert the forward model: J = (I - A) / max(t, t0) + A.

    Pipeline: (1) optional pixel-range mapping on the 8-bit scale,
    (2) inversion with the t0 bound, (3) optional global contrast rescale;
    the result is clipped to [0, 1]. With ``with_stats=True`` also returns a
    dict of per-channel transmissions, which channels hit the t0 bound, and
    how many pixel values the final clip touched.
    """
    data = _as_data(image)
    if params.range_map is not None:
        lo, hi = params.range_map
        data = np.maximum(data * 255.0 - lo, 0.0) / (hi - lo)
    t = params.transmission()
    a = params.airlight()
    denom = np.maximum(t, params.t0)
    out = (data - a) / denom + a
    if params.rescale_output:
        out = _rescale_data(out)
    clipped = np.clip(out, 0.0, 1.0)
    result = LinearImage(clipped, _bit_depth(image))
    if not with_stats:
        return result
    stats = {
        "distance_m": params.distance_m,
        "depth_m": params.depth_m,
        "transmission": [float(x) for x in t],
        "airlight": [float(x) for x in a],
        "t0_clamped_channels": [c for c, tc in zip("rgb", t) if tc < params.t0],
        "clipped_values": int(np.count_nonzero(out != clipped)),
    }
    return result, stats


def _rescale_data(data: np.ndarray) -> np.ndarray:
    lo = data.min()
    hi = data.max()
    if hi == lo:
        return data
    return (data - lo) / (hi - lo)


def contrast_rescale(image) -> LinearImage:
    """Stretch intensities so the global minimum maps to 0 and maximum to 1.

    A single min/max over all three channels is used, which preserves hue
    ratios; constant images are returned unchanged.
    """
    data = _as_data(image)
    return LinearImage(_rescale_data(data), _bit_depth(image))


def map_pixel_range(image, lo: float = DEFAULT_RANGE_MAP[0], hi: float = DEFAULT_RANGE_MAP[1]) -> LinearImage:
    """Map 8-bit-scale intensities in [lo, hi] onto the full [0, 255] range.

    Values below ``lo`` clip to 0; values above ``hi`` clip to 1 (with the
    default hi=255 nothing sits above).
    """
    if not lo < hi:
        raise DomainError(f"range map needs lo < hi, got ({lo}, {hi})")
    data = _as_data(image)
    mapped = np.maximum(data * 255.0 - lo, 0.0) / (hi - lo)
    return LinearImage(np.clip(mapped, 0.0, 1.0), _bit_depth(image))
