"""Contrastive, adversarial and identity loss kernels as pure functions.

These are the forward-only numerical cores of an unpaired image translation
objective, defined over plain arrays so the arithmetic can be verified
without any network or autograd machinery.

* :func:`info_nce` - softmax cross-entropy of a query against one positive
  and N negatives under cosine similarity with temperature ``tau``
  (defaults: tau=0.07, and callers typically use 255 negatives).
* :func:`patch_nce` - the multi-layer patchwise sum of InfoNCE terms where
  the positive for an output-stack location is the same location of the
  input stack and the negatives are that layer's other locations.
* :func:`gan_loss_d` / :func:`gan_loss_g` - logistic adversarial losses
  over patch discriminator score maps.
* :func:`identity_l1` - mean absolute deviation between a translated image
  and its target.

Softmax logits are always stabilised by subtracting the row maximum; with
tau=0.07 a unit similarity already produces logits above 14, so the naive
form would overflow long before saturation.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import (
    DegenerateVectorError,
    DomainError,
    FeatureFormatError,
    InsufficientSamplesError,
    ShapeError,
)
from .imaging import _as_data

#: Default softmax temperature.
DEFAULT_TAU = 0.07
#: Score clamp keeping adversarial logs finite on saturated maps.
SCORE_EPS = 1e-7

#: Encoder tap points whose features feed the patchwise contrastive loss:
#: the raw RGB pixels, both downsampling convolutions, and the first and
#: fifth residual blocks.
ENCODER_TAP_NAMES = ("rgb_pixels", "downsample_1", "downsample_2", "residual_1", "residual_5")


@dataclass(frozen=True)
class FeatureStack:
    """Per-layer feature matrices extracted from one image.

    ``layers[l]`` has shape (S_l, C_l): S_l spatial locations, each a
    C_l-dimensional feature vector. ``names`` labels the tap points.
    """

    layers: tuple[np.ndarray, ...]
    names: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.layers) < 1:
            raise ShapeError("feature stack needs at least one layer")
        mats = []
        for i, layer in enumerate(self.layers):
            mat = np.asarray(layer, dtype=np.float64)
            if mat.ndim != 2:
                raise ShapeError(f"layer {i} must be an S x C matrix, got shape {mat.shape}")
            if not np.all(np.isfinite(mat)):
                raise DomainError(f"layer {i} contains non-finite features")
            mats.append(mat)
        names = tuple(self.names) if self.names else tuple(f"layer_{i}" for i in range(len(mats)))
        if len(names) != len(mats):
            raise ShapeError(f"{len(names)} names for {len(mats)} layers")
        object.__setattr__(self, "layers", tuple(mats))
        object.__setattr__(self, "names", names)

    @property
    def shape(self) -> tuple[tuple[int, int], ...]:
        return tuple(layer.shape for layer in self.layers)


def _unit_rows(mat: np.ndarray, what: str) -> np.ndarray:
    norms = np.linalg.norm(mat, axis=-1, keepdims=True)
    if np.any(norms == 0.0):
        raise DegenerateVectorError(f"{what} contains a zero-norm vector")
    return mat / norms


def _check_tau(tau: float) -> float:
    if tau <= 0.0:
        raise DomainError(f"temperature must be positive, got {tau}")
    return float(tau)


def info_nce(query, positive, negatives, tau: float = DEFAULT_TAU) -> float:
    """Contrastive cross-entropy of one query against positive and negatives.

    With cosine similarity ``sim`` the loss is

        -log( exp(sim(q, pos)/tau)
              / (exp(sim(q, pos)/tau) + sum_n exp(sim(q, neg_n)/tau)) )

    computed through a max-subtracted log-sum-exp.
    """
    tau = _check_tau(tau)
    q = np.asarray(query, dtype=np.float64).ravel()
    pos = np.asarray(positive, dtype=np.float64).ravel()
    neg = np.atleast_2d(np.asarray(negatives, dtype=np.float64))
    if pos.shape != q.shape or neg.shape[1] != q.size:
        raise ShapeError(
            f"dimension mismatch: query {q.shape}, positive {pos.shape}, negatives {neg.shape}"
        )
    qn = _unit_rows(q[None, :], "query")[0]
    pn = _unit_rows(pos[None, :], "positive")[0]
    nn = _unit_rows(neg, "negatives")
    logits = np.concatenate(([qn @ pn], nn @ qn)) / tau
    peak = logits.max()
    return float(np.log(np.exp(logits - peak).sum()) + peak - logits[0])


def patch_nce(input_stack: FeatureStack, output_stack: FeatureStack,
              tau: float = DEFAULT_TAU) -> float:
    """Patchwise multi-layer contrastive loss between two feature stacks.

    For every layer l and location s, the query is the output-stack feature
    at (l, s), the positive is the input-stack feature at the same (l, s),
    and the negatives are the input stack's other S_l - 1 locations of layer
    l. Terms are summed layer-major, location-minor.
    """
    tau = _check_tau(tau)
    if input_stack.shape != output_stack.shape:
        raise ShapeError(
            f"stack shapes differ: {input_stack.shape} vs {output_stack.shape}"
        )
    total = 0.0
    for src, dst in zip(input_stack.layers, output_stack.layers):
        s_l = src.shape[0]
        if s_l < 2:
            raise InsufficientSamplesError(
                "layer has a single location; no negatives available"
            )
        z = _unit_rows(src, "input stack")
        zh = _unit_rows(dst, "output stack")
        logits = (zh @ z.T) / tau
        peak = logits.max(axis=1, keepdims=True)
        lse = np.log(np.exp(logits - peak).sum(axis=1)) + peak[:, 0]
        total += float(np.sum(lse - np.diagonal(logits)))
    return total


def patch_nce_batch(stack_pairs: Iterable[tuple[FeatureStack, FeatureStack]],
                    tau: float = DEFAULT_TAU) -> float:
    """Mean patchwise loss over (input, output) stack pairs of a batch."""
    losses = [patch_nce(src, dst, tau) for src, dst in stack_pairs]
    if not losses:
        raise InsufficientSamplesError("empty batch")
    return float(np.mean(losses))


def _clamped(scores) -> np.ndarray:
    arr = np.asarray(scores, dtype=np.float64)
    if arr.size == 0:
        raise ShapeError("empty score map")
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError("discriminator scores must be probabilities in [0, 1]")
    return np.clip(arr, SCORE_EPS, 1.0 - SCORE_EPS)


def gan_objective_d(real_scores, fake_scores) -> float:
    """Discriminator objective: mean log D(real) + mean log(1 - D(fake)).

    This is the quantity the discriminator maximises; it peaks at 0 for
    perfect discrimination. Scores are clamped away from {0, 1} so the logs
    stay finite.
    """
    real = _clamped(real_scores)
    fake = _clamped(fake_scores)
    return float(np.mean(np.log(real)) + np.mean(np.log(1.0 - fake)))


def gan_loss_d(real_scores, fake_scores) -> float:
    """Discriminator loss to minimise: the negated objective."""
    return -gan_objective_d(real_scores, fake_scores)


def gan_loss_g(fake_scores, saturating: bool = False) -> float:
    """Generator adversarial loss over a fake-score map.

    Default is the non-saturating form -mean log D(fake); with
    ``saturating=True`` the literal mean log(1 - D(fake)) is returned (to be
    minimised), which flattens out once the discriminator wins.
    """
    fake = _clamped(fake_scores)
    if saturating:
        return float(np.mean(np.log(1.0 - fake)))
    return float(-np.mean(np.log(fake)))


def identity_l1(translated, target) -> float:
    """Mean absolute difference between a translated image and its target."""
    x = _as_data(translated)
    y = _as_data(target)
    if x.shape != y.shape:
        raise ShapeError(f"image shapes differ: {x.shape} vs {y.shape}")
    return float(np.mean(np.abs(x - y)))


@dataclass(frozen=True)
class ObjectiveWeights:
    """Weights for the combined objective; defaults (1, 1, 10)."""

    lambda_gan: float = 1.0
    lambda_nce: float = 1.0
    lambda_idt: float = 10.0

    def __post_init__(self):
        for name in ("lambda_gan", "lambda_nce", "lambda_idt"):
            if getattr(self, name) < 0.0:
                raise DomainError(f"{name} must be >= 0")


def full_objective(gan: float, nce: float, idt: float,
                   weights: ObjectiveWeights = ObjectiveWeights()) -> float:
    """Weighted sum of the three loss components."""
    return weights.lambda_gan * gan + weights.lambda_nce * nce + weights.lambda_idt * idt


# ---------------------------------------------------------------------------
# Feature-stack files
# ---------------------------------------------------------------------------

_LEN = struct.Struct("<I")


def save_feature_stack(path, stack: FeatureStack) -> None:
    """Write a stack as a length-prefixed JSON header plus float64 payload.

    Layout: u32 little-endian header length, UTF-8 JSON listing layer names
    and (locations, channels) per layer, then each layer's matrix row-major
    as little-endian float64, in layer order.
    """
    header = {
        "layers": [
            {"name": name, "locations": int(mat.shape[0]), "channels": int(mat.shape[1])}
            for name, mat in zip(stack.names, stack.layers)
        ]
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_LEN.pack(len(blob)))
        fh.write(blob)
        for mat in stack.layers:
            fh.write(np.ascontiguousarray(mat).astype("<f8").tobytes())


def load_feature_stack(path) -> FeatureStack:
    """Read a stack written by :func:`save_feature_stack`."""
    path = Path(path)
    with path.open("rb") as fh:
        head = fh.read(_LEN.size)
        if len(head) != _LEN.size:
            raise FeatureFormatError(f"{path}: truncated header length")
        (hlen,) = _LEN.unpack(head)
        blob = fh.read(hlen)
        if len(blob) != hlen:
            raise FeatureFormatError(f"{path}: truncated JSON header")
        try:
            header = json.loads(blob.decode("utf-8"))
            specs = [
                (str(ent["name"]), int(ent["locations"]), int(ent["channels"]))
                for ent in header["layers"]
            ]
        except (ValueError, KeyError, TypeError) as exc:
            raise FeatureFormatError(f"{path}: malformed JSON header ({exc})") from exc
        payload = fh.read()
    expected = sum(s * c for _, s, c in specs) * 8
    if len(payload) != expected:
        raise FeatureFormatError(f"{path}: payload is {len(payload)} bytes, expected {expected}")
    layers = []
    offset = 0
    for _, s, c in specs:
        size = s * c * 8
        layers.append(
            np.frombuffer(payload[offset : offset + size], dtype="<f8").reshape(s, c).astype(np.float64)
        )
        offset += size
    return FeatureStack(tuple(layers), tuple(name for name, _, _ in specs))
