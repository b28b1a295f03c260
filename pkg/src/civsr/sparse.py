"""Residual-informed sparse execution.

Masks come from two routes: at test time a hard mask marks every pixel whose
codec residual is nonzero (I-frames count as fully changed); at train time a
soft mask is drawn with the Gumbel-softmax relaxation from two-channel
logits. Sparse resblocks evaluate their residual branch only at active
pixels and substitute MV-warped cached features from the previous time step
everywhere else. Head/tail convs of the surrounding network stay dense.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sidecar import ResidualMap
from .tensor_core import ConvWeights, conv2d, feature_tensor, leaky_relu

__all__ = [
    "SpatialMask",
    "AnnealSchedule",
    "LayerCache",
    "residual_mask",
    "gumbel_mask",
    "gumbel_mask_grad",
    "sample_gumbel",
    "sparsity_loss",
    "lambda_at",
    "tau_at",
    "dense_resblock",
    "sparse_resblock",
    "count_flops",
    "sparse_rate",
    "mask_cnn_forward",
]

LEAKY_SLOPE = 0.1  # resblock / mask-CNN activation slope


@dataclass(frozen=True, eq=False)
class SpatialMask:
    """Per-pixel activity map (H, W): soft values in [0, 1] or hard {0, 1}."""

    values: np.ndarray
    mode: str  # "soft" | "hard"

    def __post_init__(self):
        arr = np.ascontiguousarray(self.values, dtype=np.float32)
        if arr.ndim != 2:
            raise ValueError(f"mask must be (H, W), got {arr.shape}")
        if self.mode not in ("soft", "hard"):
            raise ValueError(f"mode must be 'soft' or 'hard', got {self.mode!r}")
        if arr.min(initial=0.0) < 0.0 or arr.max(initial=0.0) > 1.0:
            raise ValueError("mask values must lie in [0, 1]")
        if self.mode == "hard" and not np.isin(arr, (0.0, 1.0)).all():
            raise ValueError("hard mask may contain only 0 and 1")
        object.__setattr__(self, "values", arr)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    def active_count(self) -> int:
        if self.mode != "hard":
            raise ValueError("active_count defined for hard masks only")
        return int(np.count_nonzero(self.values))


@dataclass(frozen=True)
class AnnealSchedule:
    """Sparsity-weight and temperature annealing state at epoch ``t``."""

    t: int
    T_epoch: int = 20
    T_temp: int = 40
    lambda0: float = 0.004

    def __post_init__(self):
        if self.t < 0:
            raise ValueError("t must be >= 0")
        if self.T_epoch <= 0 or self.T_temp <= 0:
            raise ValueError("T_epoch and T_temp must be positive")
        if self.lambda0 <= 0:
            raise ValueError("lambda0 must be positive")


@dataclass(frozen=True)
class LayerCache:
    """Previous-step output of each sparse resblock, all sharing one shape."""

    layers: tuple

    def __post_init__(self):
        layers = tuple(feature_tensor(t) for t in self.layers)
        if not layers:
            raise ValueError("cache must hold at least one layer")
        if any(t.shape != layers[0].shape for t in layers):
            raise ValueError("cache layers must share dims")
        object.__setattr__(self, "layers", layers)

    def __len__(self) -> int:
        return len(self.layers)


def residual_mask(r: ResidualMap, frame_type: str) -> SpatialMask:
    """Test-time hard mask: active where the residual is nonzero.

    I-frames have no temporal prediction to reuse, so they mask fully active.
    """
    if frame_type == "I":
        values = np.ones((r.height, r.width), dtype=np.float32)
    elif frame_type == "P":
        values = (r.res != 0).astype(np.float32)
    else:
        raise ValueError(f"frame_type must be 'I' or 'P', got {frame_type!r}")
    return SpatialMask(values=values, mode="hard")


def gumbel_mask(logits: np.ndarray, tau: float, noise: np.ndarray) -> SpatialMask:
    """Soft train-time mask: per-pixel two-way softmax of (logits + noise) / tau.

    ``logits`` and ``noise`` are (2, H, W); channel 0 is the active channel
    whose softmax probability becomes the mask value. Computed via the
    numerically stable pairwise form, so extreme logit/temperature ratios
    saturate instead of overflowing.
    """
    if tau <= 0:
        raise ValueError("tau must be > 0")
    logits = feature_tensor(logits, channels=2)
    noise = feature_tensor(noise, channels=2)
    if logits.shape != noise.shape:
        raise ValueError(f"noise shape {noise.shape} != logits shape {logits.shape}")
    z = (logits.astype(np.float64) + noise.astype(np.float64)) / float(tau)
    m = np.maximum(z[0], z[1])
    e0 = np.exp(z[0] - m)
    e1 = np.exp(z[1] - m)
    return SpatialMask(values=(e0 / (e0 + e1)).astype(np.float32), mode="soft")


def gumbel_mask_grad(logits: np.ndarray, tau: float, noise: np.ndarray) -> np.ndarray:
    """Closed-form Jacobian diagonal of the soft mask w.r.t. its own-pixel logits.

    Returns (2, H, W): entry [c, y, x] is dM[y, x] / dlogits[c, y, x]; cross-pixel
    derivatives are identically zero.
    """
    m = gumbel_mask(logits, tau, noise).values.astype(np.float64)
    g = m * (1.0 - m) / float(tau)
    return np.stack([g, -g]).astype(np.float32)


def sample_gumbel(shape, rng: np.random.Generator) -> np.ndarray:
    """Gumbel(0, 1) samples via inverse CDF -log(-log(u)), u uniform in (0, 1)."""
    u = rng.random(shape, dtype=np.float64)
    tiny = np.finfo(np.float64).tiny
    u = np.clip(u, tiny, 1.0 - np.finfo(np.float64).epsneg)
    return (-np.log(-np.log(u))).astype(np.float32)


def sparsity_loss(m: SpatialMask) -> float:
    """Mean mask value: the regularizer that pushes masks toward sparsity."""
    return float(np.mean(m.values.astype(np.float64)))


def lambda_at(s: AnnealSchedule) -> float:
    """Regularizer weight: ramps linearly to lambda0 over T_epoch epochs."""
    return min(s.t / s.T_epoch, 1.0) * s.lambda0


def tau_at(s: AnnealSchedule) -> float:
    """Softmax temperature: decays linearly from 1 and clamps at 0.5."""
    return max(1.0 - s.t / s.T_temp, 0.5)


def dense_resblock(x: np.ndarray, w1: ConvWeights, w2: ConvWeights) -> np.ndarray:
    """Residual block evaluated at every pixel: x + conv2(act(conv1(x)))."""
    branch = conv2d(leaky_relu(conv2d(x, w1, padding=w1.kernel_size // 2), LEAKY_SLOPE), w2, padding=w2.kernel_size // 2)
    return (x + branch).astype(np.float32)


def _gather_conv(padded64: np.ndarray, w: ConvWeights, ys: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Evaluate a padded conv at selected pixel coords only; returns (out_c, n)."""
    k = w.kernel_size
    off = np.arange(k)
    # patches: (in_c, n, k, k) gathered around each coordinate
    patches = padded64[:, (ys[:, None, None] + off[None, :, None]), (xs[:, None, None] + off[None, None, :])]
    cols = patches.transpose(1, 0, 2, 3).reshape(len(ys), -1)
    mat = w.weight.astype(np.float64).reshape(w.out_channels, -1)
    return mat @ cols.T + w.bias.astype(np.float64)[:, None]


def sparse_resblock(
    x: np.ndarray,
    w1: ConvWeights,
    w2: ConvWeights,
    mask: SpatialMask,
    cached_warped: np.ndarray,
) -> np.ndarray:
    """Resblock computed only at active mask pixels; inactive pixels replay cache.

    Active pixels get x + conv2(act(conv1(x))) with convolutions reading the
    full dense input neighborhood, so a full mask reproduces
    :func:`dense_resblock` bit-for-bit after float32 rounding. Execution
    gathers the active coordinates (plus the one-pixel halo conv2 needs from
    conv1), multiplies, and scatters back.
    """
    x = feature_tensor(x)
    cached_warped = feature_tensor(cached_warped)
    if mask.mode != "hard":
        raise ValueError("sparse_resblock requires a hard mask")
    _, h, w = x.shape
    if mask.values.shape != (h, w):
        raise ValueError(f"mask dims {mask.values.shape} != input dims {(h, w)}")
    if cached_warped.shape != x.shape:
        raise ValueError(f"cache dims {cached_warped.shape} != input dims {x.shape}")
    if w2.out_channels != x.shape[0]:
        raise ValueError(f"conv2 out_channels {w2.out_channels} != input channels {x.shape[0]}")

    active = mask.values != 0
    if not active.any():
        return cached_warped.copy()

    k1, k2 = w1.kernel_size, w2.kernel_size
    p1, p2 = k1 // 2, k2 // 2

    # conv1 is needed wherever conv2's kernel footprint around an active pixel lands
    halo = active
    if p2 > 0:
        halo = np.zeros_like(active)
        for dy in range(-p2, p2 + 1):
            for dx in range(-p2, p2 + 1):
                ys0, ys1 = max(dy, 0), h + min(dy, 0)
                xs0, xs1 = max(dx, 0), w + min(dx, 0)
                halo[ys0:ys1, xs0:xs1] |= active[ys0 - dy : ys1 - dy, xs0 - dx : xs1 - dx]

    hy, hx = np.nonzero(halo)
    padded_in = np.pad(x, ((0, 0), (p1, p1), (p1, p1))).astype(np.float64)
    # round to float32 between the convs, matching the dense path's dtype walk
    mid_vals = _gather_conv(padded_in, w1, hy, hx).astype(np.float32)  # (mid_c, n_halo)
    mid_vals = np.where(mid_vals >= 0, mid_vals, np.float32(LEAKY_SLOPE) * mid_vals)

    # scatter activations onto a zero canvas; conv2 at active pixels only ever
    # reads inside the halo, and the canvas padding supplies the image border
    canvas = np.zeros((w1.out_channels, h + 2 * p2, w + 2 * p2), dtype=np.float64)
    canvas[:, hy + p2, hx + p2] = mid_vals
    ay, ax = np.nonzero(active)
    branch = _gather_conv(canvas, w2, ay, ax).astype(np.float32)  # (out_c, n_active)

    out = cached_warped.copy()
    out[:, ay, ax] = x[:, ay, ax] + branch
    return out


def count_flops(
    in_channels: int,
    out_channels: int,
    kernel_size: int,
    height: int,
    width: int,
    mask: SpatialMask | None = None,
) -> int:
    """MAC count of one conv layer: k^2 * C_in * C_out * (active pixels or H*W)."""
    if min(in_channels, out_channels, kernel_size, height, width) < 1:
        raise ValueError("layer dims must be positive")
    if mask is None:
        pixels = height * width
    else:
        if (mask.height, mask.width) != (height, width):
            raise ValueError(f"mask dims {(mask.height, mask.width)} != layer dims {(height, width)}")
        pixels = mask.active_count()
    return kernel_size * kernel_size * in_channels * out_channels * pixels


def sparse_rate(m: SpatialMask) -> float:
    """Fraction of pixels skipped: zero-valued mask entries over all pixels."""
    return float(np.count_nonzero(m.values == 0) / m.values.size)


def mask_cnn_forward(
    frame: np.ndarray,
    warped_features: np.ndarray,
    w1: ConvWeights,
    w2: ConvWeights,
    w3: ConvWeights,
) -> np.ndarray:
    """Light 3-conv mask predictor over concat(frame, warped features) -> (2, H, W) logits."""
    frame = feature_tensor(frame)
    warped_features = feature_tensor(warped_features)
    if frame.shape[1:] != warped_features.shape[1:]:
        raise ValueError(f"frame dims {frame.shape[1:]} != feature dims {warped_features.shape[1:]}")
    x = np.concatenate([frame, warped_features], axis=0)
    x = leaky_relu(conv2d(x, w1, padding=w1.kernel_size // 2), LEAKY_SLOPE)
    x = leaky_relu(conv2d(x, w2, padding=w2.kernel_size // 2), LEAKY_SLOPE)
    logits = conv2d(x, w3, padding=w3.kernel_size // 2)
    if logits.shape[0] != 2:
        raise ValueError(f"mask CNN must emit 2 channels, got {logits.shape[0]}")
    return logits
