"""Dense tensor primitives: conv, activation, resampling, pixel rearrangement.

Feature tensors are plain numpy arrays of shape (channels, height, width) in
float32. All operations are pure: inputs are never mutated and results are
freshly allocated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ConvWeights",
    "feature_tensor",
    "conv2d",
    "leaky_relu",
    "pixel_shuffle",
    "pixel_unshuffle",
    "bilinear_upsample",
]


def feature_tensor(data, channels: int | None = None) -> np.ndarray:
    """Coerce ``data`` to a contiguous (C, H, W) float32 array and validate it.

    Raises ValueError on wrong rank, empty extents, channel mismatch, or
    non-finite elements.
    """
    arr = np.ascontiguousarray(data, dtype=np.float32)
    if arr.ndim != 3:
        raise ValueError(f"feature tensor must be (C, H, W), got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"feature tensor has an empty extent: {arr.shape}")
    if channels is not None and arr.shape[0] != channels:
        raise ValueError(f"expected {channels} channels, got {arr.shape[0]}")
    if not np.isfinite(arr).all():
        raise ValueError("feature tensor contains NaN or Inf")
    return arr


@dataclass(frozen=True)
class ConvWeights:
    """Square-kernel conv filter bank: weight (out, in, k, k) plus bias (out,)."""

    weight: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        w = np.ascontiguousarray(self.weight, dtype=np.float32)
        b = np.ascontiguousarray(self.bias, dtype=np.float32)
        if w.ndim != 4 or w.shape[2] != w.shape[3]:
            raise ValueError(f"weight must be (out, in, k, k) with square kernel, got {w.shape}")
        if b.shape != (w.shape[0],):
            raise ValueError(f"bias must have shape ({w.shape[0]},), got {b.shape}")
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "bias", b)

    @property
    def out_channels(self) -> int:
        return self.weight.shape[0]

    @property
    def in_channels(self) -> int:
        return self.weight.shape[1]

    @property
    def kernel_size(self) -> int:
        return self.weight.shape[2]


def conv2d(x: np.ndarray, w: ConvWeights, padding: int) -> np.ndarray:
    """Cross-correlate ``x`` (C, H, W) with ``w``, zero-padded by ``padding``.

    Output shape is (out_channels, H + 2p - k + 1, W + 2p - k + 1).
    Accumulation runs in float64 so that gathered and dense evaluation orders
    round to identical float32 results.
    """
    x = feature_tensor(x, channels=w.in_channels)
    k = w.kernel_size
    if padding < 0:
        raise ValueError("padding must be >= 0")
    ho = x.shape[1] + 2 * padding - k + 1
    wo = x.shape[2] + 2 * padding - k + 1
    if ho < 1 or wo < 1:
        raise ValueError(f"kernel {k} exceeds padded input {x.shape[1:]} + {padding}")
    padded = np.pad(x, ((0, 0), (padding, padding), (padding, padding))).astype(np.float64)
    # windows: (C, Ho, Wo, k, k)
    windows = np.lib.stride_tricks.sliding_window_view(padded, (k, k), axis=(1, 2))
    out = np.tensordot(w.weight.astype(np.float64), windows, axes=([1, 2, 3], [0, 3, 4]))
    out += w.bias.astype(np.float64)[:, None, None]
    return out.astype(np.float32)


def leaky_relu(x: np.ndarray, slope: float) -> np.ndarray:
    """Elementwise max(x, slope * x) for slope in [0, 1]."""
    if slope < 0:
        raise ValueError("slope must be >= 0")
    x = feature_tensor(x)
    return np.where(x >= 0, x, np.float32(slope) * x).astype(np.float32)


def pixel_shuffle(x: np.ndarray, factor: int) -> np.ndarray:
    """Depth-to-space rearrangement: (C*f*f, H, W) -> (C, H*f, W*f).

    Element order is row-major: out[c, y*f + dy, x*f + dx] = in[c*f*f + dy*f + dx, y, x].
    """
    x = feature_tensor(x)
    if factor < 1:
        raise ValueError("factor must be >= 1")
    c, h, w = x.shape
    if c % (factor * factor) != 0:
        raise ValueError(f"channels {c} not divisible by factor^2 = {factor * factor}")
    co = c // (factor * factor)
    out = x.reshape(co, factor, factor, h, w)
    out = out.transpose(0, 3, 1, 4, 2)  # (co, h, f, w, f)
    return np.ascontiguousarray(out.reshape(co, h * factor, w * factor))


def pixel_unshuffle(x: np.ndarray, factor: int) -> np.ndarray:
    """Space-to-depth inverse of :func:`pixel_shuffle`."""
    x = feature_tensor(x)
    if factor < 1:
        raise ValueError("factor must be >= 1")
    c, h, w = x.shape
    if h % factor != 0 or w % factor != 0:
        raise ValueError(f"spatial dims {(h, w)} not divisible by factor {factor}")
    out = x.reshape(c, h // factor, factor, w // factor, factor)
    out = out.transpose(0, 2, 4, 1, 3)  # (c, f, f, h/f, w/f)
    return np.ascontiguousarray(out.reshape(c * factor * factor, h // factor, w // factor))


def bilinear_upsample(x: np.ndarray, factor: int) -> np.ndarray:
    """Bilinear enlargement by an integer factor, align-corners-false convention.

    Output pixel (Y, X) samples the source at ((Y + 0.5)/f - 0.5, (X + 0.5)/f - 0.5)
    with edge clamping.
    """
    x = feature_tensor(x)
    if factor < 1:
        raise ValueError("factor must be >= 1")
    if factor == 1:
        return x.copy()
    c, h, w = x.shape
    sy = (np.arange(h * factor, dtype=np.float64) + 0.5) / factor - 0.5
    sx = (np.arange(w * factor, dtype=np.float64) + 0.5) / factor - 0.5
    sy = np.clip(sy, 0.0, h - 1.0)
    sx = np.clip(sx, 0.0, w - 1.0)
    y0 = np.floor(sy).astype(np.intp)
    x0 = np.floor(sx).astype(np.intp)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    wy = (sy - y0)[None, :, None]
    wx = (sx - x0)[None, None, :]
    xd = x.astype(np.float64)
    top = xd[:, y0, :][:, :, x0] * (1 - wx) + xd[:, y0, :][:, :, x1] * wx
    bot = xd[:, y1, :][:, :, x0] * (1 - wx) + xd[:, y1, :][:, :, x1] * wx
    return (top * (1 - wy) + bot * wy).astype(np.float32)
