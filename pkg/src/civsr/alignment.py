"""Motion-field warping of images and feature maps.

Sign convention: the motion value at output pixel (y, x) points to the
location in the *source* (previous frame) whose content lands at (y, x),
i.e. output[c, y, x] samples source[c] at (y + dy, x + dx). Sample
coordinates are clamped to the image border, so warping never injects
zeros into recurrent state:

        source                      output
    +-------------+             +-------------+
    |     (y+dy,  |   bilinear  |             |
    |      x+dx) <---sample-----+-- (y, x)    |
    |             |             |             |
    +-------------+             +-------------+
"""

from __future__ import annotations

import numpy as np

from .sidecar import MotionField, mv_to_pixels
from .tensor_core import feature_tensor

__all__ = ["warp", "build_motion_tensor"]


def warp(source: np.ndarray, motion: np.ndarray) -> np.ndarray:
    """Bilinear-warp ``source`` (C, H, W) by ``motion`` (2, H, W) pixel offsets.

    Channel 0 of motion is the vertical offset, channel 1 horizontal. Zero
    motion reproduces the source exactly.
    """
    source = feature_tensor(source)
    motion = feature_tensor(motion, channels=2)
    _, h, w = source.shape
    if motion.shape[1:] != (h, w):
        raise ValueError(f"motion dims {motion.shape[1:]} != source dims {(h, w)}")

    gy, gx = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij")
    sy = np.clip(gy + motion[0].astype(np.float64), 0.0, h - 1.0)
    sx = np.clip(gx + motion[1].astype(np.float64), 0.0, w - 1.0)
    y0 = np.floor(sy).astype(np.intp)
    x0 = np.floor(sx).astype(np.intp)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    wy = sy - y0
    wx = sx - x0

    src = source.astype(np.float64)
    top = src[:, y0, x0] * (1 - wx) + src[:, y0, x1] * wx
    bot = src[:, y1, x0] * (1 - wx) + src[:, y1, x1] * wx
    return (top * (1 - wy) + bot * wy).astype(np.float32)


def build_motion_tensor(m: MotionField) -> np.ndarray:
    """Pixel-unit motion tensor (2, H, W) from a quarter-pel MotionField."""
    return mv_to_pixels(m)
