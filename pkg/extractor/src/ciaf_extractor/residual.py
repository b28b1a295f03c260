"""Luma prediction residuals from decoded frame pairs.

The residual plane is defined in the pixel domain: warp the previous
decoded luma by the dense motion field, round to integers, subtract from
the current decoded luma. By construction, ``predict + residual``
reproduces the current frame exactly, which is the invariant consumers
rely on. Blocks the encoder predicted from older references or with
weighted prediction simply show up as nonzero residual.
"""

from __future__ import annotations

import numpy as np

from .fields import QPEL_PER_PIXEL


def warp_luma(reference: np.ndarray, field: np.ndarray) -> np.ndarray:
    """Bilinearly sample ``reference`` at each pixel's motion target.

    For output pixel (y, x) the sample position is
    ``(y + dy / 4, x + dx / 4)`` with (dy, dx) taken from ``field`` in
    quarter-pel units. Sample coordinates clamp to the frame border,
    mirroring the edge extension decoders apply to vectors that point
    outside the picture.

    Returns a float64 plane of the same shape as ``reference``.
    """
    ref = np.asarray(reference, dtype=np.float64)
    if ref.ndim != 2:
        raise ValueError(f"reference must be (H, W), got {ref.shape}")
    h, w = ref.shape
    fld = np.asarray(field)
    if fld.shape != (h, w, 2):
        raise ValueError(f"field must be {(h, w, 2)}, got {fld.shape}")

    yy, xx = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    sy = yy + fld[:, :, 0].astype(np.float64) / QPEL_PER_PIXEL
    sx = xx + fld[:, :, 1].astype(np.float64) / QPEL_PER_PIXEL
    sy = np.clip(sy, 0.0, h - 1.0)
    sx = np.clip(sx, 0.0, w - 1.0)

    y0 = np.floor(sy).astype(np.int64)
    x0 = np.floor(sx).astype(np.int64)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    wy = sy - y0
    wx = sx - x0

    top = ref[y0, x0] * (1.0 - wx) + ref[y0, x1] * wx
    bottom = ref[y1, x0] * (1.0 - wx) + ref[y1, x1] * wx
    return top * (1.0 - wy) + bottom * wy


def prediction_residual(
    current: np.ndarray, reference: np.ndarray, field: np.ndarray
) -> np.ndarray:
    """Integer residual between ``current`` and the warped ``reference``.

    The warped prediction is rounded to the nearest integer (ties to
    even) before subtraction, so the residual is exact integer data:
    ``current == round(warp(reference, field)) + residual`` pixel for
    pixel. Output is int16; luma in [0, 255] keeps the difference well
    inside range.
    """
    cur = np.asarray(current)
    if cur.ndim != 2:
        raise ValueError(f"current must be (H, W), got {cur.shape}")
    predicted = np.rint(warp_luma(reference, field)).astype(np.int64)
    resid = cur.astype(np.int64) - predicted
    lo, hi = np.iinfo(np.int16).min, np.iinfo(np.int16).max
    if resid.min() < lo or resid.max() > hi:
        raise ValueError("residual exceeds int16 range; inputs are not 8-bit luma")
    return resid.astype(np.int16)
