"""Slow reference implementations for equivalence verification.

Deliberately written as scalar loops with none of the vectorized machinery
they check, so `civsr verify` compares two independent routes.
"""

from __future__ import annotations

import numpy as np

from .tensor_core import ConvWeights

__all__ = ["conv2d_reference", "warp_reference"]


def conv2d_reference(x: np.ndarray, w: ConvWeights, padding: int) -> np.ndarray:
    """Six nested loops of cross-correlation with zero padding, float64 accumulate."""
    x = np.asarray(x, dtype=np.float64)
    weight = np.asarray(w.weight, dtype=np.float64)
    bias = np.asarray(w.bias, dtype=np.float64)
    cin, h, wd = x.shape
    cout, _, k, _ = weight.shape
    ho = h + 2 * padding - k + 1
    wo = wd + 2 * padding - k + 1
    out = np.zeros((cout, ho, wo), dtype=np.float64)
    for oc in range(cout):
        for oy in range(ho):
            for ox in range(wo):
                acc = bias[oc]
                for ic in range(cin):
                    for ky in range(k):
                        for kx in range(k):
                            iy = oy + ky - padding
                            ix = ox + kx - padding
                            if 0 <= iy < h and 0 <= ix < wd:
                                acc += weight[oc, ic, ky, kx] * x[ic, iy, ix]
                out[oc, oy, ox] = acc
    return out


def warp_reference(source: np.ndarray, motion: np.ndarray) -> np.ndarray:
    """Per-pixel scalar bilinear sampling with border clamp."""
    src = np.asarray(source, dtype=np.float64)
    mot = np.asarray(motion, dtype=np.float64)
    c, h, w = src.shape
    out = np.zeros_like(src)
    for y in range(h):
        for x in range(w):
            sy = min(max(y + mot[0, y, x], 0.0), h - 1.0)
            sx = min(max(x + mot[1, y, x], 0.0), w - 1.0)
            y0, x0 = int(np.floor(sy)), int(np.floor(sx))
            y1, x1 = min(y0 + 1, h - 1), min(x0 + 1, w - 1)
            fy, fx = sy - y0, sx - x0
            for ch in range(c):
                top = src[ch, y0, x0] * (1 - fx) + src[ch, y0, x1] * fx
                bot = src[ch, y1, x0] * (1 - fx) + src[ch, y1, x1] * fx
                out[ch, y, x] = top * (1 - fy) + bot * fy
    return out
