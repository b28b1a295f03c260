"""Synthetic sequence + sidecar fixtures with self-consistent codec info.

Used by tests, benchmarks, and the demo scripts; no real codec involved.
"""

from __future__ import annotations

import numpy as np

from .sidecar import MotionField, ResidualMap, SidecarFrame, SidecarStream

__all__ = [
    "smooth_texture",
    "clustered_mask_values",
    "pan_sequence",
    "repeated_sequence",
    "rated_sequence",
]


def smooth_texture(height: int, width: int, seed: int, blur: int = 2) -> np.ndarray:
    """Box-blurred random RGB texture (3, H, W) in [0, 1]."""
    rng = np.random.default_rng(seed)
    img = rng.random((3, height, width), dtype=np.float64)
    for _ in range(blur):
        img = (
            img
            + np.roll(img, 1, axis=1)
            + np.roll(img, -1, axis=1)
            + np.roll(img, 1, axis=2)
            + np.roll(img, -1, axis=2)
        ) / 5.0
    lo, hi = img.min(), img.max()
    return ((img - lo) / (hi - lo)).astype(np.float32)


def clustered_mask_values(height: int, width: int, n_active: int) -> np.ndarray:
    """(H, W) uint8 0/1 map with exactly ``n_active`` ones packed into a compact block."""
    if not 0 <= n_active <= height * width:
        raise ValueError(f"n_active {n_active} out of range for {height}x{width}")
    values = np.zeros(height * width, dtype=np.uint8)
    if n_active:
        # near-square block, widened when the square would overflow the rows
        side = max(int(np.ceil(np.sqrt(n_active))), -(-n_active // height))
        side = min(side, width)
        block = np.zeros((height, width), dtype=np.uint8)
        keep = np.arange(n_active)
        block[keep // side, keep % side] = 1
        return block
    return values.reshape(height, width)


def _zero_motion(height: int, width: int) -> MotionField:
    return MotionField(np.zeros((height, width, 2), dtype=np.int16))


def _zero_residual(height: int, width: int) -> ResidualMap:
    return ResidualMap(np.zeros((height, width), dtype=np.int16))


def pan_sequence(height: int, width: int, n_frames: int, seed: int, shift: int = 1):
    """Horizontal camera pan over a texture: content moves left ``shift`` px/frame.

    Every P-frame pixel references (y, x + shift) in the previous frame, so the
    sidecar carries uniform MV (0, 4*shift) quarter-pel and all-zero residuals.
    Returns (frames, stream).
    """
    base = smooth_texture(height, width + shift * n_frames, seed)
    frames = [np.ascontiguousarray(base[:, :, t * shift : t * shift + width]) for t in range(n_frames)]
    mv = np.zeros((height, width, 2), dtype=np.int16)
    mv[:, :, 1] = 4 * shift
    recs = [SidecarFrame("I", _zero_motion(height, width), _zero_residual(height, width))]
    for _ in range(1, n_frames):
        recs.append(SidecarFrame("P", MotionField(mv.copy()), _zero_residual(height, width)))
    return frames, SidecarStream(width=width, height=height, frames=tuple(recs))


def repeated_sequence(height: int, width: int, n_frames: int, seed: int):
    """One texture repeated: zero MVs, zero residuals; the full-skip fixture."""
    frame = smooth_texture(height, width, seed)
    frames = [frame.copy() for _ in range(n_frames)]
    recs = [SidecarFrame("I", _zero_motion(height, width), _zero_residual(height, width))]
    for _ in range(1, n_frames):
        recs.append(SidecarFrame("P", _zero_motion(height, width), _zero_residual(height, width)))
    return frames, SidecarStream(width=width, height=height, frames=tuple(recs))


def rated_sequence(height: int, width: int, n_p_frames: int, active_count: int, seed: int):
    """I-frame plus P-frames whose residuals have exactly ``active_count`` nonzero pixels.

    The nonzero pixels sit in one compact block so sparse execution stays local.
    Returns (frames, stream).
    """
    frames = [smooth_texture(height, width, seed + t) for t in range(n_p_frames + 1)]
    recs = [SidecarFrame("I", _zero_motion(height, width), _zero_residual(height, width))]
    block = clustered_mask_values(height, width, active_count).astype(np.int16)
    for _ in range(n_p_frames):
        recs.append(SidecarFrame("P", _zero_motion(height, width), ResidualMap(block * 7)))
    return frames, SidecarStream(width=width, height=height, frames=tuple(recs))
