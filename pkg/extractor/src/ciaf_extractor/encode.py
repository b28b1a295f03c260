"""Deterministic H.264 encoding of grayscale frame stacks.

All knobs that would make output machine- or run-dependent are pinned:
single thread, single reference frame, no B-frames, no scene-cut
keyframes. Encoding the same frames twice yields byte-identical files.
"""

from __future__ import annotations

import numpy as np

from . import _codec

DEFAULT_CRF = 23
CRF_MIN = 0
CRF_MAX = 51
DEFAULT_GOP = 250
DEFAULT_FPS = 25

# Settings the bridge hard-codes, recorded in every summary so an archived
# file can be traced back to the exact flags that produced it.
PINNED_FLAGS = {
    "codec": "libx264",
    "pix_fmt": "yuv420p",
    "preset": "medium",
    "max_b_frames": 0,
    "refs": 1,
    "scene_cut": 0,
    "threads": 1,
}


def encoder_settings(crf: int, gop: int, fps: int) -> dict:
    """Full flag set for one encode, pinned and per-call knobs together."""
    return {**PINNED_FLAGS, "crf": crf, "gop": gop, "fps": fps}


def encode_clip(
    frames: np.ndarray,
    path,
    crf: int = DEFAULT_CRF,
    gop: int = DEFAULT_GOP,
    fps: int = DEFAULT_FPS,
) -> dict:
    """Encode a (T, H, W) uint8 stack to ``path``; returns the settings used.

    Raises ValueError for an out-of-range CRF or frame dimensions the
    4:2:0 chroma grid cannot represent (odd height or width).
    """
    frames = np.asarray(frames)
    if frames.ndim != 3:
        raise ValueError(f"frames must be (T, H, W), got shape {frames.shape}")
    if frames.dtype != np.uint8:
        raise ValueError(f"frames must be uint8, got {frames.dtype}")
    if not CRF_MIN <= crf <= CRF_MAX:
        raise ValueError(f"crf must be in [{CRF_MIN}, {CRF_MAX}], got {crf}")
    t, h, w = frames.shape
    if t < 1:
        raise ValueError("need at least one frame")
    if h % 2 or w % 2:
        raise ValueError(f"frame dims must be even for yuv420p, got {h}x{w}")
    _codec.encode_gray(np.ascontiguousarray(frames), str(path), crf, gop, fps)
    return encoder_settings(crf, gop, fps)
