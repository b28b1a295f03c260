"""CIAF sidecar v1 writer.

Layout (all integers little-endian, no padding):

    header   magic b"CIAF" | u16 version=1 | u16 width | u16 height | u32 count
    frame    u8 type (0 intra, 1 predicted)
             (H, W, 2) int16 motion, row-major, vertical component first
             (H, W)    int16 residual, row-major

This is an independent implementation of the byte format the inference
engine parses; the two meet only at the bytes.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"CIAF"
VERSION = 1
HEADER = struct.Struct("<4sHHHI")
FRAME_INTRA = 0
FRAME_PREDICTED = 1

DIM_MAX = 0xFFFF


@dataclass(frozen=True)
class SidecarFrame:
    """One frame's codec information, already on the pixel grid.

    ``motion`` is (H, W, 2) int16 quarter-pel, (dy, dx) per pixel;
    ``residual`` is (H, W) int16. Intra frames carry zeros for both by
    convention.
    """

    frame_type: int
    motion: np.ndarray
    residual: np.ndarray

    def __post_init__(self):
        if self.frame_type not in (FRAME_INTRA, FRAME_PREDICTED):
            raise ValueError(f"frame_type must be 0 or 1, got {self.frame_type}")
        if self.motion.dtype != np.int16 or self.residual.dtype != np.int16:
            raise ValueError("motion and residual must be int16")
        if self.motion.ndim != 3 or self.motion.shape[2] != 2:
            raise ValueError(f"motion must be (H, W, 2), got {self.motion.shape}")
        if self.residual.shape != self.motion.shape[:2]:
            raise ValueError(
                f"residual {self.residual.shape} does not match "
                f"motion grid {self.motion.shape[:2]}"
            )


def serialize(frames: list[SidecarFrame]) -> bytes:
    """Encode ``frames`` as one CIAF v1 byte string."""
    if not frames:
        raise ValueError("a sidecar needs at least one frame")
    if frames[0].frame_type != FRAME_INTRA:
        raise ValueError("the first frame must be intra")
    height, width = frames[0].residual.shape
    if not (1 <= width <= DIM_MAX and 1 <= height <= DIM_MAX):
        raise ValueError(f"dims {width}x{height} outside the u16 header range")
    for i, f in enumerate(frames):
        if f.residual.shape != (height, width):
            raise ValueError(
                f"frame {i} is {f.residual.shape}, stream is {(height, width)}"
            )
    out = [HEADER.pack(MAGIC, VERSION, width, height, len(frames))]
    for f in frames:
        out.append(bytes([f.frame_type]))
        out.append(f.motion.astype("<i2").tobytes())
        out.append(f.residual.astype("<i2").tobytes())
    return b"".join(out)


def write_sidecar(path, frames: list[SidecarFrame]) -> int:
    """Serialize ``frames`` to ``path``; returns the byte count written."""
    blob = serialize(frames)
    Path(path).write_bytes(blob)
    return len(blob)
