"""PNG frame-folder IO: 8-bit RGB on disk, float32 [0, 1] tensors in memory."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .tensor_core import feature_tensor

__all__ = ["load_frames", "save_frame", "save_mask", "to_uint8"]


def load_frames(directory) -> tuple[list[str], list[np.ndarray]]:
    """Load every .png in ``directory`` (sorted by name) as (3, H, W) float32 in [0, 1]."""
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"frame directory {directory} does not exist")
    paths = sorted(directory.glob("*.png"))
    if not paths:
        raise FileNotFoundError(f"no .png frames in {directory}")
    names, frames = [], []
    for p in paths:
        rgb = np.asarray(Image.open(p).convert("RGB"), dtype=np.uint8)
        frames.append(np.moveaxis(rgb, 2, 0).astype(np.float32) / np.float32(255.0))
        names.append(p.name)
    return names, frames


def to_uint8(frame: np.ndarray) -> np.ndarray:
    """Clip a (3, H, W) float tensor to [0, 1] and quantize to (H, W, 3) uint8."""
    frame = feature_tensor(frame, channels=3)
    clipped = np.clip(frame, 0.0, 1.0)
    return np.moveaxis(np.rint(clipped * 255.0).astype(np.uint8), 0, 2)


def save_frame(path, frame: np.ndarray) -> None:
    Image.fromarray(to_uint8(frame), mode="RGB").save(path)


def save_mask(path, values: np.ndarray) -> None:
    """Write a (H, W) array in [0, 1] as an 8-bit grayscale PNG."""
    arr = np.rint(np.clip(np.asarray(values, dtype=np.float64), 0.0, 1.0) * 255.0).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(path)
