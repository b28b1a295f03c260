"""Synthetic grayscale clips that elicit known codec behavior.

Three temporal regimes cover the prediction spectrum:

- static: one texture repeated, so the encoder skips every P-frame block
- pan: the texture slides one pixel per frame, so motion search locks on
- noise: a fresh random draw per frame, so prediction buys nothing

Textures are low-passed noise; smooth gradients give block motion search
an unambiguous optimum while staying cheap to code.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image


def smooth_texture(height: int, width: int, seed: int, passes: int = 3) -> np.ndarray:
    """Band-limited random texture, (height, width) uint8 full range."""
    rng = np.random.default_rng(seed)
    plane = rng.random((height, width))
    for _ in range(passes):
        plane = (
            plane
            + np.roll(plane, 1, 0)
            + np.roll(plane, -1, 0)
            + np.roll(plane, 1, 1)
            + np.roll(plane, -1, 1)
        ) / 5.0
    plane = (plane - plane.min()) / (plane.max() - plane.min())
    return np.round(plane * 255.0).astype(np.uint8)


def static_clip(frames: int, height: int, width: int, seed: int = 0) -> np.ndarray:
    """The same texture ``frames`` times, (T, H, W) uint8."""
    return np.tile(smooth_texture(height, width, seed), (frames, 1, 1))


def pan_clip(
    frames: int, height: int, width: int, seed: int = 0, step: int = 1
) -> np.ndarray:
    """A window sliding ``step`` px per frame over a wider texture.

    Frame t shows columns [t*step, t*step + width) of the canvas, so
    content at pixel x of frame t sits at x + step in frame t-1: the
    codec's motion vectors come out at ``step`` pixels horizontally.
    """
    canvas = smooth_texture(height, width + step * frames, seed)
    return np.stack([canvas[:, t * step : t * step + width] for t in range(frames)])


def noise_clip(frames: int, height: int, width: int, seed: int = 0) -> np.ndarray:
    """Independent uniform noise per frame, (T, H, W) uint8."""
    rng = np.random.default_rng(seed)
    return rng.integers(0, 256, size=(frames, height, width), dtype=np.uint8)


def write_png_frames(directory, clip: np.ndarray) -> list[Path]:
    """Write a (T, H, W) uint8 stack as zero-padded grayscale PNGs."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for t, frame in enumerate(clip):
        p = directory / f"{t:04d}.png"
        Image.fromarray(frame, mode="L").save(p)
        paths.append(p)
    return paths


def read_png_frames(directory) -> np.ndarray:
    """Load every ``*.png`` in ``directory`` (sorted) as a (T, H, W) stack.

    Color images are reduced to luma with Pillow's ITU-R 601 conversion.
    All frames must share one size.
    """
    directory = Path(directory)
    paths = sorted(directory.glob("*.png"))
    if not paths:
        raise ValueError(f"no .png frames in {directory}")
    planes = []
    for p in paths:
        with Image.open(p) as img:
            planes.append(np.asarray(img.convert("L"), dtype=np.uint8))
    shapes = {pl.shape for pl in planes}
    if len(shapes) > 1:
        raise ValueError(f"frames disagree on size: {sorted(shapes)}")
    return np.stack(planes)
