"""Quality and loss measurements for the evaluation protocol.

PSNR runs on BT.601 limited-range luma (coefficients below, images on the
0..1 scale); SSIM runs per RGB channel with the standard 11x11 Gaussian
window. No border cropping is applied anywhere; reports flag this.
"""

from __future__ import annotations

import numpy as np

from .tensor_core import feature_tensor

__all__ = ["luma_bt601", "psnr_y", "ssim_rgb", "charbonnier", "temporal_profile", "PSNR_CAP_DB"]

PSNR_CAP_DB = 99.0
CHARBONNIER_EPS = 1e-3

# BT.601 limited-range luma on the 0..1 scale
_KR, _KG, _KB = 0.257, 0.504, 0.098
_Y_OFFSET = 16.0 / 255.0


def luma_bt601(rgb: np.ndarray) -> np.ndarray:
    """Y plane (H, W) float64 of an RGB tensor (3, H, W) with values in [0, 1]."""
    rgb = feature_tensor(rgb, channels=3)
    r, g, b = rgb.astype(np.float64)
    return _KR * r + _KG * g + _KB * b + _Y_OFFSET


def psnr_y(a: np.ndarray, b: np.ndarray) -> float:
    """Luma PSNR in dB against a unit dynamic range, capped at 99 dB."""
    a = feature_tensor(a, channels=3)
    b = feature_tensor(b, channels=3)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    diff = luma_bt601(a) - luma_bt601(b)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(10.0 * np.log10(1.0 / mse), PSNR_CAP_DB)


def _gaussian_window(size: int = 11, sigma: float = 1.5) -> np.ndarray:
    half = (size - 1) / 2.0
    coords = np.arange(size, dtype=np.float64) - half
    g = np.exp(-(coords**2) / (2.0 * sigma * sigma))
    window = np.outer(g, g)
    return window / window.sum()


def ssim_rgb(a: np.ndarray, b: np.ndarray) -> float:
    """Mean SSIM over RGB channels: 11x11 Gaussian window (sigma 1.5), valid region only.

    Constants C1 = 0.01^2 and C2 = 0.03^2 assume inputs in [0, 1].
    """
    a = feature_tensor(a, channels=3)
    b = feature_tensor(b, channels=3)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    size = 11
    if a.shape[1] < size or a.shape[2] < size:
        raise ValueError(f"images must be at least {size}x{size} for SSIM, got {a.shape[1:]}")
    window = _gaussian_window(size, 1.5)
    c1, c2 = 0.01**2, 0.03**2

    def channel_ssim(x: np.ndarray, y: np.ndarray) -> float:
        x = x.astype(np.float64)
        y = y.astype(np.float64)
        wx = np.lib.stride_tricks.sliding_window_view(x, (size, size))
        wy = np.lib.stride_tricks.sliding_window_view(y, (size, size))
        mu_x = np.tensordot(wx, window, axes=([2, 3], [0, 1]))
        mu_y = np.tensordot(wy, window, axes=([2, 3], [0, 1]))
        exx = np.tensordot(wx * wx, window, axes=([2, 3], [0, 1]))
        eyy = np.tensordot(wy * wy, window, axes=([2, 3], [0, 1]))
        exy = np.tensordot(wx * wy, window, axes=([2, 3], [0, 1]))
        sxx = exx - mu_x * mu_x
        syy = eyy - mu_y * mu_y
        sxy = exy - mu_x * mu_y
        num = (2.0 * mu_x * mu_y + c1) * (2.0 * sxy + c2)
        den = (mu_x * mu_x + mu_y * mu_y + c1) * (sxx + syy + c2)
        return float(np.mean(num / den))

    return float(np.mean([channel_ssim(a[c], b[c]) for c in range(3)]))


def charbonnier(a: np.ndarray, b: np.ndarray) -> float:
    """Mean sqrt((a-b)^2 + eps^2) with eps = 1e-3; a robust L1-like pixel loss."""
    a = feature_tensor(a)
    b = feature_tensor(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    diff = a.astype(np.float64) - b.astype(np.float64)
    if not diff.any():
        return CHARBONNIER_EPS  # mean of a constant array can round 1 ulp off
    return float(np.mean(np.hypot(diff, CHARBONNIER_EPS)))


def temporal_profile(frames, row: int) -> np.ndarray:
    """Stack one pixel row from consecutive frames into a (3, T, W) strip."""
    frames = [feature_tensor(f, channels=3) for f in frames]
    if not frames:
        raise ValueError("need at least one frame")
    shape = frames[0].shape
    if any(f.shape != shape for f in frames):
        raise ValueError("frames must share dims")
    if not 0 <= row < shape[1]:
        raise ValueError(f"row {row} out of range [0, {shape[1]})")
    return np.stack([f[:, row, :] for f in frames], axis=1)
