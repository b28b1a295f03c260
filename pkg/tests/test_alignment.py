import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from civsr.alignment import build_motion_tensor, warp
from civsr.sidecar import MotionField


def warp_loops(src, motion):
    # scalar reference: dest (y, x) samples src at (y + dy, x + dx), clamped
    c, h, w = src.shape
    out = np.zeros_like(src, dtype=np.float64)
    for y in range(h):
        for x in range(w):
            sy = min(max(y + float(motion[0, y, x]), 0.0), h - 1.0)
            sx = min(max(x + float(motion[1, y, x]), 0.0), w - 1.0)
            y0 = min(int(np.floor(sy)), h - 1)
            x0 = min(int(np.floor(sx)), w - 1)
            y1 = min(y0 + 1, h - 1)
            x1 = min(x0 + 1, w - 1)
            wy, wx = sy - y0, sx - x0
            for ch in range(c):
                top = (1 - wx) * src[ch, y0, x0] + wx * src[ch, y0, x1]
                bot = (1 - wx) * src[ch, y1, x0] + wx * src[ch, y1, x1]
                out[ch, y, x] = (1 - wy) * top + wy * bot
    return out.astype(np.float32)


@given(seed=st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_warp_matches_scalar_reference(seed):
    rng = np.random.default_rng(seed)
    c = int(rng.integers(1, 4))
    h, w = int(rng.integers(2, 9)), int(rng.integers(2, 9))
    src = rng.normal(size=(c, h, w)).astype(np.float32)
    motion = (rng.normal(size=(2, h, w)) * 3).astype(np.float32)
    assert np.max(np.abs(warp(src, motion) - warp_loops(src, motion))) <= 1e-6


def test_zero_motion_is_bitwise_identity():
    rng = np.random.default_rng(0)
    src = rng.normal(size=(4, 7, 5)).astype(np.float32)
    out = warp(src, np.zeros((2, 7, 5), dtype=np.float32))
    assert np.array_equal(out, src)


def test_integer_shift_gathers_exactly():
    # dy=1, dx=0 everywhere: row y reads source row y+1, last row clamps
    src = np.arange(12, dtype=np.float32).reshape(1, 4, 3)
    motion = np.zeros((2, 4, 3), dtype=np.float32)
    motion[0] = 1.0
    out = warp(src, motion)
    assert np.array_equal(out[0, :3], src[0, 1:])
    assert np.array_equal(out[0, 3], src[0, 3])


def test_sign_convention_horizontal():
    # dx=+1: the value appears to move left, content is fetched from the right
    src = np.zeros((1, 1, 4), dtype=np.float32)
    src[0, 0, 2] = 1.0
    motion = np.zeros((2, 1, 4), dtype=np.float32)
    motion[1] = 1.0
    out = warp(src, motion)
    assert out[0, 0, 1] == 1.0 and out[0, 0, 2] == 0.0


def test_halfpel_blends_neighbors():
    src = np.array([[[0.0, 1.0]]], dtype=np.float32)
    motion = np.zeros((2, 1, 2), dtype=np.float32)
    motion[1] = 0.5
    out = warp(src, motion)
    assert out[0, 0, 0] == pytest.approx(0.5)
    assert out[0, 0, 1] == pytest.approx(1.0)  # clamped at right edge


def test_border_clamp_large_motion():
    rng = np.random.default_rng(3)
    src = rng.random((2, 5, 5)).astype(np.float32)
    motion = np.full((2, 5, 5), 100.0, dtype=np.float32)
    out = warp(src, motion)
    assert np.allclose(out, src[:, -1:, -1:])


def test_warp_validates_shapes():
    src = np.zeros((1, 4, 4), dtype=np.float32)
    with pytest.raises(ValueError):
        warp(src, np.zeros((2, 3, 4), dtype=np.float32))
    with pytest.raises(ValueError):
        warp(src, np.zeros((3, 4, 4), dtype=np.float32))


def test_build_motion_tensor_quarter_pel():
    mv = np.zeros((2, 2, 2), dtype=np.int16)
    mv[0, 1] = (6, -4)
    t = build_motion_tensor(MotionField(mv))
    assert t.shape == (2, 2, 2) and t.dtype == np.float32
    assert t[0, 0, 1] == 1.5 and t[1, 0, 1] == -1.0
