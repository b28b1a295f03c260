import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from civsr.tensor_core import (
    ConvWeights,
    bilinear_upsample,
    conv2d,
    feature_tensor,
    leaky_relu,
    pixel_shuffle,
    pixel_unshuffle,
)


def conv_loops(x, w, padding):
    # independent scalar oracle, written against the definition
    cin, h, wd = x.shape
    cout, cin2, k, k2 = w.weight.shape
    assert cin == cin2 and k == k2
    xp = np.zeros((cin, h + 2 * padding, wd + 2 * padding), dtype=np.float64)
    xp[:, padding : padding + h, padding : padding + wd] = x.astype(np.float64)
    out = np.zeros((cout, h, wd), dtype=np.float64)
    for oc in range(cout):
        for y in range(h):
            for xx in range(wd):
                acc = float(w.bias[oc])
                for ic in range(cin):
                    for ky in range(k):
                        for kx in range(k):
                            acc += float(w.weight[oc, ic, ky, kx]) * xp[ic, y + ky, xx + kx]
                out[oc, y, xx] = acc
    return out.astype(np.float32)


def test_feature_tensor_accepts_and_normalizes():
    x = np.zeros((2, 3, 4), dtype=np.float32)
    y = feature_tensor(x)
    assert y.shape == (2, 3, 4) and y.dtype == np.float32


def test_feature_tensor_casts_wider_floats():
    y = feature_tensor(np.zeros((1, 2, 2), dtype=np.float64))
    assert y.dtype == np.float32


def test_feature_tensor_rejects_bad_inputs():
    with pytest.raises(ValueError):
        feature_tensor(np.zeros((3, 4), dtype=np.float32))
    with pytest.raises(ValueError):
        feature_tensor(np.full((1, 2, 2), np.nan, dtype=np.float32))
    with pytest.raises(ValueError):
        feature_tensor(np.zeros((2, 2, 2), dtype=np.float32), channels=3)


def test_conv_weights_validation():
    with pytest.raises(ValueError):
        ConvWeights(np.zeros((4, 2, 3, 2), dtype=np.float32), np.zeros(4, dtype=np.float32))
    with pytest.raises(ValueError):
        ConvWeights(np.zeros((4, 2, 3, 3), dtype=np.float32), np.zeros(3, dtype=np.float32))
    w = ConvWeights(np.zeros((4, 2, 3, 3), dtype=np.float32), np.zeros(4, dtype=np.float32))
    assert (w.out_channels, w.in_channels, w.kernel_size) == (4, 2, 3)


@pytest.mark.parametrize("seed", range(6))
def test_conv2d_matches_loop_oracle(seed):
    rng = np.random.default_rng(seed)
    cin, cout = int(rng.integers(1, 5)), int(rng.integers(1, 5))
    h, w = int(rng.integers(2, 9)), int(rng.integers(2, 9))
    x = rng.normal(size=(cin, h, w)).astype(np.float32)
    wts = ConvWeights(
        rng.normal(size=(cout, cin, 3, 3)).astype(np.float32),
        rng.normal(size=cout).astype(np.float32),
    )
    got = conv2d(x, wts, padding=1)
    assert np.max(np.abs(got - conv_loops(x, wts, 1))) <= 1e-5


def test_conv2d_identity_kernel():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(3, 6, 7)).astype(np.float32)
    w = np.zeros((3, 3, 3, 3), dtype=np.float32)
    for c in range(3):
        w[c, c, 1, 1] = 1.0
    out = conv2d(x, ConvWeights(w, np.zeros(3, dtype=np.float32)), padding=1)
    assert np.array_equal(out, x)


def test_conv2d_bias_only():
    x = np.zeros((2, 4, 4), dtype=np.float32)
    w = ConvWeights(np.zeros((5, 2, 3, 3), dtype=np.float32), np.arange(5, dtype=np.float32))
    out = conv2d(x, w, padding=1)
    assert np.array_equal(out, np.broadcast_to(np.arange(5, dtype=np.float32)[:, None, None], (5, 4, 4)))


def test_leaky_relu_values():
    x = np.array([[[-2.0, 0.0, 3.0]]], dtype=np.float32)
    out = leaky_relu(x, 0.1)
    assert np.allclose(out, [[[-0.2, 0.0, 3.0]]])
    with pytest.raises(ValueError):
        leaky_relu(x, -0.5)


def test_pixel_shuffle_indexing():
    # out[c, y*f+dy, x*f+dx] == in[c*f*f + dy*f + dx, y, x]
    f = 2
    x = np.arange(8 * 2 * 3, dtype=np.float32).reshape(8, 2, 3)
    out = pixel_shuffle(x, f)
    assert out.shape == (2, 4, 6)
    for c in range(2):
        for y in range(2):
            for xx in range(3):
                for dy in range(f):
                    for dx in range(f):
                        assert out[c, y * f + dy, xx * f + dx] == x[c * f * f + dy * f + dx, y, xx]


@given(
    c=st.integers(1, 3),
    h=st.integers(1, 5),
    w=st.integers(1, 5),
    f=st.sampled_from([1, 2, 4]),
    seed=st.integers(0, 2**32 - 1),
)
@settings(max_examples=40, deadline=None)
def test_pixel_shuffle_roundtrip(c, h, w, f, seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(c * f * f, h, w)).astype(np.float32)
    assert np.array_equal(pixel_unshuffle(pixel_shuffle(x, f), f), x)


def test_pixel_shuffle_rejects_bad_channels():
    with pytest.raises(ValueError):
        pixel_shuffle(np.zeros((3, 2, 2), dtype=np.float32), 2)


def bilinear_loops(x, f):
    c, h, w = x.shape
    out = np.zeros((c, h * f, w * f), dtype=np.float64)
    for y in range(h * f):
        sy = min(max((y + 0.5) / f - 0.5, 0.0), h - 1.0)
        y0 = min(int(np.floor(sy)), h - 1)
        y1 = min(y0 + 1, h - 1)
        wy = sy - y0
        for xx in range(w * f):
            sx = min(max((xx + 0.5) / f - 0.5, 0.0), w - 1.0)
            x0 = min(int(np.floor(sx)), w - 1)
            x1 = min(x0 + 1, w - 1)
            wx = sx - x0
            for ch in range(c):
                top = (1 - wx) * x[ch, y0, x0] + wx * x[ch, y0, x1]
                bot = (1 - wx) * x[ch, y1, x0] + wx * x[ch, y1, x1]
                out[ch, y, xx] = (1 - wy) * top + wy * bot
    return out.astype(np.float32)


@pytest.mark.parametrize("seed", range(4))
def test_bilinear_upsample_matches_loops(seed):
    rng = np.random.default_rng(seed)
    x = rng.random((2, 5, 4)).astype(np.float32)
    got = bilinear_upsample(x, 4)
    assert got.shape == (2, 20, 16)
    assert np.max(np.abs(got.astype(np.float64) - bilinear_loops(x, 4))) <= 1e-6


def test_bilinear_upsample_constant_is_exact():
    x = np.full((1, 3, 3), 0.625, dtype=np.float32)
    assert np.array_equal(bilinear_upsample(x, 4), np.full((1, 12, 12), 0.625, dtype=np.float32))


def test_bilinear_upsample_factor_one_is_identity():
    rng = np.random.default_rng(1)
    x = rng.random((3, 4, 4)).astype(np.float32)
    assert np.array_equal(bilinear_upsample(x, 1), x)
