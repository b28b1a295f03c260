"""Sidecar serialization: golden bytes plus acceptance by the engine parser.

The writer here and the engine's parser are independent implementations
of one byte format; these tests are where the two meet.
"""

import struct

import numpy as np
import pytest

from ciaf_extractor.sidecar_io import (
    FRAME_INTRA,
    FRAME_PREDICTED,
    SidecarFrame,
    serialize,
)

from civsr.sidecar import SidecarTruncatedError, parse_sidecar, serialize_sidecar


def tiny_stream():
    """One intra plus one predicted frame on a 1x2 grid, values chosen by hand."""
    zero_m = np.zeros((1, 2, 2), np.int16)
    zero_r = np.zeros((1, 2), np.int16)
    motion = np.array([[[4, -8], [0, 2]]], dtype=np.int16)
    residual = np.array([[-1, 300]], dtype=np.int16)
    return [
        SidecarFrame(FRAME_INTRA, zero_m, zero_r),
        SidecarFrame(FRAME_PREDICTED, motion, residual),
    ]


def test_golden_bytes():
    blob = serialize(tiny_stream())
    head = struct.pack("<4sHHHI", b"CIAF", 1, 2, 1, 2)
    frame0 = bytes([0]) + struct.pack("<4h", 0, 0, 0, 0) + struct.pack("<2h", 0, 0)
    frame1 = (
        bytes([1])
        + struct.pack("<4h", 4, -8, 0, 2)
        + struct.pack("<2h", -1, 300)
    )
    assert blob == head + frame0 + frame1


def test_byte_length_is_exact():
    blob = serialize(tiny_stream())
    per_frame = 1 + 1 * 2 * 2 * 2 + 1 * 2 * 2
    assert len(blob) == 14 + 2 * per_frame


def test_engine_parser_accepts_and_reserializes_identically():
    blob = serialize(tiny_stream())
    stream = parse_sidecar(blob)
    assert stream.width == 2
    assert stream.height == 1
    assert stream.frame_count == 2
    assert stream.frames[0].frame_type == "I"
    assert stream.frames[1].frame_type == "P"
    assert (stream.frames[1].motion.mv == [[[4, -8], [0, 2]]]).all()
    assert (stream.frames[1].residual.res == [[-1, 300]]).all()
    assert serialize_sidecar(stream) == blob


def test_engine_parser_flags_truncation_of_our_output():
    blob = serialize(tiny_stream())
    with pytest.raises(SidecarTruncatedError):
        parse_sidecar(blob[:-1])


def test_empty_stream_rejected():
    with pytest.raises(ValueError, match="at least one"):
        serialize([])


def test_first_frame_must_be_intra():
    frames = tiny_stream()[1:]
    with pytest.raises(ValueError, match="intra"):
        serialize(frames)


def test_frame_type_validated():
    with pytest.raises(ValueError, match="frame_type"):
        SidecarFrame(2, np.zeros((1, 2, 2), np.int16), np.zeros((1, 2), np.int16))


def test_dtype_validated():
    with pytest.raises(ValueError, match="int16"):
        SidecarFrame(0, np.zeros((1, 2, 2), np.int32), np.zeros((1, 2), np.int16))


def test_motion_residual_grids_must_agree():
    with pytest.raises(ValueError, match="does not match"):
        SidecarFrame(0, np.zeros((1, 2, 2), np.int16), np.zeros((2, 2), np.int16))


def test_mixed_frame_sizes_rejected():
    frames = [
        SidecarFrame(0, np.zeros((1, 2, 2), np.int16), np.zeros((1, 2), np.int16)),
        SidecarFrame(1, np.zeros((2, 2, 2), np.int16), np.zeros((2, 2), np.int16)),
    ]
    with pytest.raises(ValueError, match="stream is"):
        serialize(frames)


def test_dims_must_fit_header_fields():
    frames = [
        SidecarFrame(
            0, np.zeros((1, 65536, 2), np.int16), np.zeros((1, 65536), np.int16)
        )
    ]
    with pytest.raises(ValueError, match="u16"):
        serialize(frames)


def test_random_streams_roundtrip_through_engine_parser():
    rng = np.random.default_rng(17)
    for _ in range(25):
        h, w = (int(v) for v in rng.integers(1, 9, size=2))
        n = int(rng.integers(1, 6))
        frames = []
        for i in range(n):
            if i == 0 or rng.random() < 0.3:
                frames.append(
                    SidecarFrame(
                        FRAME_INTRA,
                        np.zeros((h, w, 2), np.int16),
                        np.zeros((h, w), np.int16),
                    )
                )
            else:
                frames.append(
                    SidecarFrame(
                        FRAME_PREDICTED,
                        rng.integers(-100, 101, size=(h, w, 2)).astype(np.int16),
                        rng.integers(-255, 256, size=(h, w)).astype(np.int16),
                    )
                )
        blob = serialize(frames)
        assert serialize_sidecar(parse_sidecar(blob)) == blob
