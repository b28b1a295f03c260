"""CIAF sidecar container: per-frame MV fields, residual maps, frame types.

Binary layout (v1, little-endian, normative copy in docs/format.md):

    magic   4 bytes  b"CIAF"
    version u16      currently 1
    width   u16
    height  u16
    count   u32      number of frames
    frames  count records:
        frame_type u8              0 = I, 1 = P
        mv         H*W*2 x i16     row-major per pixel, (dy, dx) quarter-pel
        residual   H*W   x i16     row-major luma residual

Parsing either yields a fully valid :class:`SidecarStream` or raises a
:class:`SidecarError` subclass; it never returns a partially-valid value and
never reads past the declared payload.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "MAGIC",
    "VERSION",
    "MotionField",
    "ResidualMap",
    "SidecarFrame",
    "SidecarStream",
    "SidecarError",
    "SidecarMagicError",
    "SidecarVersionError",
    "SidecarTruncatedError",
    "SidecarDimError",
    "SidecarFormatError",
    "parse_sidecar",
    "serialize_sidecar",
    "mv_to_pixels",
]

MAGIC = b"CIAF"
VERSION = 1

_HEADER = struct.Struct("<4sHHHI")
_FRAME_TYPE_I = 0
_FRAME_TYPE_P = 1


class SidecarError(ValueError):
    """Base class for sidecar container and field validation errors."""


class SidecarMagicError(SidecarError):
    pass


class SidecarVersionError(SidecarError):
    pass


class SidecarTruncatedError(SidecarError):
    pass


class SidecarDimError(SidecarError):
    pass


class SidecarFormatError(SidecarError):
    pass


def _as_i16(what: str, values) -> np.ndarray:
    """Contiguous int16 view of ``values``; wider ints must fit without wrap."""
    arr = np.ascontiguousarray(values)
    if not np.issubdtype(arr.dtype, np.integer):
        raise SidecarFormatError(f"{what} must be integer, got dtype {arr.dtype}")
    if arr.dtype != np.int16:
        info = np.iinfo(np.int16)
        if arr.size and (arr.min() < info.min or arr.max() > info.max):
            raise SidecarFormatError(f"{what} values exceed int16 range")
        arr = arr.astype(np.int16)
    return arr


@dataclass(frozen=True, eq=False)
class MotionField:
    """Per-pixel (dy, dx) motion in quarter-pel signed integers, shape (H, W, 2)."""

    mv: np.ndarray

    def __post_init__(self):
        arr = _as_i16("motion field", self.mv)
        if arr.ndim != 3 or arr.shape[2] != 2:
            raise SidecarDimError(f"motion field must be (H, W, 2), got {arr.shape}")
        object.__setattr__(self, "mv", arr)

    @property
    def height(self) -> int:
        return self.mv.shape[0]

    @property
    def width(self) -> int:
        return self.mv.shape[1]

    def __eq__(self, other):
        return isinstance(other, MotionField) and np.array_equal(self.mv, other.mv)


@dataclass(frozen=True, eq=False)
class ResidualMap:
    """Per-pixel signed 16-bit luma residual, shape (H, W)."""

    res: np.ndarray

    def __post_init__(self):
        arr = _as_i16("residual map", self.res)
        if arr.ndim != 2:
            raise SidecarDimError(f"residual map must be (H, W), got {arr.shape}")
        object.__setattr__(self, "res", arr)

    @property
    def height(self) -> int:
        return self.res.shape[0]

    @property
    def width(self) -> int:
        return self.res.shape[1]

    def __eq__(self, other):
        return isinstance(other, ResidualMap) and np.array_equal(self.res, other.res)


@dataclass(frozen=True)
class SidecarFrame:
    frame_type: str  # "I" or "P"
    motion: MotionField
    residual: ResidualMap

    def __post_init__(self):
        if self.frame_type not in ("I", "P"):
            raise SidecarFormatError(f"frame_type must be 'I' or 'P', got {self.frame_type!r}")
        if (self.motion.height, self.motion.width) != (self.residual.height, self.residual.width):
            raise SidecarDimError(
                f"motion {self.motion.mv.shape[:2]} and residual {self.residual.res.shape} dims differ"
            )


@dataclass(frozen=True, eq=False)
class SidecarStream:
    width: int
    height: int
    frames: tuple = field(default_factory=tuple)
    version: int = VERSION

    def __post_init__(self):
        object.__setattr__(self, "frames", tuple(self.frames))
        if self.version != VERSION:
            raise SidecarVersionError(f"unsupported sidecar version {self.version}")
        if self.width < 1 or self.height < 1:
            raise SidecarDimError(f"dims must be positive, got {self.width}x{self.height}")
        if not (self.width < 1 << 16 and self.height < 1 << 16):
            raise SidecarDimError("dims exceed u16 range")
        if len(self.frames) >= 1 << 32:
            raise SidecarFormatError("frame count exceeds u32 range")
        for i, f in enumerate(self.frames):
            if (f.motion.height, f.motion.width) != (self.height, self.width):
                raise SidecarDimError(
                    f"frame {i} dims {f.motion.mv.shape[:2]} != stream {self.height}x{self.width}"
                )
        if self.frames and self.frames[0].frame_type != "I":
            raise SidecarFormatError("frame 0 must be an I-frame")

    @property
    def frame_count(self) -> int:
        return len(self.frames)

    def __eq__(self, other):
        return (
            isinstance(other, SidecarStream)
            and self.version == other.version
            and self.width == other.width
            and self.height == other.height
            and self.frames == other.frames
        )


def serialize_sidecar(s: SidecarStream) -> bytes:
    """Deterministic byte encoding of ``s``; inverse of :func:`parse_sidecar`."""
    out = [_HEADER.pack(MAGIC, s.version, s.width, s.height, s.frame_count)]
    for f in s.frames:
        out.append(bytes([_FRAME_TYPE_I if f.frame_type == "I" else _FRAME_TYPE_P]))
        out.append(f.motion.mv.astype("<i2").tobytes())
        out.append(f.residual.res.astype("<i2").tobytes())
    return b"".join(out)


def parse_sidecar(data: bytes) -> SidecarStream:
    """Parse sidecar bytes, raising a distinct SidecarError subclass per defect."""
    if len(data) < _HEADER.size:
        raise SidecarTruncatedError(f"header needs {_HEADER.size} bytes, got {len(data)}")
    magic, version, width, height, count = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise SidecarMagicError(f"bad magic {magic!r}")
    if version != VERSION:
        raise SidecarVersionError(f"unknown version {version}")
    if width < 1 or height < 1:
        raise SidecarDimError(f"dims must be positive, got {width}x{height}")
    frame_bytes = 1 + height * width * 2 * 2 + height * width * 2
    expected = _HEADER.size + count * frame_bytes
    if len(data) < expected:
        raise SidecarTruncatedError(f"payload needs {expected} bytes, got {len(data)}")
    if len(data) > expected:
        raise SidecarFormatError(f"{len(data) - expected} trailing bytes after payload")
    frames = []
    pos = _HEADER.size
    for i in range(count):
        ftype = data[pos]
        pos += 1
        if ftype == _FRAME_TYPE_I:
            frame_type = "I"
        elif ftype == _FRAME_TYPE_P:
            frame_type = "P"
        else:
            raise SidecarFormatError(f"frame {i}: unknown frame type byte {ftype:#04x}")
        n = height * width * 2 * 2
        mv = np.frombuffer(data, dtype="<i2", count=height * width * 2, offset=pos)
        mv = mv.reshape(height, width, 2)
        pos += n
        res = np.frombuffer(data, dtype="<i2", count=height * width, offset=pos)
        res = res.reshape(height, width)
        pos += height * width * 2
        frames.append(SidecarFrame(frame_type, MotionField(mv), ResidualMap(res)))
    return SidecarStream(width=width, height=height, frames=tuple(frames), version=version)


def mv_to_pixels(m: MotionField) -> np.ndarray:
    """Quarter-pel integers to pixel units: (2, H, W) float32, channel 0 vertical."""
    mv = m.mv.astype(np.float32) / np.float32(4.0)
    return np.ascontiguousarray(np.moveaxis(mv, 2, 0))
