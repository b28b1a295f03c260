"""Codec-information extractor: H.264 motion vectors and luma residuals
harvested from decoded streams and written as CIAF sidecars."""

__version__ = "0.1.0"

from .encode import DEFAULT_CRF, PINNED_FLAGS, encode_clip, encoder_settings
from .extract import (
    ExtractionSummary,
    FrameInfo,
    StreamError,
    UnsupportedPredictionError,
    extract,
)
from .fields import FieldStats, MotionRecordError, expand_block_motion, quarter_pel
from .fixtures import (
    noise_clip,
    pan_clip,
    read_png_frames,
    smooth_texture,
    static_clip,
    write_png_frames,
)
from .residual import prediction_residual, warp_luma
from .sidecar_io import (
    FRAME_INTRA,
    FRAME_PREDICTED,
    SidecarFrame,
    serialize,
    write_sidecar,
)

__all__ = [
    "DEFAULT_CRF",
    "PINNED_FLAGS",
    "encode_clip",
    "encoder_settings",
    "ExtractionSummary",
    "FrameInfo",
    "StreamError",
    "UnsupportedPredictionError",
    "extract",
    "FieldStats",
    "MotionRecordError",
    "expand_block_motion",
    "quarter_pel",
    "noise_clip",
    "pan_clip",
    "read_png_frames",
    "smooth_texture",
    "static_clip",
    "write_png_frames",
    "prediction_residual",
    "warp_luma",
    "FRAME_INTRA",
    "FRAME_PREDICTED",
    "SidecarFrame",
    "serialize",
    "write_sidecar",
    "__version__",
]
