"""End-to-end extraction: decode, expand motion, difference, serialize.

The pipeline works on streams with I- and P-frames only. Inputs that use
other prediction (B-frames, forward references) are re-encoded from their
decoded frames with prediction restricted, mirroring how evaluation
datasets are prepared in the first place; pass ``allow_reencode=False``
to get an error listing the offending frames instead.
"""

from __future__ import annotations

import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _codec
from .encode import DEFAULT_CRF, DEFAULT_FPS, DEFAULT_GOP, encode_clip
from .fields import MotionRecordError, expand_block_motion
from .residual import prediction_residual
from .sidecar_io import FRAME_INTRA, FRAME_PREDICTED, SidecarFrame, write_sidecar


class StreamError(RuntimeError):
    """The input cannot be decoded into a usable frame sequence."""


class UnsupportedPredictionError(StreamError):
    """Frames use prediction outside the I/P model this tool extracts."""

    def __init__(self, frame_indices: list[int]):
        self.frame_indices = list(frame_indices)
        listed = ", ".join(str(i) for i in self.frame_indices)
        super().__init__(f"unsupported prediction in frames [{listed}]")


@dataclass(frozen=True)
class FrameInfo:
    """Extraction facts for one frame."""

    index: int
    frame_type: str
    sparse_rate: float | None  # residual == 0 fraction; None on intra frames
    mv_coverage: float | None  # fraction of pixels with an exported block MV


@dataclass(frozen=True)
class ExtractionSummary:
    video: str
    sidecar: str
    width: int
    height: int
    frame_count: int
    frame_types: str
    reencoded: bool
    encoder: dict | None  # settings used when re-encoding, else None
    crf: int
    mean_sparse_rate: float | None  # over P-frames; None if the clip has none
    frames: list[FrameInfo]
    sidecar_bytes: int


def _build_frames(decoded) -> tuple[list[SidecarFrame], list[FrameInfo], list[int]]:
    """Turn decoded frames into sidecar records.

    Returns the records, per-frame stats, and the indices of frames whose
    prediction cannot be expressed (wrong picture type or bad motion
    records). When any index is reported the records are not usable.
    """
    height, width = decoded[0].luma.shape
    out: list[SidecarFrame] = []
    infos: list[FrameInfo] = []
    unsupported: list[int] = []
    zero_motion = np.zeros((height, width, 2), dtype=np.int16)
    zero_residual = np.zeros((height, width), dtype=np.int16)

    for t, frame in enumerate(decoded):
        kind = frame.pict_type
        if kind == "I":
            out.append(SidecarFrame(FRAME_INTRA, zero_motion, zero_residual))
            infos.append(FrameInfo(t, "I", None, None))
            continue
        if kind != "P" or t == 0:
            # B-frames, unknown picture types, and a stream that opens
            # with a prediction all fall outside the I/P model.
            unsupported.append(t)
            continue
        try:
            field, stats = expand_block_motion(frame.mvs, height, width)
        except MotionRecordError:
            unsupported.append(t)
            continue
        residual = prediction_residual(frame.luma, decoded[t - 1].luma, field)
        out.append(SidecarFrame(FRAME_PREDICTED, field, residual))
        infos.append(
            FrameInfo(
                t,
                "P",
                sparse_rate=float((residual == 0).mean()),
                mv_coverage=stats.covered_fraction,
            )
        )
    return out, infos, unsupported


def extract(
    video_path,
    out_sidecar,
    crf: int = DEFAULT_CRF,
    allow_reencode: bool = True,
) -> ExtractionSummary:
    """Distill ``video_path`` into a CIAF sidecar at ``out_sidecar``.

    ``crf`` is the quality used if the stream needs re-encoding (and is
    recorded in the summary either way, as the nominal quality note for
    the clip). Raises StreamError for undecodable input and
    UnsupportedPredictionError when re-encoding is disabled and the
    stream uses prediction beyond I/P.
    """
    video_path = Path(video_path)
    try:
        decoded = _codec.decode(str(video_path))
    except RuntimeError as e:
        raise StreamError(f"cannot decode {video_path}: {e}") from e

    reencoded = False
    encoder = None
    frames, infos, unsupported = _build_frames(decoded)
    if unsupported:
        if not allow_reencode:
            raise UnsupportedPredictionError(unsupported)
        lumas = np.stack([f.luma for f in decoded])
        with tempfile.TemporaryDirectory() as tmp:
            clean = Path(tmp) / "reencoded.mp4"
            encoder = encode_clip(lumas, clean, crf=crf)
            decoded = _codec.decode(str(clean))
        reencoded = True
        frames, infos, unsupported = _build_frames(decoded)
        if unsupported:
            raise UnsupportedPredictionError(unsupported)

    height, width = decoded[0].luma.shape
    n_bytes = write_sidecar(out_sidecar, frames)
    p_rates = [i.sparse_rate for i in infos if i.sparse_rate is not None]
    return ExtractionSummary(
        video=str(video_path),
        sidecar=str(out_sidecar),
        width=width,
        height=height,
        frame_count=len(frames),
        frame_types="".join(i.frame_type for i in infos),
        reencoded=reencoded,
        encoder=encoder,
        crf=crf,
        mean_sparse_rate=float(np.mean(p_rates)) if p_rates else None,
        frames=infos,
        sidecar_bytes=n_bytes,
    )
