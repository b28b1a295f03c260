"""Dense per-pixel motion fields from exported block motion records.

The decoder reports one record per predicted block. A record carries the
block's destination center, its size, and a motion vector in units of
1/``motion_scale`` pixels. This module replicates each block vector over
the pixels the block covers and normalizes everything to quarter-pel
integers, the resolution H.264 codes luma motion at.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Column layout of one exported motion record, shape (8,) int32.
DST_CX, DST_CY, BLOCK_W, BLOCK_H, MOTION_X, MOTION_Y, MOTION_SCALE, SOURCE = range(8)

QPEL_PER_PIXEL = 4
INT16_MIN = np.iinfo(np.int16).min
INT16_MAX = np.iinfo(np.int16).max


class MotionRecordError(ValueError):
    """A block motion record cannot be mapped onto the frame grid."""


@dataclass(frozen=True)
class FieldStats:
    """How much of the frame the exported records account for."""

    records: int
    covered_fraction: float


def quarter_pel(motion: int, scale: int) -> int:
    """Convert a raw motion component to quarter-pel units.

    The exported value is ``motion / scale`` pixels. Anything that does
    not land on the quarter-pel grid cannot be represented in the
    sidecar and is rejected rather than silently rounded.
    """
    if scale <= 0:
        raise MotionRecordError(f"motion_scale must be positive, got {scale}")
    numerator = int(motion) * QPEL_PER_PIXEL
    q, rem = divmod(numerator, int(scale))
    if rem != 0:
        raise MotionRecordError(
            f"motion {motion}/{scale} px is finer than quarter-pel"
        )
    if not INT16_MIN <= q <= INT16_MAX:
        raise MotionRecordError(f"quarter-pel motion {q} overflows int16")
    return q


def expand_block_motion(
    records: np.ndarray, height: int, width: int
) -> tuple[np.ndarray, FieldStats]:
    """Replicate block motion vectors over their pixels.

    Parameters
    ----------
    records:
        Integer array of shape (N, 8) in the column layout above. The
        destination position is the block center; the top-left corner is
        ``center - size // 2``. An empty array is valid and yields an
        all-zero field (every macroblock was coded intra).
    height, width:
        Frame dimensions in pixels.

    Returns
    -------
    field:
        (height, width, 2) int16, quarter-pel, vertical component first.
        Pixels no record covers stay (0, 0).
    stats:
        Record count and the fraction of pixels at least one record wrote.

    Raises
    ------
    MotionRecordError
        For forward references (``source >= 0``, a B-frame trait), motion
        finer than quarter-pel, degenerate block sizes, or blocks lying
        entirely outside the frame.
    """
    records = np.asarray(records)
    field = np.zeros((height, width, 2), dtype=np.int16)
    covered = np.zeros((height, width), dtype=bool)
    if records.size == 0:
        return field, FieldStats(records=0, covered_fraction=0.0)
    if records.ndim != 2 or records.shape[1] != 8:
        raise MotionRecordError(f"records must be (N, 8), got {records.shape}")

    for rec in records:
        if rec[SOURCE] >= 0:
            raise MotionRecordError("forward-referencing block (B-frame prediction)")
        bw, bh = int(rec[BLOCK_W]), int(rec[BLOCK_H])
        if bw <= 0 or bh <= 0:
            raise MotionRecordError(f"degenerate block size {bw}x{bh}")
        qx = quarter_pel(int(rec[MOTION_X]), int(rec[MOTION_SCALE]))
        qy = quarter_pel(int(rec[MOTION_Y]), int(rec[MOTION_SCALE]))
        x0 = int(rec[DST_CX]) - bw // 2
        y0 = int(rec[DST_CY]) - bh // 2
        # Frames whose dimensions are not macroblock multiples are coded
        # with padding; blocks straddling the real frame edge are clipped
        # to the visible part.
        cx0, cy0 = max(x0, 0), max(y0, 0)
        cx1, cy1 = min(x0 + bw, width), min(y0 + bh, height)
        if cx0 >= cx1 or cy0 >= cy1:
            raise MotionRecordError(
                f"block at ({x0}, {y0}) size {bw}x{bh} lies outside the frame"
            )
        field[cy0:cy1, cx0:cx1, 0] = qy
        field[cy0:cy1, cx0:cx1, 1] = qx
        covered[cy0:cy1, cx0:cx1] = True

    stats = FieldStats(
        records=int(records.shape[0]),
        covered_fraction=float(covered.mean()),
    )
    return field, stats
