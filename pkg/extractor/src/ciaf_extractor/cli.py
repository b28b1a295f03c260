"""Command-line front end: extract, encode.

Exit codes: 0 success, 1 usage error, 2 data error (undecodable input,
unsupported prediction, bad frames or parameters).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict

from .encode import DEFAULT_CRF, DEFAULT_FPS, DEFAULT_GOP, encode_clip
from .extract import StreamError, extract
from .fixtures import read_png_frames

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; keep that for data
        raise _UsageError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="ciaf-extract", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    ex = sub.add_parser("extract", help="decode a video and write its CIAF sidecar")
    ex.add_argument("video", help="H.264 input (I/P frames; others trigger re-encode)")
    ex.add_argument("sidecar", help="output .ciaf path")
    ex.add_argument(
        "--crf",
        type=int,
        default=DEFAULT_CRF,
        help="quality note for the clip, used if re-encoding (default %(default)s)",
    )
    ex.add_argument(
        "--no-reencode",
        action="store_true",
        help="fail listing frame indices instead of re-encoding unsupported input",
    )

    en = sub.add_parser("encode", help="encode a folder of PNG frames as H.264")
    en.add_argument("frames_dir", help="directory of grayscale .png frames")
    en.add_argument("video", help="output video path (.mp4)")
    en.add_argument("--crf", type=int, default=DEFAULT_CRF,
                    help="constant rate factor, 0..51 (default %(default)s)")
    en.add_argument("--gop", type=int, default=DEFAULT_GOP,
                    help="keyframe interval (default %(default)s)")
    en.add_argument("--fps", type=int, default=DEFAULT_FPS,
                    help="frame rate (default %(default)s)")
    return p


def cmd_extract(args) -> int:
    summary = extract(
        args.video,
        args.sidecar,
        crf=args.crf,
        allow_reencode=not args.no_reencode,
    )
    print(json.dumps(asdict(summary), indent=2))
    return EXIT_OK


def cmd_encode(args) -> int:
    frames = read_png_frames(args.frames_dir)
    settings = encode_clip(frames, args.video, crf=args.crf, gop=args.gop, fps=args.fps)
    summary = {
        "video": args.video,
        "frames_dir": args.frames_dir,
        "frame_count": int(frames.shape[0]),
        "width": int(frames.shape[2]),
        "height": int(frames.shape[1]),
        "encoder": settings,
    }
    print(json.dumps(summary, indent=2))
    return EXIT_OK


_DISPATCH = {"extract": cmd_extract, "encode": cmd_encode}


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except _UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return _DISPATCH[args.command](args)
    except (StreamError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
