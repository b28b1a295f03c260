#!/usr/bin/env python3
"""Generate a fixture clip, encode it, and extract its sidecar.

Writes <out>/frames/*.png, <out>/clip.mp4, <out>/clip.ciaf and prints the
extraction summary. The sidecar is ready to feed any CIAF consumer.
"""

import argparse
import json
from dataclasses import asdict
from pathlib import Path

from ciaf_extractor.encode import DEFAULT_CRF, encode_clip
from ciaf_extractor.extract import extract
from ciaf_extractor.fixtures import noise_clip, pan_clip, static_clip, write_png_frames

KINDS = ("pan", "static", "noise")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out_dir")
    ap.add_argument("--kind", choices=KINDS, default="pan")
    ap.add_argument("--height", type=int, default=48)
    ap.add_argument("--width", type=int, default=64)
    ap.add_argument("--frames", type=int, default=8)
    ap.add_argument("--crf", type=int, default=DEFAULT_CRF)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    make = {"pan": pan_clip, "static": static_clip, "noise": noise_clip}[args.kind]
    clip = make(args.frames, args.height, args.width, seed=args.seed)

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_png_frames(out / "frames", clip)
    video = out / "clip.mp4"
    sidecar = out / "clip.ciaf"
    encode_clip(clip, video, crf=args.crf)
    summary = extract(video, sidecar, crf=args.crf)

    print(json.dumps(asdict(summary), indent=2))
    print()
    print(f"wrote {video} and {sidecar}")
    print("the sidecar pairs with low-resolution frame folders, e.g.:")
    print(f"  civsr upscale <lr_frames> {sidecar} <weights.bin> --out <dir>")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
