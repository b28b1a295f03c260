#!/usr/bin/env python3
"""Generate a synthetic clip + sidecar + weight bundle for CLI experiments.

Writes <out>/lr/*.png, <out>/gt/*.png (nearest-neighbor x4 of the LR frames,
a stand-in ground truth so --gt has something to chew on), <out>/clip.ciaf,
and <out>/weights.bin.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from civsr.frames import save_frame
from civsr.model import ModelConfig, init_random_weights, save_weights
from civsr.sidecar import serialize_sidecar
from civsr.synth import pan_sequence, rated_sequence, repeated_sequence

KINDS = ("pan", "static", "rated")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out_dir")
    ap.add_argument("--kind", choices=KINDS, default="rated")
    ap.add_argument("--height", type=int, default=32)
    ap.add_argument("--width", type=int, default=32)
    ap.add_argument("--frames", type=int, default=6)
    ap.add_argument("--active", type=int, default=256, help="active pixels per P frame (rated kind)")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--channels", type=int, default=32)
    ap.add_argument("--blocks", type=int, default=3)
    args = ap.parse_args()

    if args.kind == "pan":
        frames, stream = pan_sequence(args.height, args.width, args.frames, args.seed)
    elif args.kind == "static":
        frames, stream = repeated_sequence(args.height, args.width, args.frames, args.seed)
    else:
        frames, stream = rated_sequence(
            args.height, args.width, args.frames - 1, args.active, args.seed
        )

    out = Path(args.out_dir)
    (out / "lr").mkdir(parents=True, exist_ok=True)
    (out / "gt").mkdir(exist_ok=True)
    for i, f in enumerate(frames):
        save_frame(out / "lr" / f"frame_{i:04d}.png", f)
        save_frame(out / "gt" / f"frame_{i:04d}.png", np.repeat(np.repeat(f, 4, axis=1), 4, axis=2))
    (out / "clip.ciaf").write_bytes(serialize_sidecar(stream))

    cfg = ModelConfig(
        num_resblocks=args.blocks, channels=args.channels, scale=4, variant="mv_residual_sparse"
    )
    (out / "weights.bin").write_bytes(save_weights(init_random_weights(cfg, args.seed)))
    print(f"{args.kind} fixture: {len(frames)} frames {args.height}x{args.width} -> {out}")
    print(f"try: civsr upscale {out}/lr {out}/clip.ciaf {out}/weights.bin {out}/hr --gt {out}/gt")
    return 0


if __name__ == "__main__":
    sys.exit(main())
