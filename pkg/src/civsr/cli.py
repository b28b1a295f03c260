"""Command-line front end: upscale, bench, verify, mask-stats, profile.

Exit codes: 0 success, 1 usage error, 2 data error, 3+ verification failures
(`verify` exits with the number of failed suites).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .frames import load_frames, save_frame, save_mask
from .metrics import psnr_y, ssim_rgb
from .model import (
    ModelConfig,
    StepReport,
    WeightBundle,
    WeightBundleError,
    init_random_weights,
    init_state,
    load_weights,
    step,
)
from .oracles import conv2d_reference, warp_reference
from .sidecar import VERSION as SIDECAR_VERSION
from .sidecar import SidecarError, parse_sidecar
from .sparse import (
    AnnealSchedule,
    SpatialMask,
    count_flops,
    dense_resblock,
    lambda_at,
    residual_mask,
    sparse_rate,
    sparse_resblock,
    tau_at,
)
from .synth import clustered_mask_values
from .tensor_core import ConvWeights, conv2d
from .alignment import warp

REPORT_SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

_VARIANT_NAMES = {"baseline": "baseline", "mv": "mv_aligned", "mv-res": "mv_residual_sparse"}


class _UsageError(Exception):
    pass


class _DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; spec wants 1
        raise _UsageError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="civsr", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    up = sub.add_parser("upscale", help="super-resolve a frame folder with its sidecar")
    up.add_argument("frames_dir")
    up.add_argument("sidecar")
    up.add_argument("weights")
    up.add_argument("out_dir")
    up.add_argument("--variant", choices=sorted(_VARIANT_NAMES), default="mv-res")
    up.add_argument("--gt", help="ground-truth HR frame folder for PSNR/SSIM")
    up.add_argument("--seed", type=int, default=0)
    up.add_argument("--report", help="write a JSON run report here")
    up.add_argument("--emit-masks", action="store_true", help="write per-frame residual masks")

    be = sub.add_parser("bench", help="dense vs sparse body benchmark over synthetic masks")
    be.add_argument("--channels", type=int, default=128)
    be.add_argument("--blocks", type=int, default=7)
    be.add_argument("--sizes", default="64x64", help="comma list of HxW")
    be.add_argument("--rates", default="0,0.25,0.5,0.75,1.0", help="comma list of sparse rates")
    be.add_argument("--repeats", type=int, default=3)
    be.add_argument("--seed", type=int, default=0)
    be.add_argument("--out", help="CSV output path (default: stdout)")

    ve = sub.add_parser("verify", help="run oracle-equivalence suites")
    ve.add_argument("--seed", type=int, default=0)
    ve.add_argument(
        "--inject-corruption",
        action="store_true",
        help="deliberately perturb the sparse path to demonstrate detection",
    )

    ms = sub.add_parser("mask-stats", help="sparse-rate statistics of a sidecar's residual masks")
    ms.add_argument("sidecar")
    ms.add_argument("--report", help="write a JSON report here")
    ms.add_argument("--emit-masks", help="directory for per-frame mask PNGs")

    pr = sub.add_parser("profile", help="temporal-profile strip from a frame folder")
    pr.add_argument("frames_dir")
    pr.add_argument("row", type=int)
    pr.add_argument("--out", default="profile.png")
    return p


def _read_sidecar(path) -> "SidecarStream":
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise _DataError(f"cannot read sidecar: {e}") from e
    try:
        return parse_sidecar(data)
    except SidecarError as e:
        raise _DataError(f"invalid sidecar {path}: {e}") from e


def cmd_upscale(args) -> int:
    variant = _VARIANT_NAMES[args.variant]
    stream = _read_sidecar(args.sidecar)
    try:
        names, frames = load_frames(args.frames_dir)
    except (FileNotFoundError, ValueError) as e:
        raise _DataError(str(e)) from e
    if len(frames) != stream.frame_count:
        raise _DataError(f"{len(frames)} frames but sidecar declares {stream.frame_count}")
    if frames[0].shape[1:] != (stream.height, stream.width):
        raise _DataError(
            f"frame dims {frames[0].shape[1:]} != sidecar dims {(stream.height, stream.width)}"
        )
    try:
        weight_bytes = Path(args.weights).read_bytes()
        bundle = load_weights(weight_bytes)
    except (OSError, WeightBundleError, ValueError, KeyError) as e:
        raise _DataError(f"cannot load weights: {e}") from e

    cfg = _config_from_bundle(bundle, variant)
    gt_frames = None
    if args.gt:
        try:
            _, gt_frames = load_frames(args.gt)
        except (FileNotFoundError, ValueError) as e:
            raise _DataError(str(e)) from e
        if len(gt_frames) != len(frames):
            raise _DataError(f"{len(gt_frames)} GT frames but {len(frames)} inputs")

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    mask_dir = out_dir / "masks"
    if args.emit_masks:
        mask_dir.mkdir(exist_ok=True)

    state = init_state(cfg, stream.height, stream.width)
    frame_rows = []
    hr_frames = []
    for i, (name, frame, rec) in enumerate(zip(names, frames, stream.frames)):
        t0 = time.perf_counter()
        try:
            hr, state, rep = step(frame, rec.motion, rec.residual, rec.frame_type, state, cfg, bundle)
        except (ValueError, WeightBundleError) as e:
            raise _DataError(f"frame {i}: {e}") from e
        wall = time.perf_counter() - t0
        save_frame(out_dir / name, hr)
        hr_frames.append(hr)
        if args.emit_masks:
            save_mask(mask_dir / name, residual_mask(rec.residual, rec.frame_type).values)
        row = {
            "index": i,
            "name": name,
            "frame_type": rep.frame_type,
            "sparse_rate": rep.sparse_rate,
            "body_macs": rep.body_macs,
            "dense_body_macs": rep.dense_body_macs,
            "total_macs": rep.total_macs,
            "dense_total_macs": rep.dense_total_macs,
            "wall_time_s": wall,
        }
        if gt_frames is not None:
            if gt_frames[i].shape != hr.shape:
                raise _DataError(f"GT frame {i} dims {gt_frames[i].shape[1:]} != output {hr.shape[1:]}")
            row["psnr_y"] = psnr_y(hr, gt_frames[i])
            row["ssim"] = ssim_rgb(hr, gt_frames[i])
        frame_rows.append(row)

    body = sum(r["body_macs"] for r in frame_rows)
    dense_body = sum(r["dense_body_macs"] for r in frame_rows)
    total = sum(r["total_macs"] for r in frame_rows)
    dense_total = sum(r["dense_total_macs"] for r in frame_rows)
    aggregate = {
        "mean_sparse_rate": float(np.mean([r["sparse_rate"] for r in frame_rows])),
        "body_macs": body,
        "dense_body_macs": dense_body,
        "body_savings": 1.0 - body / dense_body,
        "total_macs": total,
        "dense_total_macs": dense_total,
        "total_savings": 1.0 - total / dense_total,
        "mean_wall_time_s": float(np.mean([r["wall_time_s"] for r in frame_rows])),
    }
    if gt_frames is not None:
        aggregate["mean_psnr_y"] = float(np.mean([r["psnr_y"] for r in frame_rows]))
        aggregate["mean_ssim"] = float(np.mean([r["ssim"] for r in frame_rows]))

    report = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "command": "upscale",
        "engine_version": __version__,
        "seed": args.seed,
        "variant": args.variant,
        "config": {
            "num_resblocks": cfg.num_resblocks,
            "channels": cfg.channels,
            "scale": cfg.scale,
            "input_channels": cfg.input_channels,
        },
        "sidecar": {
            "format_version": stream.version,
            "width": stream.width,
            "height": stream.height,
            "frame_count": stream.frame_count,
        },
        "weights_sha256": hashlib.sha256(weight_bytes).hexdigest(),
        "metrics_note": "no border crop",
        "frames": frame_rows,
        "aggregate": aggregate,
    }
    if args.report:
        Path(args.report).write_text(json.dumps(report, indent=2) + "\n")
    print(
        f"upscaled {len(frames)} frames -> {out_dir}  "
        f"mean sparse rate {aggregate['mean_sparse_rate']:.4f}  "
        f"body savings {aggregate['body_savings']:.1%}  "
        f"total savings {aggregate['total_savings']:.1%}"
    )
    if gt_frames is not None:
        print(f"mean PSNR-Y {aggregate['mean_psnr_y']:.4f} dB  mean SSIM {aggregate['mean_ssim']:.4f}")
    return EXIT_OK


def _config_from_bundle(bundle: WeightBundle, variant: str) -> ModelConfig:
    """Infer architecture constants from bundle tensor shapes."""
    try:
        channels = bundle.tensors["tail.weight"].shape[0]
        input_channels = bundle.tensors["up.rgb.weight"].shape[0]
        rgb_in = bundle.tensors["up.rgb.weight"].shape[1]
        blocks = 0
        while f"body.{blocks}.conv1.weight" in bundle.tensors:
            blocks += 1
    except KeyError as e:
        raise _DataError(f"weight bundle is missing tensor {e}") from e
    if blocks == 0:
        raise _DataError("weight bundle has no body resblocks")
    if channels % rgb_in != 0:
        raise _DataError(f"inconsistent upsampler shapes: {channels} vs {rgb_in}")
    scale2 = channels // rgb_in
    scale = int(round(np.sqrt(scale2)))
    if scale * scale != scale2:
        raise _DataError(f"upsampler implies non-square scale^2 = {scale2}")
    try:
        return ModelConfig(
            num_resblocks=blocks,
            channels=channels,
            scale=scale,
            input_channels=input_channels,
            variant=variant,
        )
    except ValueError as e:
        raise _DataError(f"weight bundle implies invalid config: {e}") from e


def _body_weights(channels: int, blocks: int, rng: np.random.Generator) -> list:
    std = np.sqrt(2.0 / (channels * 9))
    pairs = []
    for _ in range(blocks):
        pairs.append(
            tuple(
                ConvWeights(
                    rng.normal(0.0, std, size=(channels, channels, 3, 3)).astype(np.float32),
                    np.zeros(channels, dtype=np.float32),
                )
                for _ in range(2)
            )
        )
    return pairs


def _run_body_dense(x, pairs):
    for w1, w2 in pairs:
        x = dense_resblock(x, w1, w2)
    return x


def _run_body_sparse(x, pairs, mask, cache):
    for w1, w2 in pairs:
        x = sparse_resblock(x, w1, w2, mask, cache)
    return x


def cmd_bench(args) -> int:
    try:
        sizes = []
        for token in args.sizes.split(","):
            h, w = token.lower().split("x")
            sizes.append((int(h), int(w)))
        rates = [float(r) for r in args.rates.split(",")]
    except ValueError as e:
        raise _UsageError(f"bad --sizes/--rates: {e}") from e
    if any(not 0.0 <= r <= 1.0 for r in rates):
        raise _UsageError("rates must lie in [0, 1]")
    if args.repeats < 1 or args.channels < 1 or args.blocks < 1:
        raise _UsageError("repeats, channels, blocks must be positive")

    rng = np.random.default_rng(args.seed)
    rows = []
    for h, w in sizes:
        pairs = _body_weights(args.channels, args.blocks, rng)
        x = rng.normal(0.0, 1.0, size=(args.channels, h, w)).astype(np.float32)
        cache = rng.normal(0.0, 1.0, size=(args.channels, h, w)).astype(np.float32)
        per_conv_dense = count_flops(args.channels, args.channels, 3, h, w)
        dense_macs = 2 * args.blocks * per_conv_dense
        for rate in rates:
            n_zero = round(rate * h * w)
            mask = SpatialMask(1.0 - clustered_mask_values(h, w, n_zero).astype(np.float32), "hard")
            sparse_macs = 2 * args.blocks * count_flops(args.channels, args.channels, 3, h, w, mask)
            for rep in range(args.repeats):
                t0 = time.perf_counter()
                _run_body_dense(x, pairs)
                t_dense = time.perf_counter() - t0
                t0 = time.perf_counter()
                _run_body_sparse(x, pairs, mask, cache)
                t_sparse = time.perf_counter() - t0
                rows.append(
                    {
                        "height": h,
                        "width": w,
                        "channels": args.channels,
                        "blocks": args.blocks,
                        "sparse_rate": rate,
                        "repeat": rep,
                        "active_pixels": mask.active_count(),
                        "dense_macs": dense_macs,
                        "sparse_macs": sparse_macs,
                        "dense_time_s": f"{t_dense:.6f}",
                        "sparse_time_s": f"{t_sparse:.6f}",
                        "time_ratio": f"{t_sparse / t_dense:.4f}",
                    }
                )

    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
    writer.writeheader()
    writer.writerows(rows)
    if args.out:
        Path(args.out).write_text(buf.getvalue())
        print(f"wrote {len(rows)} rows -> {args.out}")
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


def _suite_conv_oracle(rng, _inject) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(10):
        cin, cout = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        h, w = int(rng.integers(3, 9)), int(rng.integers(3, 9))
        x = rng.normal(size=(cin, h, w)).astype(np.float32)
        wts = ConvWeights(
            rng.normal(size=(cout, cin, 3, 3)).astype(np.float32),
            rng.normal(size=cout).astype(np.float32),
        )
        got = conv2d(x, wts, padding=1)
        ref = conv2d_reference(x, wts, padding=1)
        worst = max(worst, float(np.max(np.abs(got - ref))))
    return worst <= 1e-5, f"max |dense conv - loop oracle| = {worst:.2e}"


def _suite_sparse_dense(rng, inject) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(8):
        c = int(rng.integers(2, 9))
        h, w = int(rng.integers(4, 11)), int(rng.integers(4, 11))
        x = rng.normal(size=(c, h, w)).astype(np.float32)
        cache = rng.normal(size=(c, h, w)).astype(np.float32)
        std = np.sqrt(2.0 / (c * 9))
        w1 = ConvWeights(rng.normal(0, std, size=(c, c, 3, 3)).astype(np.float32), np.zeros(c, np.float32))
        w2 = ConvWeights(rng.normal(0, std, size=(c, c, 3, 3)).astype(np.float32), np.zeros(c, np.float32))
        mask = SpatialMask((rng.random((h, w)) < 0.5).astype(np.float32), "hard")
        w1_sparse = w1
        if inject:
            bad = w1.weight.copy()
            bad[0, 0, 0, 0] += 0.25
            w1_sparse = ConvWeights(bad, w1.bias)
        got = sparse_resblock(x, w1_sparse, w2, mask, cache)
        dense = dense_resblock(x, w1, w2)
        expect = np.where(mask.values[None] != 0, dense, cache)
        worst = max(worst, float(np.max(np.abs(got - expect))))
    return worst <= 1e-5, f"max |sparse - masked dense blend| = {worst:.2e}"


def _suite_warp_oracle(rng, _inject) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(10):
        c = int(rng.integers(1, 4))
        h, w = int(rng.integers(3, 10)), int(rng.integers(3, 10))
        src = rng.normal(size=(c, h, w)).astype(np.float32)
        motion = (rng.normal(size=(2, h, w)) * 2.0).astype(np.float32)
        worst = max(worst, float(np.max(np.abs(warp(src, motion) - warp_reference(src, motion)))))
        zero = warp(src, np.zeros((2, h, w), dtype=np.float32))
        if not np.array_equal(zero, src):
            return False, "zero-motion warp is not the identity"
    return worst <= 1e-6, f"max |warp - scalar oracle| = {worst:.2e}"


def _suite_schedules(_rng, _inject) -> tuple[bool, str]:
    for t in range(101):
        s = AnnealSchedule(t=t)
        if lambda_at(s) != min(t / 20, 1.0) * 0.004:
            return False, f"lambda mismatch at t={t}"
        if tau_at(s) != max(1.0 - t / 40, 0.5):
            return False, f"tau mismatch at t={t}"
    return True, "lambda/tau exact on t in 0..100"


def cmd_verify(args) -> int:
    suites = [
        ("conv-oracle", _suite_conv_oracle),
        ("sparse-dense", _suite_sparse_dense),
        ("warp-oracle", _suite_warp_oracle),
        ("schedules", _suite_schedules),
    ]
    failed = 0
    for name, fn in suites:
        ok, detail = fn(np.random.default_rng(args.seed), args.inject_corruption)
        print(f"{name}: {'PASS' if ok else 'FAIL'} ({detail})")
        failed += 0 if ok else 1
    return failed


def cmd_mask_stats(args) -> int:
    stream = _read_sidecar(args.sidecar)
    if args.emit_masks:
        Path(args.emit_masks).mkdir(parents=True, exist_ok=True)
    rows = []
    for i, rec in enumerate(stream.frames):
        mask = residual_mask(rec.residual, rec.frame_type)
        rate = sparse_rate(mask)
        rows.append({"index": i, "frame_type": rec.frame_type, "sparse_rate": rate})
        print(f"frame {i:4d} type {rec.frame_type}  sparse rate {rate:.6f}")
        if args.emit_masks:
            save_mask(Path(args.emit_masks) / f"mask_{i:06d}.png", mask.values)
    mean_rate = float(np.mean([r["sparse_rate"] for r in rows])) if rows else 0.0
    print(f"mean sparse rate {mean_rate:.6f} over {len(rows)} frames")
    if args.report:
        report = {
            "schema_version": REPORT_SCHEMA_VERSION,
            "command": "mask-stats",
            "engine_version": __version__,
            "sidecar": {
                "format_version": stream.version,
                "width": stream.width,
                "height": stream.height,
                "frame_count": stream.frame_count,
            },
            "frames": rows,
            "aggregate": {"mean_sparse_rate": mean_rate},
        }
        Path(args.report).write_text(json.dumps(report, indent=2) + "\n")
    return EXIT_OK


def cmd_profile(args) -> int:
    from .metrics import temporal_profile

    try:
        _, frames = load_frames(args.frames_dir)
        strip = temporal_profile(frames, args.row)
    except (FileNotFoundError, ValueError) as e:
        raise _DataError(str(e)) from e
    save_frame(args.out, strip)
    print(f"temporal profile of row {args.row} over {len(frames)} frames -> {args.out}")
    return EXIT_OK


_DISPATCH = {
    "upscale": cmd_upscale,
    "bench": cmd_bench,
    "verify": cmd_verify,
    "mask-stats": cmd_mask_stats,
    "profile": cmd_profile,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _DISPATCH[args.command](args)
    except _UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except _DataError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
