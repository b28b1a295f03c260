"""Acceptance suite: one test per criterion, one PASS/FAIL line each.

Verification is route-independent: sidecars are re-read through the
engine's parser, decoded luma comes straight from the bridge, and the
prediction is recomputed with an inline scalar sampler written separately
from the library code.
"""

import numpy as np
import pytest

from ciaf_extractor import _codec
from ciaf_extractor.encode import encode_clip
from ciaf_extractor.fixtures import static_clip

from civsr.sidecar import parse_sidecar, serialize_sidecar


def report(name, ok, detail):
    print(f"[{name}] {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"{name}: {detail}"


def predict_loops(reference, motion):
    """Scalar bilinear prediction: sample ref at (pos + mv/4), clamped."""
    h, w = reference.shape
    ref = reference.astype(np.float64)
    out = np.zeros((h, w), dtype=np.int64)
    for y in range(h):
        for x in range(w):
            sy = min(max(y + motion[y, x, 0] / 4.0, 0.0), h - 1.0)
            sx = min(max(x + motion[y, x, 1] / 4.0, 0.0), w - 1.0)
            y0, x0 = int(sy), int(sx)
            y1, x1 = min(y0 + 1, h - 1), min(x0 + 1, w - 1)
            wy, wx = sy - y0, sx - x0
            top = ref[y0, x0] * (1.0 - wx) + ref[y0, x1] * wx
            bottom = ref[y1, x0] * (1.0 - wx) + ref[y1, x1] * wx
            out[y, x] = int(np.rint(top * (1.0 - wy) + bottom * wy))
    return out


def test_secondary_01_warp_plus_residual_reproduces_decoded_luma(fixture_runs):
    checked_frames = 0
    checked_pixels = 0
    for run in fixture_runs.values():
        stream = parse_sidecar(run.sidecar.read_bytes())
        decoded = _codec.decode(str(run.video))
        assert stream.frame_count == len(decoded)
        for t, frame in enumerate(stream.frames):
            if frame.frame_type != "P":
                continue
            predicted = predict_loops(decoded[t - 1].luma, frame.motion.mv)
            recon = predicted + frame.residual.res.astype(np.int64)
            cur = decoded[t].luma.astype(np.int64)
            mismatches = int((recon != cur).sum())
            assert mismatches == 0, (
                f"{run.name} frame {t}: {mismatches} pixels off"
            )
            checked_frames += 1
            checked_pixels += cur.size
    report(
        "extractor-identity",
        checked_frames >= 3,
        f"exact on {checked_pixels} pixels over {checked_frames} P-frames, "
        f"fixtures: {', '.join(fixture_runs)}",
    )


def test_secondary_02_static_scene_sparse_rate(fixture_runs):
    run = fixture_runs["static"]
    stream = parse_sidecar(run.sidecar.read_bytes())
    rates = [
        float((f.residual.res == 0).mean())
        for f in stream.frames
        if f.frame_type == "P"
    ]
    mean_rate = float(np.mean(rates))
    ok = len(rates) >= 1 and mean_rate >= 0.99
    report(
        "extractor-static-skip",
        ok,
        f"mean sparse rate {mean_rate:.4f} over {len(rates)} P-frames (>= 0.99)",
    )
    assert run.summary.mean_sparse_rate == pytest.approx(mean_rate)


def test_secondary_03_pan_modal_motion_magnitude(fixture_runs):
    run = fixture_runs["pan"]
    stream = parse_sidecar(run.sidecar.read_bytes())
    mags = np.concatenate(
        [
            np.abs(f.motion.mv).max(axis=-1).ravel()
            for f in stream.frames
            if f.frame_type == "P"
        ]
    )
    values, counts = np.unique(mags, return_counts=True)
    mode = int(values[counts.argmax()])
    report(
        "extractor-pan-motion",
        mode == 4,
        f"modal |mv| {mode}/4 px over {mags.size} pixels "
        f"(histogram {dict(zip(values.tolist(), counts.tolist()))})",
    )


def test_secondary_04_engine_parser_accepts_outputs_byte_identically(fixture_runs):
    verified = []
    for run in fixture_runs.values():
        blob = run.sidecar.read_bytes()
        stream = parse_sidecar(blob)
        assert serialize_sidecar(stream) == blob
        assert stream.frames[0].frame_type == "I"
        verified.append(f"{run.name}:{len(blob)}B")
    report(
        "extractor-parser-acceptance",
        len(verified) == 3,
        "parse/serialize byte identity for " + ", ".join(verified),
    )


def test_secondary_05_encoder_contract(fixture_runs, tmp_path):
    bad_crfs = []
    for crf in (-1, 52):
        with pytest.raises(ValueError):
            encode_clip(static_clip(2, 32, 32, seed=1), tmp_path / "x.mp4", crf=crf)
        bad_crfs.append(crf)
    counts_ok = []
    for count in (1, 4):
        path = tmp_path / f"rt{count}.mp4"
        encode_clip(static_clip(count, 32, 32, seed=2), path)
        counts_ok.append(len(_codec.decode(str(path))) == count)
    report(
        "extractor-encode-contract",
        all(counts_ok),
        f"crf {bad_crfs} rejected; decode returns the encoded frame count "
        f"for T in (1, 4)",
    )
