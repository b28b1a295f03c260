import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from civsr.cli import main
from civsr.frames import load_frames, save_frame
from civsr.model import ModelConfig, init_random_weights, save_weights
from civsr.sidecar import serialize_sidecar
from civsr.synth import rated_sequence, repeated_sequence

SCHEMA_PATH = Path(__file__).resolve().parents[1] / "docs" / "report.schema.json"


def make_fixture(tmp_path, h=16, w=16, n_p=3, active=64, seed=3, with_gt=True):
    cfg = ModelConfig(num_resblocks=2, channels=16, scale=4, variant="mv_residual_sparse")
    (tmp_path / "w.bin").write_bytes(save_weights(init_random_weights(cfg, seed=0)))
    frames, stream = rated_sequence(h, w, n_p_frames=n_p, active_count=active, seed=seed)
    (tmp_path / "lr").mkdir()
    for i, f in enumerate(frames):
        save_frame(tmp_path / "lr" / f"frame_{i:04d}.png", f)
    if with_gt:
        (tmp_path / "gt").mkdir()
        for i, f in enumerate(frames):
            up = np.repeat(np.repeat(f, 4, axis=1), 4, axis=2)
            save_frame(tmp_path / "gt" / f"frame_{i:04d}.png", up)
    (tmp_path / "clip.ciaf").write_bytes(serialize_sidecar(stream))
    return len(frames)


def read_report(path):
    return json.loads(Path(path).read_text())


def test_upscale_end_to_end(tmp_path):
    n = make_fixture(tmp_path)
    rc = main(
        [
            "upscale",
            str(tmp_path / "lr"),
            str(tmp_path / "clip.ciaf"),
            str(tmp_path / "w.bin"),
            str(tmp_path / "out"),
            "--gt",
            str(tmp_path / "gt"),
            "--report",
            str(tmp_path / "report.json"),
            "--emit-masks",
        ]
    )
    assert rc == 0
    names, hr = load_frames(tmp_path / "out")
    assert len(hr) == n and hr[0].shape == (3, 64, 64)
    masks = sorted((tmp_path / "out" / "masks").glob("*.png"))
    assert len(masks) == n
    report = read_report(tmp_path / "report.json")
    assert report["command"] == "upscale"
    assert len(report["frames"]) == n
    assert {"psnr_y", "ssim"} <= set(report["frames"][0])
    assert report["aggregate"]["body_macs"] < report["aggregate"]["dense_body_macs"]
    assert 0 < report["aggregate"]["total_savings"] < report["aggregate"]["body_savings"] < 1


def test_upscale_report_validates_against_schema(tmp_path):
    jsonschema = pytest.importorskip("jsonschema")
    make_fixture(tmp_path)
    rc = main(
        [
            "upscale",
            str(tmp_path / "lr"),
            str(tmp_path / "clip.ciaf"),
            str(tmp_path / "w.bin"),
            str(tmp_path / "out"),
            "--report",
            str(tmp_path / "report.json"),
        ]
    )
    assert rc == 0
    schema = json.loads(SCHEMA_PATH.read_text())
    report = read_report(tmp_path / "report.json")
    jsonschema.validate(report, schema)
    assert "psnr_y" not in report["frames"][0]  # no --gt, no quality fields
    assert "mean_psnr_y" not in report["aggregate"]


def test_upscale_zero_residual_reports_full_sparse_rate(tmp_path):
    cfg = ModelConfig(num_resblocks=2, channels=16, scale=4, variant="mv_residual_sparse")
    (tmp_path / "w.bin").write_bytes(save_weights(init_random_weights(cfg, seed=0)))
    frames, stream = repeated_sequence(16, 16, 4, seed=1)
    (tmp_path / "lr").mkdir()
    for i, f in enumerate(frames):
        save_frame(tmp_path / "lr" / f"f_{i:03d}.png", f)
    (tmp_path / "clip.ciaf").write_bytes(serialize_sidecar(stream))
    rc = main(
        [
            "upscale",
            str(tmp_path / "lr"),
            str(tmp_path / "clip.ciaf"),
            str(tmp_path / "w.bin"),
            str(tmp_path / "out"),
            "--report",
            str(tmp_path / "r.json"),
        ]
    )
    assert rc == 0
    report = read_report(tmp_path / "r.json")
    for row in report["frames"][1:]:
        assert row["sparse_rate"] == 1.0 and row["body_macs"] == 0


def test_upscale_is_deterministic_modulo_wall_time(tmp_path):
    make_fixture(tmp_path, with_gt=False)
    args = [
        "upscale",
        str(tmp_path / "lr"),
        str(tmp_path / "clip.ciaf"),
        str(tmp_path / "w.bin"),
    ]
    assert main(args + [str(tmp_path / "out1"), "--report", str(tmp_path / "r1.json")]) == 0
    assert main(args + [str(tmp_path / "out2"), "--report", str(tmp_path / "r2.json")]) == 0
    for a, b in zip(sorted((tmp_path / "out1").glob("*.png")), sorted((tmp_path / "out2").glob("*.png"))):
        assert a.read_bytes() == b.read_bytes()

    def strip_wall(rep):
        for row in rep["frames"]:
            row.pop("wall_time_s")
        rep["aggregate"].pop("mean_wall_time_s")
        return rep

    assert strip_wall(read_report(tmp_path / "r1.json")) == strip_wall(read_report(tmp_path / "r2.json"))


def test_upscale_variant_flags_map_to_model_variants(tmp_path):
    make_fixture(tmp_path, with_gt=False)
    base = [
        "upscale",
        str(tmp_path / "lr"),
        str(tmp_path / "clip.ciaf"),
        str(tmp_path / "w.bin"),
    ]
    for flag, expect_sparse in (("baseline", False), ("mv", False), ("mv-res", True)):
        rc = main(
            base
            + [str(tmp_path / f"out_{flag}"), "--variant", flag, "--report", str(tmp_path / f"{flag}.json")]
        )
        assert rc == 0
        report = read_report(tmp_path / f"{flag}.json")
        rates = [row["sparse_rate"] for row in report["frames"][1:]]
        assert all(r > 0 for r in rates) if expect_sparse else all(r == 0 for r in rates)


def test_upscale_frame_count_mismatch_is_data_error(tmp_path):
    make_fixture(tmp_path, with_gt=False)
    extra = np.zeros((3, 16, 16), dtype=np.float32)
    save_frame(tmp_path / "lr" / "frame_9999.png", extra)
    rc = main(
        [
            "upscale",
            str(tmp_path / "lr"),
            str(tmp_path / "clip.ciaf"),
            str(tmp_path / "w.bin"),
            str(tmp_path / "out"),
        ]
    )
    assert rc == 2


def test_upscale_corrupt_weights_is_data_error(tmp_path):
    make_fixture(tmp_path, with_gt=False)
    blob = bytearray((tmp_path / "w.bin").read_bytes())
    blob[-3] ^= 0xFF
    (tmp_path / "w.bin").write_bytes(bytes(blob))
    rc = main(
        [
            "upscale",
            str(tmp_path / "lr"),
            str(tmp_path / "clip.ciaf"),
            str(tmp_path / "w.bin"),
            str(tmp_path / "out"),
        ]
    )
    assert rc == 2


def test_usage_error_exits_one(capsys):
    assert main([]) == 1
    assert main(["upscale"]) == 1
    assert main(["bench", "--sizes", "axb"]) == 1
    assert main(["bench", "--rates", "2.0"]) == 1
    capsys.readouterr()


def test_verify_passes_and_inject_fails():
    assert main(["verify"]) == 0
    assert main(["verify", "--inject-corruption"]) == 1


def test_bench_macs_column_is_exact(tmp_path):
    out = tmp_path / "bench.csv"
    rc = main(
        [
            "bench",
            "--channels",
            "8",
            "--blocks",
            "2",
            "--sizes",
            "12x12,8x16",
            "--rates",
            "0,0.5,0.75,1.0",
            "--repeats",
            "2",
            "--out",
            str(out),
        ]
    )
    assert rc == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 2 * 4 * 2  # sizes * rates * repeats
    for row in rows:
        h, w = int(row["height"]), int(row["width"])
        c, blocks = int(row["channels"]), int(row["blocks"])
        dense = 2 * blocks * 9 * c * c * h * w
        assert int(row["dense_macs"]) == dense
        active = int(row["active_pixels"])
        assert int(row["sparse_macs"]) == 2 * blocks * 9 * c * c * active
        rate = float(row["sparse_rate"])
        assert active == round((1.0 - rate) * h * w)


def test_mask_stats_reports_rates(tmp_path, capsys):
    make_fixture(tmp_path, h=16, w=16, n_p=2, active=64, with_gt=False)
    rc = main(
        [
            "mask-stats",
            str(tmp_path / "clip.ciaf"),
            "--report",
            str(tmp_path / "ms.json"),
            "--emit-masks",
            str(tmp_path / "masks"),
        ]
    )
    assert rc == 0
    report = read_report(tmp_path / "ms.json")
    rates = [row["sparse_rate"] for row in report["frames"]]
    assert rates[0] == 0.0  # I frame
    assert all(r == 0.75 for r in rates[1:])  # 64 active of 256
    assert report["aggregate"]["mean_sparse_rate"] == pytest.approx(0.5)
    assert len(list((tmp_path / "masks").glob("*.png"))) == 3
    capsys.readouterr()


def test_mask_stats_bad_sidecar_is_data_error(tmp_path, capsys):
    (tmp_path / "junk.ciaf").write_bytes(b"JUNKJUNKJUNKJUNK")
    assert main(["mask-stats", str(tmp_path / "junk.ciaf")]) == 2
    assert main(["mask-stats", str(tmp_path / "absent.ciaf")]) == 2
    capsys.readouterr()


def test_profile_writes_strip(tmp_path, capsys):
    make_fixture(tmp_path, with_gt=False)
    out = tmp_path / "strip.png"
    rc = main(["profile", str(tmp_path / "lr"), "4", "--out", str(out)])
    assert rc == 0
    assert out.exists()
    rc = main(["profile", str(tmp_path / "lr"), "99", "--out", str(out)])
    assert rc == 2  # row out of range
    capsys.readouterr()


def test_console_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "civsr.cli", "verify", "--seed", "1"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.count("PASS") == 4
