"""Shared fixture clips, encoded and extracted once per session."""

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest

from ciaf_extractor.encode import encode_clip
from ciaf_extractor.extract import ExtractionSummary, extract
from ciaf_extractor.fixtures import noise_clip, pan_clip, static_clip


@dataclass(frozen=True)
class FixtureRun:
    name: str
    clip: np.ndarray
    video: Path
    sidecar: Path
    summary: ExtractionSummary


@pytest.fixture(scope="session")
def fixture_runs(tmp_path_factory) -> dict[str, FixtureRun]:
    """static, pan, and noise clips taken through encode and extract."""
    root = tmp_path_factory.mktemp("clips")
    clips = {
        "static": (static_clip(6, 32, 48, seed=101), 23),
        "pan": (pan_clip(8, 32, 48, seed=102), 18),
        "noise": (noise_clip(5, 32, 48, seed=103), 23),
    }
    runs = {}
    for name, (clip, crf) in clips.items():
        video = root / f"{name}.mp4"
        sidecar = root / f"{name}.ciaf"
        encode_clip(clip, video, crf=crf)
        summary = extract(video, sidecar, crf=crf)
        runs[name] = FixtureRun(name, clip, video, sidecar, summary)
    return runs
