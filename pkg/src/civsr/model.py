"""Unidirectional recurrent SR cell with baseline, MV-aligned, and sparse variants.

Per-frame dataflow (4x scale):

    warped_hidden = warp(h_prev, MV)            # identity for baseline
    x = act(head(concat(frame, warped_hidden))) # dense always
    x = resblocks(x)                            # dense, or residual-gated sparse
    h_t = tail(x)                               # dense always, becomes next hidden
    hr  = rgb(ps2(ps2(act(up(h_t))))) + bilinear(frame, 4)

The sparse variant gates every resblock with the frame's residual mask and
feeds inactive pixels from that block's MV-warped previous output, so a
fully-skipped frame replays the previous step end to end.

Weight bundles are stored in the format documented in docs/weights.md.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .alignment import build_motion_tensor, warp
from .sidecar import MotionField, ResidualMap
from .sparse import (
    LEAKY_SLOPE,
    LayerCache,
    count_flops,
    dense_resblock,
    residual_mask,
    sparse_rate,
    sparse_resblock,
)
from .tensor_core import ConvWeights, bilinear_upsample, conv2d, feature_tensor, leaky_relu, pixel_shuffle

__all__ = [
    "VARIANTS",
    "MASK_CNN_CHANNELS",
    "ModelConfig",
    "RecurrentState",
    "WeightBundle",
    "StepReport",
    "WeightBundleError",
    "WeightChecksumError",
    "required_tensor_shapes",
    "init_random_weights",
    "save_weights",
    "load_weights",
    "validate_weights",
    "init_state",
    "step",
]

VARIANTS = ("baseline", "mv_aligned", "mv_residual_sparse")
MASK_CNN_CHANNELS = 32

_WEIGHTS_TAG = "CIVSRW"
_WEIGHTS_VERSION = 1


class WeightBundleError(Exception):
    pass


class WeightChecksumError(WeightBundleError):
    pass


@dataclass(frozen=True)
class ModelConfig:
    num_resblocks: int = 7
    channels: int = 128
    scale: int = 4
    input_channels: int = 3
    variant: str = "mv_residual_sparse"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.scale < 1 or self.scale & (self.scale - 1):
            raise ValueError(f"scale must be a power of 2, got {self.scale}")
        if self.channels % (self.scale * self.scale) != 0:
            raise ValueError(f"channels {self.channels} not divisible by scale^2 = {self.scale ** 2}")
        if min(self.num_resblocks, self.channels, self.input_channels) < 1:
            raise ValueError("num_resblocks, channels, input_channels must be positive")


@dataclass(frozen=True)
class RecurrentState:
    """Hidden features h_{t-1} plus, for the sparse variant, per-resblock caches."""

    hidden: np.ndarray
    cache: LayerCache | None = None


@dataclass(frozen=True)
class StepReport:
    frame_type: str
    sparse_rate: float
    body_macs: int
    dense_body_macs: int
    total_macs: int
    dense_total_macs: int


@dataclass(frozen=True)
class WeightBundle:
    """Named float32 tensor map for one model (plus the mask-CNN head)."""

    tensors: dict

    def __post_init__(self):
        fixed = {}
        for name, arr in self.tensors.items():
            fixed[str(name)] = np.ascontiguousarray(arr, dtype=np.float32)
        object.__setattr__(self, "tensors", fixed)

    def conv(self, name: str) -> ConvWeights:
        for suffix in (".weight", ".bias"):
            if name + suffix not in self.tensors:
                raise WeightBundleError(f"weight bundle is missing tensor {name + suffix!r}")
        return ConvWeights(self.tensors[name + ".weight"], self.tensors[name + ".bias"])

    def sha256(self) -> str:
        payload = b"".join(self.tensors[n].tobytes() for n in sorted(self.tensors))
        return hashlib.sha256(payload).hexdigest()


def required_tensor_shapes(cfg: ModelConfig) -> dict:
    """Tensor-name -> shape manifest a bundle must satisfy for ``cfg``."""
    c, ic = cfg.channels, cfg.input_channels
    shapes = {}

    def conv_entry(name, out_c, in_c, k=3):
        shapes[f"{name}.weight"] = (out_c, in_c, k, k)
        shapes[f"{name}.bias"] = (out_c,)

    conv_entry("head", c, ic + c)
    for i in range(cfg.num_resblocks):
        conv_entry(f"body.{i}.conv1", c, c)
        conv_entry(f"body.{i}.conv2", c, c)
    conv_entry("tail", c, c)
    conv_entry("up.conv", c, c)
    conv_entry("up.rgb", ic, c // (cfg.scale * cfg.scale))
    conv_entry("mask_cnn.conv1", MASK_CNN_CHANNELS, ic + c)
    conv_entry("mask_cnn.conv2", MASK_CNN_CHANNELS, MASK_CNN_CHANNELS)
    conv_entry("mask_cnn.conv3", 2, MASK_CNN_CHANNELS)
    return shapes


def validate_weights(bundle: WeightBundle, cfg: ModelConfig) -> None:
    """Raise WeightBundleError naming the first missing or misshapen tensor."""
    for name, shape in required_tensor_shapes(cfg).items():
        if name not in bundle.tensors:
            raise WeightBundleError(f"weight bundle is missing tensor {name!r}")
        have = bundle.tensors[name].shape
        if have != shape:
            raise WeightBundleError(f"tensor {name!r} has shape {have}, expected {shape}")


def init_random_weights(cfg: ModelConfig, seed: int) -> WeightBundle:
    """Seeded Kaiming-style init: weights ~ N(0, 2/fan_in), biases zero."""
    rng = np.random.default_rng(seed)
    tensors = {}
    for name, shape in required_tensor_shapes(cfg).items():
        if name.endswith(".bias"):
            tensors[name] = np.zeros(shape, dtype=np.float32)
        else:
            fan_in = shape[1] * shape[2] * shape[3]
            std = np.sqrt(2.0 / fan_in)
            tensors[name] = rng.normal(0.0, std, size=shape).astype(np.float32)
    return WeightBundle(tensors)


def save_weights(bundle: WeightBundle) -> bytes:
    """Serialize: ASCII tag line, JSON manifest, then raw little-endian float32."""
    names = sorted(bundle.tensors)
    chunks = []
    entries = []
    offset = 0
    for name in names:
        arr = bundle.tensors[name]
        raw = arr.astype("<f4").tobytes()
        entries.append({"name": name, "shape": list(arr.shape), "offset": offset})
        chunks.append(raw)
        offset += len(raw)
    payload = b"".join(chunks)
    manifest = {
        "tensors": entries,
        "payload_bytes": len(payload),
        "sha256": hashlib.sha256(payload).hexdigest(),
    }
    header = json.dumps(manifest, sort_keys=True).encode("utf-8")
    head_line = f"{_WEIGHTS_TAG} {_WEIGHTS_VERSION} {len(header)}\n".encode("ascii")
    return head_line + header + payload


def load_weights(data: bytes) -> WeightBundle:
    """Parse :func:`save_weights` output, verifying the payload checksum."""
    nl = data.find(b"\n")
    if nl < 0:
        raise WeightBundleError("missing header line")
    parts = data[:nl].split(b" ")
    if len(parts) != 3 or parts[0] != _WEIGHTS_TAG.encode("ascii"):
        raise WeightBundleError(f"bad header line {data[:nl]!r}")
    if int(parts[1]) != _WEIGHTS_VERSION:
        raise WeightBundleError(f"unsupported weights version {parts[1].decode()}")
    header_len = int(parts[2])
    header_end = nl + 1 + header_len
    if len(data) < header_end:
        raise WeightBundleError("truncated manifest")
    manifest = json.loads(data[nl + 1 : header_end].decode("utf-8"))
    payload = data[header_end:]
    if len(payload) != manifest["payload_bytes"]:
        raise WeightBundleError(
            f"payload is {len(payload)} bytes, manifest says {manifest['payload_bytes']}"
        )
    digest = hashlib.sha256(payload).hexdigest()
    if digest != manifest["sha256"]:
        raise WeightChecksumError(f"payload sha256 {digest} != manifest {manifest['sha256']}")
    tensors = {}
    for entry in manifest["tensors"]:
        shape = tuple(entry["shape"])
        n = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(payload, dtype="<f4", count=n, offset=entry["offset"])
        tensors[entry["name"]] = arr.reshape(shape)
    return WeightBundle(tensors)


def init_state(cfg: ModelConfig, height: int, width: int) -> RecurrentState:
    """All-zero hidden features; zero per-layer caches for the sparse variant."""
    hidden = np.zeros((cfg.channels, height, width), dtype=np.float32)
    cache = None
    if cfg.variant == "mv_residual_sparse":
        cache = LayerCache(tuple(np.zeros_like(hidden) for _ in range(cfg.num_resblocks)))
    return RecurrentState(hidden=hidden, cache=cache)


def _upsample_path(h_t: np.ndarray, frame: np.ndarray, cfg: ModelConfig, weights: WeightBundle) -> np.ndarray:
    x = leaky_relu(conv2d(h_t, weights.conv("up.conv"), padding=1), LEAKY_SLOPE)
    stages = cfg.scale
    while stages > 1:
        x = pixel_shuffle(x, 2)
        stages //= 2
    hr = conv2d(x, weights.conv("up.rgb"), padding=1)
    return (hr + bilinear_upsample(frame, cfg.scale)).astype(np.float32)


def step(
    frame: np.ndarray,
    motion: MotionField,
    residual: ResidualMap,
    frame_type: str,
    state: RecurrentState,
    cfg: ModelConfig,
    weights: WeightBundle,
):
    """Advance the recurrence one frame.

    Returns (hr_frame (ic, scale*H, scale*W), new_state, StepReport).
    """
    if state is None:
        raise ValueError("state is uninitialized; call init_state first")
    frame = feature_tensor(frame, channels=cfg.input_channels)
    validate_weights(weights, cfg)
    c, (h, w) = cfg.channels, frame.shape[1:]
    if state.hidden.shape != (c, h, w):
        raise ValueError(f"hidden dims {state.hidden.shape} != expected {(c, h, w)}")
    if (motion.height, motion.width) != (h, w) or (residual.height, residual.width) != (h, w):
        raise ValueError("motion/residual dims must match the frame")
    if frame_type not in ("I", "P"):
        raise ValueError(f"frame_type must be 'I' or 'P', got {frame_type!r}")
    if cfg.variant == "mv_residual_sparse" and (state.cache is None or len(state.cache) != cfg.num_resblocks):
        raise ValueError("sparse variant requires a populated per-resblock cache")

    aligned = cfg.variant in ("mv_aligned", "mv_residual_sparse")
    motion_px = build_motion_tensor(motion) if aligned else None
    warped_hidden = warp(state.hidden, motion_px) if aligned else state.hidden

    x = leaky_relu(conv2d(np.concatenate([frame, warped_hidden]), weights.conv("head"), padding=1), LEAKY_SLOPE)

    body_macs = 0
    per_conv_dense = count_flops(c, c, 3, h, w)
    dense_body_macs = 2 * cfg.num_resblocks * per_conv_dense
    rate = 0.0
    new_cache = None
    if cfg.variant == "mv_residual_sparse":
        mask = residual_mask(residual, frame_type)
        rate = sparse_rate(mask)
        per_conv_sparse = count_flops(c, c, 3, h, w, mask)
        outputs = []
        for i in range(cfg.num_resblocks):
            cached = warp(state.cache.layers[i], motion_px)
            x = sparse_resblock(x, weights.conv(f"body.{i}.conv1"), weights.conv(f"body.{i}.conv2"), mask, cached)
            outputs.append(x)
            body_macs += 2 * per_conv_sparse
        new_cache = LayerCache(tuple(outputs))
    else:
        for i in range(cfg.num_resblocks):
            x = dense_resblock(x, weights.conv(f"body.{i}.conv1"), weights.conv(f"body.{i}.conv2"))
            body_macs += 2 * per_conv_dense

    h_t = conv2d(x, weights.conv("tail"), padding=1)
    hr = _upsample_path(h_t, frame, cfg, weights)

    head_macs = count_flops(cfg.input_channels + c, c, 3, h, w)
    tail_macs = count_flops(c, c, 3, h, w)
    up_macs = count_flops(c, c, 3, h, w) + count_flops(
        c // (cfg.scale * cfg.scale), cfg.input_channels, 3, h * cfg.scale, w * cfg.scale
    )
    overhead = head_macs + tail_macs + up_macs
    report = StepReport(
        frame_type=frame_type,
        sparse_rate=rate,
        body_macs=body_macs,
        dense_body_macs=dense_body_macs,
        total_macs=overhead + body_macs,
        dense_total_macs=overhead + dense_body_macs,
    )
    return hr, RecurrentState(hidden=h_t, cache=new_cache), report
