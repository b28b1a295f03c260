"""Codec-information-assisted video super-resolution inference engine.

A recurrent 4x upscaler that reuses two streams a video decoder already
produces: block motion vectors (for aligning the hidden state between
frames) and the prediction residual (for deciding which pixels actually
need recomputation in the residual blocks).
"""

__version__ = "0.1.0"

from .alignment import build_motion_tensor, warp
from .metrics import charbonnier, psnr_y, ssim_rgb, temporal_profile
from .model import (
    ModelConfig,
    RecurrentState,
    StepReport,
    WeightBundle,
    WeightBundleError,
    WeightChecksumError,
    init_random_weights,
    init_state,
    load_weights,
    required_tensor_shapes,
    save_weights,
    step,
    validate_weights,
)
from .sidecar import (
    MotionField,
    ResidualMap,
    SidecarDimError,
    SidecarError,
    SidecarFormatError,
    SidecarFrame,
    SidecarMagicError,
    SidecarStream,
    SidecarTruncatedError,
    SidecarVersionError,
    mv_to_pixels,
    parse_sidecar,
    serialize_sidecar,
)
from .sparse import (
    AnnealSchedule,
    LayerCache,
    SpatialMask,
    count_flops,
    dense_resblock,
    gumbel_mask,
    gumbel_mask_grad,
    lambda_at,
    mask_cnn_forward,
    residual_mask,
    sample_gumbel,
    sparse_rate,
    sparse_resblock,
    sparsity_loss,
    tau_at,
)
from .tensor_core import (
    ConvWeights,
    bilinear_upsample,
    conv2d,
    feature_tensor,
    leaky_relu,
    pixel_shuffle,
    pixel_unshuffle,
)

__all__ = [
    "__version__",
    "AnnealSchedule",
    "ConvWeights",
    "LayerCache",
    "ModelConfig",
    "MotionField",
    "RecurrentState",
    "ResidualMap",
    "SidecarDimError",
    "SidecarError",
    "SidecarFormatError",
    "SidecarFrame",
    "SidecarMagicError",
    "SidecarStream",
    "SidecarTruncatedError",
    "SidecarVersionError",
    "SpatialMask",
    "StepReport",
    "WeightBundle",
    "WeightBundleError",
    "WeightChecksumError",
    "bilinear_upsample",
    "build_motion_tensor",
    "charbonnier",
    "conv2d",
    "count_flops",
    "dense_resblock",
    "feature_tensor",
    "gumbel_mask",
    "gumbel_mask_grad",
    "init_random_weights",
    "init_state",
    "lambda_at",
    "leaky_relu",
    "load_weights",
    "mask_cnn_forward",
    "mv_to_pixels",
    "parse_sidecar",
    "pixel_shuffle",
    "pixel_unshuffle",
    "psnr_y",
    "required_tensor_shapes",
    "residual_mask",
    "sample_gumbel",
    "save_weights",
    "serialize_sidecar",
    "sparse_rate",
    "sparse_resblock",
    "sparsity_loss",
    "ssim_rgb",
    "step",
    "tau_at",
    "temporal_profile",
    "validate_weights",
    "warp",
]
