"""Score-based adaptive iterative point cloud denoising."""

from ._core import (
    InvalidInputError,
    NumericalError,
    Schedule,
    apply_noise,
    chamfer,
    denoise_checkpoint,
    denoise_oracle,
    estimate_noise_variance,
    farthest_point_sample,
    forward_sample,
    ground_truth_score,
    knn,
    normalize_unit_sphere,
    point_to_surface,
    read_cloud,
    sample_shape,
    train,
    write_xyz,
)

__version__ = "0.1.0"

__all__ = [
    "InvalidInputError",
    "NumericalError",
    "Schedule",
    "apply_noise",
    "chamfer",
    "denoise_checkpoint",
    "denoise_oracle",
    "estimate_noise_variance",
    "farthest_point_sample",
    "forward_sample",
    "ground_truth_score",
    "knn",
    "normalize_unit_sphere",
    "point_to_surface",
    "read_cloud",
    "sample_shape",
    "train",
    "write_xyz",
]
