"""
Tensor Core
Video clips, time derivatives and on-disk tensor formats
"""
from src.tensor.core import (
    Tensor,
    CropBox,
    VideoClip,
    as_tensor,
    frame_difference,
    stack_clips,
    NonFiniteTensor,
    InvalidClip,
    OrderTooLarge,
    ShapeMismatch,
)
from src.tensor.io import (
    save_tensor,
    load_tensor,
    load_frame_dir,
    save_frame_dir,
    TensorFormatError,
    BadMagic,
    VersionMismatch,
    TruncatedPayload,
    MissingFrames,
    InconsistentDimensions,
)

__all__ = [
    "Tensor",
    "CropBox",
    "VideoClip",
    "as_tensor",
    "frame_difference",
    "stack_clips",
    "NonFiniteTensor",
    "InvalidClip",
    "OrderTooLarge",
    "ShapeMismatch",
    "save_tensor",
    "load_tensor",
    "load_frame_dir",
    "save_frame_dir",
    "TensorFormatError",
    "BadMagic",
    "VersionMismatch",
    "TruncatedPayload",
    "MissingFrames",
    "InconsistentDimensions",
]
