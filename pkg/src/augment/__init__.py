"""
Augmentation Module
Basic Augmentation and Temporal Consistent Augmentation
"""
from src.augment.basic import (
    BasicAugConfig,
    BasicAugParams,
    basic_augment,
    center_view,
    resize_frames,
    CropTooLarge,
)
from src.augment.tca import (
    TCAConfig,
    video_cutout,
    tca_mix,
    apply_tca,
    derivative_scale,
    cutout_regions,
    RegionOutOfBounds,
    ShapeMismatch,
    MissingDonor,
)
from src.augment.pipeline import augment_triplet

__all__ = [
    "BasicAugConfig",
    "BasicAugParams",
    "basic_augment",
    "center_view",
    "resize_frames",
    "CropTooLarge",
    "TCAConfig",
    "video_cutout",
    "tca_mix",
    "apply_tca",
    "derivative_scale",
    "cutout_regions",
    "RegionOutOfBounds",
    "ShapeMismatch",
    "MissingDonor",
    "augment_triplet",
]
