"""
Sampling Module
Clip windows and temporal triplets
"""
from src.sampling.triplet import (
    SamplingConfig,
    TemporalTriplet,
    sample_clip,
    sample_triplet,
    negative_start_candidates,
    sample_negative_start,
    check_video,
    CropOutOfBounds,
    VideoTooShort,
    FrameTooSmall,
)

__all__ = [
    "SamplingConfig",
    "TemporalTriplet",
    "sample_clip",
    "sample_triplet",
    "negative_start_candidates",
    "sample_negative_start",
    "check_video",
    "CropOutOfBounds",
    "VideoTooShort",
    "FrameTooSmall",
]
