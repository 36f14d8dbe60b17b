"""
Temporal Triplet Sampler
Strided clip sampling and anchor/positive/negative generation
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from config.settings import SamplingDefaults
from src.tensor.core import CropBox, VideoClip
from src.utils.errors import ConfigError, DataError
from src.utils.logger import get_logger

logger = get_logger()


class CropOutOfBounds(DataError, ValueError):
    """Crop box extends past the frame"""
    pass


class VideoTooShort(DataError):
    """No negative start satisfies |t_a - t_n| > tau"""
    pass


class FrameTooSmall(DataError):
    """Frame admits no second crop box at the required displacement"""
    pass


@dataclass
class SamplingConfig:
    """Clip and triplet sampling parameters"""
    clip_len: int = SamplingDefaults.CLIP_LEN
    temporal_stride: int = SamplingDefaults.TEMPORAL_STRIDE
    tau: int = SamplingDefaults.TAU
    crop_size: int = SamplingDefaults.CROP_SIZE
    min_crop_offset: Optional[int] = None   # None -> crop_size // 4

    @property
    def crop_offset(self) -> int:
        if self.min_crop_offset is not None:
            return self.min_crop_offset
        return max(1, self.crop_size // 4)

    def validate(self) -> List[str]:
        issues = []
        if self.clip_len < 2:
            issues.append("sampling.clip_len must be at least 2")
        if self.temporal_stride < 1:
            issues.append("sampling.temporal_stride must be positive")
        if self.tau < 0:
            issues.append("sampling.tau must be non-negative")
        if self.crop_size < 1:
            issues.append("sampling.crop_size must be positive")
        if self.min_crop_offset is not None and self.min_crop_offset < 1:
            issues.append("sampling.min_crop_offset must be positive")
        return issues

    def check(self):
        issues = self.validate()
        if issues:
            raise ConfigError("; ".join(issues))


@dataclass(eq=False)
class TemporalTriplet:
    """Anchor, positive and negative clips cut from one video"""
    anchor: VideoClip
    positive: VideoClip
    negative: VideoClip
    t_a: int
    t_p: int
    t_n: int
    augmentation_record: Dict[str, List[dict]] = field(
        default_factory=lambda: {"anchor": [], "positive": [], "negative": []}
    )

    @property
    def source_id(self) -> str:
        return self.anchor.source_id


def sample_clip(
    video: VideoClip,
    t_start: int,
    cfg: SamplingConfig,
    crop: Optional[CropBox] = None
) -> VideoClip:
    """
    Cut a strided, spatially cropped clip out of a source video

    Frame indices are (t_start + i * stride) mod L for i < clip_len, so
    windows longer than the video loop back to its beginning.

    Args:
        video: Source video
        t_start: Start timestep in source frames
        cfg: Sampling configuration
        crop: Spatial box (full frame if omitted)

    Returns:
        VideoClip of shape [clip_len, crop.height, crop.width, C]
    """
    L = video.length
    crop = CropBox(0, 0, video.height, video.width) if crop is None else CropBox(*crop)
    if crop.is_empty or not crop.fits(video.height, video.width):
        raise CropOutOfBounds(
            f"{video.source_id}: crop {tuple(crop)} outside {video.height}x{video.width} frame"
        )

    indices = (t_start + np.arange(cfg.clip_len) * cfg.temporal_stride) % L
    frames = video.frames[
        indices,
        crop.top:crop.top + crop.height,
        crop.left:crop.left + crop.width,
    ]
    return VideoClip(
        frames=frames,
        source_id=video.source_id,
        start_timestep=int(t_start % L),
        temporal_stride=cfg.temporal_stride,
        crop_box=crop,
    )


def negative_start_candidates(L: int, t_a: int, tau: int) -> np.ndarray:
    """
    All start timesteps t in [0, L) with |t_a - t| > tau

    Returns:
        Sorted integer array (possibly empty)
    """
    if L < 1:
        raise ValueError(f"video length must be positive, got {L}")
    starts = np.arange(L)
    return starts[np.abs(t_a - starts) > tau]


def sample_negative_start(L: int, t_a: int, tau: int, rng: np.random.Generator) -> int:
    """Uniform draw from negative_start_candidates"""
    candidates = negative_start_candidates(L, t_a, tau)
    if candidates.size == 0:
        raise VideoTooShort(f"no negative start for t_a={t_a}, tau={tau}, L={L}")
    return int(candidates[rng.integers(candidates.size)])


def _feasible_anchor_starts(L: int, tau: int) -> np.ndarray:
    # t_a admits a negative iff some t in [0, L) lies more than tau away
    starts = np.arange(L)
    farthest = np.maximum(starts, (L - 1) - starts)
    return starts[farthest > tau]


def _random_crop(height: int, width: int, size: int, rng: np.random.Generator) -> CropBox:
    top = int(rng.integers(height - size + 1))
    left = int(rng.integers(width - size + 1))
    return CropBox(top, left, size, size)


def _displaced_crop(
    anchor: CropBox,
    height: int,
    width: int,
    min_offset: int,
    rng: np.random.Generator
) -> Optional[CropBox]:
    tops, lefts = np.meshgrid(
        np.arange(height - anchor.height + 1),
        np.arange(width - anchor.width + 1),
        indexing="ij",
    )
    far = (np.abs(tops - anchor.top) >= min_offset) | (np.abs(lefts - anchor.left) >= min_offset)
    choices = np.flatnonzero(far)
    if choices.size == 0:
        return None
    pick = choices[rng.integers(choices.size)]
    return CropBox(int(tops.flat[pick]), int(lefts.flat[pick]), anchor.height, anchor.width)


def check_video(video: VideoClip, cfg: SamplingConfig):
    """
    Raise unless sample_triplet succeeds for every draw on this video

    Raises:
        FrameTooSmall: crop larger than the frame, or some anchor crop
            position has no partner displaced by crop_offset
        VideoTooShort: no start pair satisfies the tau constraint
    """
    size = cfg.crop_size
    if size > video.height or size > video.width:
        raise FrameTooSmall(
            f"{video.source_id}: crop {size} larger than {video.height}x{video.width} frame"
        )
    # the most central anchor position is farthest ceil(slack / 2) from any edge position
    reach = max(-(-(video.height - size) // 2), -(-(video.width - size) // 2))
    if reach < cfg.crop_offset:
        raise FrameTooSmall(
            f"{video.source_id}: {video.height}x{video.width} frame leaves no crop displaced by "
            f"{cfg.crop_offset}px for every anchor"
        )
    if _feasible_anchor_starts(video.length, cfg.tau).size == 0:
        raise VideoTooShort(f"{video.source_id}: L={video.length} admits no negative with tau={cfg.tau}")


def sample_triplet(
    video: VideoClip,
    cfg: SamplingConfig,
    rng: np.random.Generator
) -> TemporalTriplet:
    """
    Generate one temporal triplet from a video

    - Anchor: uniform start and crop.
    - Positive: same start and stride, crop displaced by at least
      min_crop_offset pixels along some axis.
    - Negative: uniform start with |t_a - t_n| > tau, independent crop.

    Args:
        video: Source video
        cfg: Sampling configuration
        rng: Seeded generator (consumed in a fixed order)

    Returns:
        TemporalTriplet

    Raises:
        VideoTooShort: no start pair satisfies the tau constraint
        FrameTooSmall: crop does not fit or no displaced crop exists
    """
    L = video.length
    size = cfg.crop_size
    if size > video.height or size > video.width:
        raise FrameTooSmall(
            f"{video.source_id}: crop {size} larger than {video.height}x{video.width} frame"
        )

    anchor_starts = _feasible_anchor_starts(L, cfg.tau)
    if anchor_starts.size == 0:
        raise VideoTooShort(f"{video.source_id}: L={L} admits no negative with tau={cfg.tau}")

    t_a = int(anchor_starts[rng.integers(anchor_starts.size)])
    anchor_crop = _random_crop(video.height, video.width, size, rng)
    positive_crop = _displaced_crop(anchor_crop, video.height, video.width, cfg.crop_offset, rng)
    if positive_crop is None:
        raise FrameTooSmall(
            f"{video.source_id}: no crop displaced by {cfg.crop_offset}px in a "
            f"{video.height}x{video.width} frame"
        )
    t_n = sample_negative_start(L, t_a, cfg.tau, rng)
    negative_crop = _random_crop(video.height, video.width, size, rng)

    triplet = TemporalTriplet(
        anchor=sample_clip(video, t_a, cfg, anchor_crop),
        positive=sample_clip(video, t_a, cfg, positive_crop),
        negative=sample_clip(video, t_n, cfg, negative_crop),
        t_a=t_a,
        t_p=t_a,
        t_n=t_n,
    )
    logger.debug(
        f"Triplet {video.source_id}: t_a={t_a} t_n={t_n} "
        f"crops {tuple(anchor_crop)} / {tuple(positive_crop)} / {tuple(negative_crop)}",
        category="sampling",
    )
    return triplet
