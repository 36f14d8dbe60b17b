"""
Temporal Consistent Augmentation
Video cutout and internal/external image mixing that scale every time derivative by a constant
"""
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from config.settings import AugmentDefaults
from src.augment.basic import resize_frames
from src.tensor.core import CropBox, ShapeMismatch, Tensor, VideoClip, as_tensor
from src.utils.errors import ConfigError, DataError
from src.utils.logger import get_logger

logger = get_logger()

CASCADE_STEPS = ("internal_mix", "external_mix", "cutout")


class RegionOutOfBounds(DataError, ValueError):
    """Cutout region extends past the frame"""
    pass


class MissingDonor(DataError):
    """External mix needs a donor clip from another video"""
    pass


@dataclass
class TCAConfig:
    """Temporal Consistent Augmentation parameters"""
    alpha_range: Tuple[float, float] = AugmentDefaults.ALPHA_RANGE
    cutout_frac_range: Tuple[float, float] = AugmentDefaults.CUTOUT_FRAC_RANGE
    enable_cutout: bool = True
    enable_internal_mix: bool = True
    enable_external_mix: bool = True
    cascade: Tuple[str, ...] = AugmentDefaults.CASCADE

    @property
    def any_enabled(self) -> bool:
        return self.enable_cutout or self.enable_internal_mix or self.enable_external_mix

    def validate(self) -> List[str]:
        issues = []
        low, high = self.alpha_range
        if not 0.0 <= low <= high <= 1.0:
            issues.append("tca.alpha_range must satisfy 0 <= low <= high <= 1")
        low, high = self.cutout_frac_range
        if not 0.0 <= low <= high <= 1.0:
            issues.append("tca.cutout_frac_range must satisfy 0 <= low <= high <= 1")
        if sorted(self.cascade) != sorted(CASCADE_STEPS):
            issues.append(f"tca.cascade must be a permutation of {list(CASCADE_STEPS)}")
        return issues

    def check(self):
        issues = self.validate()
        if issues:
            raise ConfigError("; ".join(issues))


def video_cutout(clip: VideoClip, region: CropBox) -> VideoClip:
    """
    Zero one spatial region in every frame

    Equivalent to the mix formula with alpha = 1 and a mask constant in time.
    """
    region = CropBox(*region)
    if not region.fits(clip.height, clip.width):
        raise RegionOutOfBounds(
            f"{clip.source_id}: region {tuple(region)} outside {clip.height}x{clip.width} frame"
        )
    frames = np.array(clip.frames)
    frames[:, region.top:region.top + region.height, region.left:region.left + region.width, :] = 0.0
    return clip.with_frames(frames)


def tca_mix(clip: VideoClip, mix_frame: Tensor, alpha: float) -> VideoClip:
    """
    Blend one static image into every frame: x_j <- alpha * x_j + (1 - alpha) * N

    The k-th time difference of the result is alpha times that of the input.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    mix_frame = as_tensor(mix_frame)
    if mix_frame.shape != clip.frames.shape[1:]:
        raise ShapeMismatch(
            f"{clip.source_id}: mix frame {list(mix_frame.shape)} vs frames {list(clip.frames.shape[1:])}"
        )
    if alpha == 1.0:
        return clip.with_frames(clip.frames)
    return clip.with_frames(alpha * clip.frames + (1.0 - alpha) * mix_frame[None])


def _fit_frame(frame: Tensor, clip: VideoClip) -> Tensor:
    if frame.shape[:2] == (clip.height, clip.width):
        return frame
    return resize_frames(frame[None], clip.height, clip.width)[0]


def _cutout_region(clip: VideoClip, cfg: TCAConfig, rng: np.random.Generator) -> CropBox:
    frac_h, frac_w = rng.uniform(*cfg.cutout_frac_range, size=2)
    h = int(round(frac_h * clip.height))
    w = int(round(frac_w * clip.width))
    top = int(rng.integers(clip.height - h + 1))
    left = int(rng.integers(clip.width - w + 1))
    return CropBox(top, left, h, w)


def apply_tca(
    clip: VideoClip,
    donor: Optional[VideoClip],
    cfg: TCAConfig,
    rng: np.random.Generator
) -> Tuple[VideoClip, List[dict]]:
    """
    Cascade of internal mix, external mix and cutout

    Each mix draws its own alpha from alpha_range; the internal mix image
    is a random frame of the clip itself, the external one a random frame
    of the donor (resized to the clip when sizes differ).

    Args:
        clip: Clip to augment
        donor: Clip from a different video (required for external mix)
        cfg: TCA configuration
        rng: Seeded generator

    Returns:
        (augmented clip, record of applied transforms)
    """
    if cfg.enable_external_mix:
        if donor is None or donor.source_id == clip.source_id:
            raise MissingDonor(f"{clip.source_id}: external mix needs a clip from another video")

    record: List[dict] = []
    out = clip
    for step in cfg.cascade:
        if step == "internal_mix" and cfg.enable_internal_mix:
            alpha = float(rng.uniform(*cfg.alpha_range))
            index = int(rng.integers(clip.length))
            out = tca_mix(out, clip.frames[index], alpha)
            record.append({"op": "internal_mix", "alpha": alpha, "frame_index": index})
        elif step == "external_mix" and cfg.enable_external_mix:
            alpha = float(rng.uniform(*cfg.alpha_range))
            index = int(rng.integers(donor.length))
            if donor.channels != clip.channels:
                raise ShapeMismatch(f"donor {donor.source_id} has {donor.channels} channels, clip {clip.channels}")
            out = tca_mix(out, _fit_frame(donor.frames[index], clip), alpha)
            record.append({
                "op": "external_mix",
                "alpha": alpha,
                "frame_index": index,
                "donor_id": donor.source_id,
            })
        elif step == "cutout" and cfg.enable_cutout:
            region = _cutout_region(clip, cfg, rng)
            out = video_cutout(out, region)
            record.append({"op": "cutout", "region": list(region)})

    logger.debug(f"TCA on {clip.source_id}: {[r['op'] for r in record]}", category="augment")
    return out, record


def derivative_scale(record: List[dict]) -> float:
    """Product of the mix alphas in a TCA record"""
    scale = 1.0
    for entry in record:
        if entry["op"] in ("internal_mix", "external_mix"):
            scale *= entry["alpha"]
    return scale


def cutout_regions(record: List[dict]) -> List[CropBox]:
    """Cutout boxes listed in a TCA record"""
    return [CropBox(*entry["region"]) for entry in record if entry["op"] == "cutout"]
