"""
Basic Augmentation
Per-clip resize, crop, rotation and colour jitter applied identically to every frame
"""
from dataclasses import dataclass, asdict
from typing import List, Optional, Tuple

import numpy as np
from scipy import ndimage

from config.settings import AugmentDefaults
from src.tensor.core import Tensor, VideoClip
from src.utils.errors import ConfigError, DataError


class CropTooLarge(DataError, ValueError):
    """Resized clip is smaller than the requested crop"""
    pass


@dataclass
class BasicAugConfig:
    """Basic Augmentation parameters"""
    resize_scale_range: Tuple[float, float] = AugmentDefaults.RESIZE_SCALE_RANGE
    crop_size: int = AugmentDefaults.CROP_SIZE
    brightness_jitter: float = AugmentDefaults.BRIGHTNESS_JITTER
    contrast_jitter: float = AugmentDefaults.CONTRAST_JITTER
    max_rotation_deg: float = AugmentDefaults.MAX_ROTATION_DEG

    def validate(self) -> List[str]:
        issues = []
        low, high = self.resize_scale_range
        if not 0 < low <= high:
            issues.append("basic_aug.resize_scale_range must satisfy 0 < low <= high")
        if self.crop_size < 1:
            issues.append("basic_aug.crop_size must be positive")
        if not 0 <= self.brightness_jitter < 1:
            issues.append("basic_aug.brightness_jitter must lie in [0, 1)")
        if not 0 <= self.contrast_jitter < 1:
            issues.append("basic_aug.contrast_jitter must lie in [0, 1)")
        if not 0 <= self.max_rotation_deg <= 10.0:
            # larger rotations confuse direction-dependent motion cues
            issues.append("basic_aug.max_rotation_deg must lie in [0, 10]")
        return issues

    def check(self):
        issues = self.validate()
        if issues:
            raise ConfigError("; ".join(issues))


@dataclass(frozen=True)
class BasicAugParams:
    """One draw of Basic Augmentation parameters for a whole clip"""
    scale: float
    crop_top: int
    crop_left: int
    angle: float
    brightness: float
    contrast: float

    def record(self) -> dict:
        return {"op": "basic", **asdict(self)}


def resized_shape(height: int, width: int, crop_size: int, scale: float) -> Tuple[int, int, float]:
    """Target (H, W) and zoom factor giving a short side of crop_size * scale"""
    zoom = crop_size * scale / min(height, width)
    return int(round(height * zoom)), int(round(width * zoom)), zoom


def resize_frames(frames: Tensor, height: int, width: int) -> Tensor:
    """Bilinear resize of [T, H, W, C] frames to [T, height, width, C]"""
    T, H, W, C = frames.shape
    if (H, W) == (height, width):
        return frames
    factors = (1.0, height / H, width / W, 1.0)
    out = ndimage.zoom(frames, factors, order=1, mode="nearest", grid_mode=False)
    return out[:, :height, :width, :]


def draw_params(clip: VideoClip, cfg: BasicAugConfig, rng: np.random.Generator) -> BasicAugParams:
    """Draw the per-clip parameters (one draw each, fixed order)"""
    scale = float(rng.uniform(*cfg.resize_scale_range))
    new_h, new_w, _ = resized_shape(clip.height, clip.width, cfg.crop_size, scale)
    if new_h < cfg.crop_size or new_w < cfg.crop_size:
        raise CropTooLarge(
            f"{clip.source_id}: resized {new_h}x{new_w} smaller than crop {cfg.crop_size}"
        )
    crop_top = int(rng.integers(new_h - cfg.crop_size + 1))
    crop_left = int(rng.integers(new_w - cfg.crop_size + 1))
    angle = float(rng.uniform(-cfg.max_rotation_deg, cfg.max_rotation_deg))
    brightness = float(rng.uniform(1 - cfg.brightness_jitter, 1 + cfg.brightness_jitter))
    contrast = float(rng.uniform(1 - cfg.contrast_jitter, 1 + cfg.contrast_jitter))
    return BasicAugParams(scale, crop_top, crop_left, angle, brightness, contrast)


def apply_params(clip: VideoClip, params: BasicAugParams, crop_size: int) -> VideoClip:
    """
    Apply drawn parameters to every frame of a clip

    Order: resize, rotate, crop, contrast, brightness. Colour follows
    clamp(clamp((x - 0.5) * c + 0.5) * b). Steps whose parameter is the
    identity are skipped, so the null draw returns the input unchanged.
    """
    new_h, new_w, _ = resized_shape(clip.height, clip.width, crop_size, params.scale)
    if new_h < crop_size or new_w < crop_size:
        raise CropTooLarge(f"{clip.source_id}: resized {new_h}x{new_w} smaller than crop {crop_size}")

    frames = resize_frames(clip.frames, new_h, new_w)

    if params.angle != 0.0:
        frames = ndimage.rotate(frames, params.angle, axes=(1, 2), reshape=False, order=1, mode="nearest")

    frames = frames[
        :,
        params.crop_top:params.crop_top + crop_size,
        params.crop_left:params.crop_left + crop_size,
        :,
    ]

    if params.contrast != 1.0:
        frames = np.clip((frames - 0.5) * params.contrast + 0.5, 0.0, 1.0)
    if params.brightness != 1.0:
        frames = np.clip(frames * params.brightness, 0.0, 1.0)
    else:
        frames = np.clip(frames, 0.0, 1.0)

    return clip.with_frames(frames)


def basic_augment(
    clip: VideoClip,
    cfg: BasicAugConfig,
    rng: np.random.Generator,
    params: Optional[BasicAugParams] = None
) -> Tuple[VideoClip, BasicAugParams]:
    """
    Basic Augmentation with one parameter draw per clip

    Args:
        clip: Input clip
        cfg: Basic Augmentation configuration
        rng: Seeded generator
        params: Pre-drawn parameters (drawn from rng when omitted)

    Returns:
        (augmented clip of crop_size x crop_size, parameters used)
    """
    if params is None:
        params = draw_params(clip, cfg, rng)
    return apply_params(clip, params, cfg.crop_size), params


def center_view(clip: VideoClip, crop_size: int) -> VideoClip:
    """Deterministic view: no jitter, unit scale, centred crop"""
    new_h, new_w, _ = resized_shape(clip.height, clip.width, crop_size, 1.0)
    params = BasicAugParams(
        scale=1.0,
        crop_top=(new_h - crop_size) // 2,
        crop_left=(new_w - crop_size) // 2,
        angle=0.0,
        brightness=1.0,
        contrast=1.0,
    )
    return apply_params(clip, params, crop_size)