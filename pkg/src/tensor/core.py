"""
Tensor Core
Float64 tensors, video clips and discrete time derivatives
"""
from dataclasses import dataclass, replace
from typing import Any, NamedTuple, Optional, Sequence, Union

import numpy as np

from src.utils.errors import DataError

# A tensor is a float64 numpy array; shape and row-major data come with it.
Tensor = np.ndarray

# Pixel values produced by convex blends may overshoot [0, 1] by rounding.
_RANGE_TOLERANCE = 1e-9


class NonFiniteTensor(DataError, ValueError):
    """Tensor contains NaN or Inf"""
    pass


class InvalidClip(DataError, ValueError):
    """Frames do not form a valid [T, H, W, C] clip"""
    pass


class OrderTooLarge(DataError, ValueError):
    """Derivative order is not smaller than the clip length"""
    pass


class ShapeMismatch(DataError, ValueError):
    """Two tensors that must align have different shapes"""
    pass


class CropBox(NamedTuple):
    """Spatial box in source pixels"""
    top: int
    left: int
    height: int
    width: int

    @property
    def is_empty(self) -> bool:
        return self.height == 0 or self.width == 0

    def fits(self, height: int, width: int) -> bool:
        """True if the box lies inside a height x width frame"""
        return (
            self.top >= 0 and self.left >= 0
            and self.height >= 0 and self.width >= 0
            and self.top + self.height <= height
            and self.left + self.width <= width
        )

    def offset_from(self, other: "CropBox") -> int:
        """Largest axis displacement between two boxes"""
        return max(abs(self.top - other.top), abs(self.left - other.left))


def as_tensor(data: Any) -> Tensor:
    """
    Convert array-like data to a finite float64 tensor

    Args:
        data: Array-like input

    Returns:
        C-contiguous float64 array

    Raises:
        NonFiniteTensor: if any element is NaN or Inf
    """
    array = np.ascontiguousarray(data, dtype=np.float64)
    if not np.all(np.isfinite(array)):
        raise NonFiniteTensor(f"tensor of shape {list(array.shape)} contains non-finite values")
    return array


@dataclass(frozen=True, eq=False)
class VideoClip:
    """
    A [T, H, W, C] clip with values in [0, 1] and its provenance

    The frame array is copied on construction and marked read-only,
    so clips can be shared freely between threads.
    """
    frames: Tensor
    source_id: str = "clip"
    start_timestep: int = 0
    temporal_stride: int = 1
    crop_box: Optional[CropBox] = None

    def __post_init__(self):
        frames = as_tensor(self.frames).copy()

        if frames.ndim != 4:
            raise InvalidClip(f"{self.source_id}: expected [T, H, W, C] frames, got shape {list(frames.shape)}")
        T, H, W, C = frames.shape
        if T < 2:
            raise InvalidClip(f"{self.source_id}: a clip needs at least 2 frames, got {T}")
        if C not in (1, 3):
            raise InvalidClip(f"{self.source_id}: channel count must be 1 or 3, got {C}")
        if H < 1 or W < 1:
            raise InvalidClip(f"{self.source_id}: empty spatial extent {H}x{W}")

        low, high = float(frames.min()), float(frames.max())
        if low < -_RANGE_TOLERANCE or high > 1.0 + _RANGE_TOLERANCE:
            raise InvalidClip(f"{self.source_id}: pixel values outside [0, 1] (min {low}, max {high})")
        np.clip(frames, 0.0, 1.0, out=frames)
        frames.setflags(write=False)

        if self.start_timestep < 0:
            raise InvalidClip(f"{self.source_id}: negative start timestep {self.start_timestep}")
        if self.temporal_stride < 1:
            raise InvalidClip(f"{self.source_id}: temporal stride must be positive")

        object.__setattr__(self, "frames", frames)
        if self.crop_box is None:
            object.__setattr__(self, "crop_box", CropBox(0, 0, H, W))
        else:
            object.__setattr__(self, "crop_box", CropBox(*self.crop_box))

    @property
    def length(self) -> int:
        return self.frames.shape[0]

    @property
    def height(self) -> int:
        return self.frames.shape[1]

    @property
    def width(self) -> int:
        return self.frames.shape[2]

    @property
    def channels(self) -> int:
        return self.frames.shape[3]

    @property
    def shape(self) -> tuple:
        return self.frames.shape

    def with_frames(self, frames: Tensor, **changes) -> "VideoClip":
        """Copy of this clip with new frames (and optional metadata changes)"""
        return replace(self, frames=frames, **changes)


ClipLike = Union[VideoClip, np.ndarray]


def _frames_of(clip: ClipLike) -> Tensor:
    if isinstance(clip, VideoClip):
        return clip.frames
    return as_tensor(clip)


def frame_difference(clip: ClipLike, order: int = 1) -> Tensor:
    """
    k-th forward difference along the time axis

    Δ¹[j] = frames[j+1] - frames[j] and Δᵏ = Δ¹(Δᵏ⁻¹).

    Args:
        clip: VideoClip or [T, ...] array
        order: Positive derivative order k < T

    Returns:
        Array of shape [T - k, H, W, C]
    """
    frames = _frames_of(clip)
    if order < 1:
        raise ValueError(f"derivative order must be positive, got {order}")
    if order >= frames.shape[0]:
        raise OrderTooLarge(f"order {order} needs more than {frames.shape[0]} frames")
    return np.diff(frames, n=order, axis=0)


def stack_clips(clips: Sequence[ClipLike]) -> Tensor:
    """Stack clips of equal shape into a [B, T, H, W, C] batch"""
    return np.stack([_frames_of(c) for c in clips], axis=0)
