"""
Tensor I/O
VTDL binary tensor files and PNG frame directories
"""
import struct
from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from src.tensor.core import CropBox, Tensor, VideoClip, as_tensor
from src.utils.errors import DataError, StorageError
from src.utils.logger import get_logger

logger = get_logger()

PathLike = Union[str, Path]

MAGIC = b"VTDL"
# version -> little-endian payload dtype
PAYLOAD_DTYPES = {
    1: np.dtype("<f4"),
    2: np.dtype("<f8"),
}
_HEADER = struct.Struct("<4sBB")


class TensorFormatError(StorageError):
    """Malformed VTDL tensor file"""
    pass


class BadMagic(TensorFormatError):
    """File does not start with the VTDL magic bytes"""
    pass


class VersionMismatch(TensorFormatError):
    """Unsupported format version"""
    pass


class TruncatedPayload(TensorFormatError):
    """File ends before the declared payload"""
    pass


class MissingFrames(DataError):
    """Fewer than two readable frames in a directory"""
    pass


class InconsistentDimensions(DataError):
    """Frames of one directory differ in size or channel count"""
    pass


def encode_tensor(tensor: Tensor, version: int = 1) -> bytes:
    """
    Serialize a tensor to the VTDL byte layout

    Layout: magic "VTDL", u8 version, u8 rank, rank x u32 dims,
    row-major payload (f32 for version 1, f64 for version 2).
    """
    if version not in PAYLOAD_DTYPES:
        raise VersionMismatch(f"cannot write format version {version}")
    array = as_tensor(tensor)
    if array.ndim > 255:
        raise TensorFormatError(f"rank {array.ndim} does not fit in one byte")

    header = _HEADER.pack(MAGIC, version, array.ndim)
    dims = struct.pack(f"<{array.ndim}I", *array.shape)
    payload = array.astype(PAYLOAD_DTYPES[version]).tobytes(order="C")
    return header + dims + payload


def decode_tensor(blob: bytes) -> Tensor:
    """Parse VTDL bytes back into a float64 tensor"""
    if len(blob) < len(MAGIC):
        raise TruncatedPayload(f"only {len(blob)} bytes, header incomplete")
    if blob[:4] != MAGIC:
        raise BadMagic(f"bad magic {blob[:4]!r}")
    if len(blob) < _HEADER.size:
        raise TruncatedPayload("header incomplete")

    _, version, rank = _HEADER.unpack_from(blob, 0)
    if version not in PAYLOAD_DTYPES:
        raise VersionMismatch(f"unsupported format version {version}")

    offset = _HEADER.size
    dims_size = 4 * rank
    if len(blob) < offset + dims_size:
        raise TruncatedPayload(f"dims for rank {rank} incomplete")
    shape = struct.unpack_from(f"<{rank}I", blob, offset)
    offset += dims_size

    dtype = PAYLOAD_DTYPES[version]
    count = int(np.prod(shape, dtype=np.int64))
    expected = count * dtype.itemsize
    available = len(blob) - offset
    if available < expected:
        raise TruncatedPayload(
            f"shape {list(shape)} needs {count} values, payload holds {available // dtype.itemsize}"
        )
    if available > expected:
        raise TensorFormatError(f"{available - expected} trailing bytes after payload")

    data = np.frombuffer(blob, dtype=dtype, count=count, offset=offset)
    return data.astype(np.float64).reshape(shape)


def save_tensor(tensor: Tensor, path: PathLike, version: int = 1) -> None:
    """
    Write a tensor to a VTDL file

    Args:
        tensor: Array to store
        path: Destination file
        version: 1 (f32 payload) or 2 (f64 payload, used by checkpoints)
    """
    path = Path(path)
    path.write_bytes(encode_tensor(tensor, version))
    logger.debug(f"Saved tensor {list(np.shape(tensor))} to {path}", category="tensor_io")


def load_tensor(path: PathLike) -> Tensor:
    """Read a VTDL tensor file"""
    path = Path(path)
    return decode_tensor(path.read_bytes())


def _read_frame(path: Path) -> np.ndarray:
    with Image.open(path) as image:
        if image.mode not in ("L", "RGB"):
            image = image.convert("RGB")
        array = np.asarray(image, dtype=np.uint8)
    if array.ndim == 2:
        array = array[:, :, None]
    return array


def load_frame_dir(path: PathLike) -> VideoClip:
    """
    Load a directory of 8-bit images as one clip

    Frames are ordered by file name; unreadable files are skipped.

    Args:
        path: Directory of image files

    Returns:
        VideoClip with values scaled by 1/255, start 0, stride 1

    Raises:
        MissingFrames: fewer than two readable images
        InconsistentDimensions: frames differ in H, W or C
    """
    path = Path(path)
    if not path.is_dir():
        raise MissingFrames(f"{path} is not a directory")

    frames = []
    for file in sorted((p for p in path.iterdir() if p.is_file()), key=lambda p: p.name):
        try:
            frames.append((file.name, _read_frame(file)))
        except (UnidentifiedImageError, OSError) as e:
            logger.warning(f"Skipping unreadable frame {file}: {e}", category="tensor_io")

    if len(frames) < 2:
        raise MissingFrames(f"{path}: {len(frames)} readable frames, need at least 2")

    first_name, first = frames[0]
    for name, frame in frames[1:]:
        if frame.shape != first.shape:
            raise InconsistentDimensions(
                f"{path}: {name} has shape {frame.shape}, {first_name} has {first.shape}"
            )

    stacked = np.stack([f for _, f in frames], axis=0).astype(np.float64) / 255.0
    _, H, W, _ = stacked.shape
    logger.debug(f"Loaded {len(frames)} frames from {path}", category="tensor_io")
    return VideoClip(
        frames=stacked,
        source_id=path.name,
        start_timestep=0,
        temporal_stride=1,
        crop_box=CropBox(0, 0, H, W),
    )


def save_frame_dir(clip: VideoClip, path: PathLike) -> Path:
    """
    Write every frame of a clip as an 8-bit PNG

    Args:
        clip: Clip to store
        path: Target directory (created if missing)

    Returns:
        The directory written
    """
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    pixels = np.rint(clip.frames * 255.0).astype(np.uint8)
    for j, frame in enumerate(pixels):
        if frame.shape[-1] == 1:
            image = Image.fromarray(frame[:, :, 0])
        else:
            image = Image.fromarray(frame)
        image.save(path / f"frame_{j:04d}.png")
    return path
