"""
Synthetic Motion Dataset
Moving squares on static noise whose class is the motion direction alone
"""
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from scipy import ndimage

from config.settings import PerformanceConfig, SynthDefaults
from src.tensor.core import Tensor, VideoClip
from src.tensor.io import load_frame_dir, save_frame_dir
from src.utils.errors import ConfigError, DataError
from src.utils.logger import get_logger

logger = get_logger()

PathLike = Union[str, Path]

# (dy, dx) per class: up, down, left, right
DIRECTIONS: Tuple[Tuple[int, int], ...] = ((-1, 0), (1, 0), (0, -1), (0, 1))
DIRECTION_NAMES = ("up", "down", "left", "right")
LABELS_FILE = "labels.json"
SPLITS = ("train", "test")
BACKGROUND_SIGMA = 3.0


class ConfigInfeasible(ConfigError):
    """Synthetic configuration cannot be rendered"""
    pass


class DatasetError(DataError):
    """Dataset directory is malformed"""
    pass


@dataclass
class SynthConfig:
    """Synthetic dataset parameters (counts are per class)"""
    n_classes: int = SynthDefaults.N_CLASSES
    n_train: int = SynthDefaults.N_TRAIN
    n_test: int = SynthDefaults.N_TEST
    frame_size: int = SynthDefaults.FRAME_SIZE
    clip_len_source: int = SynthDefaults.CLIP_LEN_SOURCE
    square_size: int = SynthDefaults.SQUARE_SIZE
    speeds: Tuple[int, ...] = SynthDefaults.SPEEDS
    seed: int = SynthDefaults.SEED

    def validate(self) -> List[str]:
        issues = []
        if not 2 <= self.n_classes <= len(DIRECTIONS):
            issues.append(f"synth.n_classes must lie in [2, {len(DIRECTIONS)}]")
        if self.n_train < 1 or self.n_test < 1:
            issues.append("synth.n_train and synth.n_test must be positive")
        if self.clip_len_source < 2:
            issues.append("synth.clip_len_source must be at least 2")
        if self.square_size < 1:
            issues.append("synth.square_size must be positive")
        if not self.speeds or min(self.speeds) < 1:
            issues.append("synth.speeds must be non-empty positive integers")
        return issues

    def check(self):
        issues = self.validate()
        if issues:
            raise ConfigError("; ".join(issues))
        if self.square_size >= self.frame_size:
            raise ConfigInfeasible(
                f"square of {self.square_size}px does not fit with motion in a {self.frame_size}px frame"
            )


@dataclass
class LabeledDataset:
    """Videos with class labels, split into train and test"""
    train: List[VideoClip]
    train_labels: np.ndarray
    test: List[VideoClip]
    test_labels: np.ndarray
    n_classes: int
    meta: Dict = field(default_factory=dict)

    def __post_init__(self):
        self.train_labels = np.asarray(self.train_labels, dtype=np.int64)
        self.test_labels = np.asarray(self.test_labels, dtype=np.int64)
        if len(self.train) != len(self.train_labels) or len(self.test) != len(self.test_labels):
            raise DatasetError("every video needs exactly one label")

    def labels_map(self) -> Dict[str, int]:
        pairs = zip(self.train + self.test, np.concatenate([self.train_labels, self.test_labels]))
        return {clip.source_id: int(label) for clip, label in pairs}


def video_id(split: str, index: int) -> str:
    return f"{split}_{index:05d}"


def video_rng(cfg: SynthConfig, split: str, index: int) -> np.random.Generator:
    """Per-video generator, independent of every other video"""
    return np.random.default_rng([cfg.seed, SPLITS.index(split), index])


def split_size(cfg: SynthConfig, split: str) -> int:
    return cfg.n_classes * (cfg.n_train if split == "train" else cfg.n_test)


def split_labels(cfg: SynthConfig, split: str) -> np.ndarray:
    """
    Seeded shuffle of a balanced label multiset for one split

    Every class appears exactly n_train (or n_test) times; the order is drawn
    from a generator separate from the per-video appearance draws.
    """
    balanced = np.repeat(np.arange(cfg.n_classes), split_size(cfg, split) // cfg.n_classes)
    return np.random.default_rng([cfg.seed, len(SPLITS) + SPLITS.index(split)]).permutation(balanced)


def video_label(cfg: SynthConfig, split: str, index: int) -> int:
    return int(split_labels(cfg, split)[index])


def draw_appearance(cfg: SynthConfig, rng: np.random.Generator) -> Tuple[Tensor, Tensor]:
    """
    Background image and square colour, drawn before anything label-related

    Returns:
        (background [H, W, 3], colour [3])
    """
    size = cfg.frame_size
    noise = rng.uniform(size=(size, size, 3))
    smooth = ndimage.gaussian_filter(noise, sigma=(BACKGROUND_SIGMA, BACKGROUND_SIGMA, 0), mode="wrap")
    low, high = smooth.min(), smooth.max()
    background = 0.15 + 0.7 * (smooth - low) / max(high - low, 1e-12)
    color = rng.uniform(size=3)
    return background, color


def square_position(start: Tuple[int, int], direction: Tuple[int, int], speed: int, t: int, size: int):
    """Top-left corner at frame t, wrapped toroidally"""
    return (start[0] + direction[0] * speed * t) % size, (start[1] + direction[1] * speed * t) % size


def render_video(
    cfg: SynthConfig,
    split: str,
    index: int,
    label: Optional[int] = None
) -> Tuple[VideoClip, int]:
    """
    Render one video deterministically from (seed, split, index)

    Draw order: background, colour, speed, start position. The label comes
    from split_labels unless given.
    """
    rng = video_rng(cfg, split, index)
    background, color = draw_appearance(cfg, rng)
    if label is None:
        label = video_label(cfg, split, index)
    speed = int(rng.choice(cfg.speeds))
    size = cfg.frame_size
    start = (int(rng.integers(size)), int(rng.integers(size)))
    direction = DIRECTIONS[label]

    frames = np.repeat(background[None], cfg.clip_len_source, axis=0)
    offsets = np.arange(cfg.square_size)
    for t in range(cfg.clip_len_source):
        top, left = square_position(start, direction, speed, t, size)
        rows = (top + offsets) % size
        cols = (left + offsets) % size
        frames[t][np.ix_(rows, cols)] = color

    # exact PNG round trip
    frames = np.round(frames * 255.0) / 255.0
    return VideoClip(frames=frames, source_id=video_id(split, index)), label


def generate_synthetic(cfg: SynthConfig) -> LabeledDataset:
    """
    Generate the labelled motion dataset

    Args:
        cfg: Synthetic configuration

    Returns:
        LabeledDataset with n_classes * n_train training and
        n_classes * n_test test videos

    Raises:
        ConfigInfeasible: square does not fit in the frame
    """
    cfg.check()
    jobs = [
        (split, i, int(label))
        for split in SPLITS
        for i, label in enumerate(split_labels(cfg, split))
    ]

    with ThreadPoolExecutor(max_workers=max(1, PerformanceConfig.MAX_WORKERS)) as pool:
        rendered = list(pool.map(lambda job: render_video(cfg, *job), jobs))

    split_at = cfg.n_classes * cfg.n_train
    train, test = rendered[:split_at], rendered[split_at:]
    logger.info(
        f"Generated synthetic dataset: {len(train)} train / {len(test)} test videos, seed {cfg.seed}",
        category="evaluation",
    )
    return LabeledDataset(
        train=[clip for clip, _ in train],
        train_labels=[label for _, label in train],
        test=[clip for clip, _ in test],
        test_labels=[label for _, label in test],
        n_classes=cfg.n_classes,
        meta={"classes": list(DIRECTION_NAMES[:cfg.n_classes]), "seed": cfg.seed},
    )


def save_dataset(dataset: LabeledDataset, out_dir: PathLike) -> Path:
    """Write one PNG frame directory per video plus labels.json"""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for clip in dataset.train + dataset.test:
        save_frame_dir(clip, out_dir / clip.source_id)
    labels = dataset.labels_map()
    (out_dir / LABELS_FILE).write_text(json.dumps(labels, indent=2, sort_keys=True) + "\n")
    logger.info(f"Saved {len(labels)} videos to {out_dir}", category="evaluation")
    return out_dir


def load_dataset(data_dir: PathLike) -> LabeledDataset:
    """
    Read a dataset directory written by save_dataset

    Ids starting with "test_" form the test split; all others train.
    """
    data_dir = Path(data_dir)
    labels_path = data_dir / LABELS_FILE
    if not labels_path.is_file():
        raise DatasetError(f"{data_dir}: missing {LABELS_FILE}")
    try:
        labels = json.loads(labels_path.read_text())
    except json.JSONDecodeError as e:
        raise DatasetError(f"{labels_path}: {e}") from e
    if not isinstance(labels, dict) or not labels:
        raise DatasetError(f"{labels_path}: expected a non-empty object of video id -> class")

    splits = {"train": ([], []), "test": ([], [])}
    for vid in sorted(labels):
        clip = load_frame_dir(data_dir / vid)
        split = "test" if vid.startswith("test_") else "train"
        splits[split][0].append(clip)
        splits[split][1].append(int(labels[vid]))

    n_classes = int(max(labels.values())) + 1
    logger.info(
        f"Loaded {len(splits['train'][0])} train / {len(splits['test'][0])} test videos from {data_dir}",
        category="evaluation",
    )
    return LabeledDataset(
        train=splits["train"][0],
        train_labels=splits["train"][1],
        test=splits["test"][0],
        test_labels=splits["test"][1],
        n_classes=n_classes,
    )
