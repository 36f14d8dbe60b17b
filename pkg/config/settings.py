"""
Configuration Management Module
Centralized settings and the published defaults of every pipeline stage
"""
import os
from pathlib import Path
from typing import List, Optional, Tuple
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

LOG_LEVELS = frozenset({"TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR", "CRITICAL"})


def _env_path(name: str) -> Optional[Path]:
    value = os.getenv(name, "").strip()
    return Path(value) if value else None


class AppConfig:
    """Application Configuration"""
    ENV: str = os.getenv("APP_ENV", "development")
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")

    # File sinks only when a log directory is configured
    LOG_DIR: Optional[Path] = _env_path("VTDL_LOG_DIR")

    SEED_ENV_VAR: str = "VTDL_SEED"


class PerformanceConfig:
    """Parallelism Configuration"""
    MAX_WORKERS: int = int(os.getenv("MAX_WORKERS", "4"))


class SamplingDefaults:
    """Temporal triplet sampling defaults"""
    CLIP_LEN: int = 16           # "randomly sample 16 frames"
    TEMPORAL_STRIDE: int = 4     # "with temporal stride 4"
    TAU: int = 2                 # best tau on the small datasets
    CROP_SIZE: int = 20
    # minimum anchor/positive crop displacement = crop_size // 4; a 20px crop
    # in a 32px frame leaves a displaced positive for every anchor position


class AugmentDefaults:
    """Basic and Temporal Consistent Augmentation defaults"""
    RESIZE_SCALE_RANGE: Tuple[float, float] = (1.0, 1.15)
    CROP_SIZE: int = 32
    BRIGHTNESS_JITTER: float = 0.2
    CONTRAST_JITTER: float = 0.2
    MAX_ROTATION_DEG: float = 10.0

    ALPHA_RANGE: Tuple[float, float] = (0.5, 1.0)
    CUTOUT_FRAC_RANGE: Tuple[float, float] = (0.2, 0.4)
    CASCADE: Tuple[str, ...] = ("internal_mix", "external_mix", "cutout")


class ModelDefaults:
    """Encoder defaults"""
    BLOCKS: Tuple[Tuple[int, int, int], ...] = ((16, 2, 1), (32, 2, 2), (64, 2, 2))
    IN_CHANNELS: int = 3
    KERNEL_SIZE: int = 3
    EMBED_DIM: int = 128
    NORM_EPS: float = 1e-5
    ZERO_NORM_EPS: float = 1e-12


class ObjectiveDefaults:
    """Temporal-discriminative loss defaults"""
    TEMPERATURE: float = 0.07
    BANK_SIZE: int = 1024
    REDUCTION: str = "mean"


class TrainDefaults:
    """Pretraining schedule defaults"""
    LR0: float = 0.01
    SGD_MOMENTUM: float = 0.9
    WEIGHT_DECAY: float = 5e-4
    EPOCHS: int = 50
    LR_DECAY_EVERY: int = 10
    LR_DECAY_FACTOR: float = 0.1
    BATCH_SIZE: int = 32
    HISTORY_MOMENTUM: float = 0.99
    SEED: int = 0


class SynthDefaults:
    """Synthetic motion dataset defaults"""
    N_CLASSES: int = 4
    N_TRAIN: int = 128
    N_TEST: int = 32
    FRAME_SIZE: int = 32
    CLIP_LEN_SOURCE: int = 64
    SQUARE_SIZE: int = 8
    SPEEDS: Tuple[int, ...] = (1, 2)
    SEED: int = 0


class ProbeDefaults:
    """Linear probe defaults"""
    LR: float = 0.1
    EPOCHS: int = 100
    MOMENTUM: float = 0.9
    WEIGHT_DECAY: float = 0.0
    ENCODER: str = "history"   # pretraining hands over the history network


def seed_override() -> Optional[int]:
    """Seed from the environment, read at call time"""
    value = os.getenv(AppConfig.SEED_ENV_VAR, "").strip()
    if not value:
        return None
    return int(value)


def validate_config() -> List[str]:
    """Problems with environment-level settings, empty when they are usable"""
    issues = []

    if AppConfig.LOG_LEVEL.upper() not in LOG_LEVELS:
        issues.append(f"LOG_LEVEL '{AppConfig.LOG_LEVEL}' is not a valid level")

    if PerformanceConfig.MAX_WORKERS < 1:
        issues.append("MAX_WORKERS must be at least 1")

    try:
        seed_override()
    except ValueError:
        issues.append(f"{AppConfig.SEED_ENV_VAR} must be an integer")

    return issues


if __name__ == "__main__":
    print("🔧 Configuration Summary:")
    print(f"   Environment: {AppConfig.ENV}")
    print(f"   Log level: {AppConfig.LOG_LEVEL}")
    print(f"   Log dir: {AppConfig.LOG_DIR or '(console only)'}")
    print(f"   Workers: {PerformanceConfig.MAX_WORKERS}")
    for issue in validate_config():
        print(f"⚠️  {issue}")
