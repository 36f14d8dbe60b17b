"""
Training Configuration
Optimizer schedule plus the sampling, augmentation, objective and model sections it drives
"""
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List

from config.settings import TrainDefaults
from src.augment.basic import BasicAugConfig
from src.augment.tca import TCAConfig
from src.model.encoder import EncoderSpec
from src.objective.loss import ObjectiveConfig
from src.sampling.triplet import SamplingConfig
from src.utils.errors import ConfigError


@dataclass
class TrainConfig:
    """
    Pretraining configuration

    Features:
    - SGD with momentum and weight decay on every parameter
    - step decay of the learning rate every lr_decay_every epochs
    - history network momentum m
    - nested sampling / augmentation / objective / model sections
    """
    lr0: float = TrainDefaults.LR0
    sgd_momentum: float = TrainDefaults.SGD_MOMENTUM
    weight_decay: float = TrainDefaults.WEIGHT_DECAY
    epochs: int = TrainDefaults.EPOCHS
    lr_decay_every: int = TrainDefaults.LR_DECAY_EVERY
    lr_decay_factor: float = TrainDefaults.LR_DECAY_FACTOR
    batch_size: int = TrainDefaults.BATCH_SIZE
    m: float = TrainDefaults.HISTORY_MOMENTUM
    seed: int = TrainDefaults.SEED
    tca_on_negative: bool = False

    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    basic_aug: BasicAugConfig = field(default_factory=BasicAugConfig)
    tca: TCAConfig = field(default_factory=TCAConfig)
    objective: ObjectiveConfig = field(default_factory=ObjectiveConfig)
    model: EncoderSpec = field(default_factory=EncoderSpec)

    def validate(self) -> List[str]:
        issues = []
        if not self.lr0 > 0:
            issues.append("train.lr0 must be positive")
        if not 0 <= self.sgd_momentum < 1:
            issues.append("train.sgd_momentum must lie in [0, 1)")
        if self.weight_decay < 0:
            issues.append("train.weight_decay must be non-negative")
        if self.epochs < 1:
            issues.append("train.epochs must be at least 1")
        if self.lr_decay_every < 1:
            issues.append("train.lr_decay_every must be at least 1")
        if not 0 < self.lr_decay_factor <= 1:
            issues.append("train.lr_decay_factor must lie in (0, 1]")
        if self.batch_size < 1:
            issues.append("train.batch_size must be at least 1")
        if not 0 <= self.m <= 1:
            issues.append("train.m must lie in [0, 1]")

        for section in (self.sampling, self.basic_aug, self.tca, self.objective, self.model):
            issues.extend(section.validate())

        if not issues:
            if self.sampling.clip_len % self.model.temporal_reduction:
                issues.append(
                    f"sampling.clip_len {self.sampling.clip_len} must be divisible by the "
                    f"encoder's temporal reduction {self.model.temporal_reduction}"
                )
            if self.basic_aug.crop_size % self.model.spatial_reduction:
                issues.append(
                    f"basic_aug.crop_size {self.basic_aug.crop_size} must be divisible by the "
                    f"encoder's spatial reduction {self.model.spatial_reduction}"
                )
            bank = self.objective.bank_size
            if bank and self.objective.use_bank_negatives and self.batch_size > bank:
                issues.append("train.batch_size must not exceed objective.bank_size")
        return issues

    def check(self):
        issues = self.validate()
        if issues:
            raise ConfigError("; ".join(issues))

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)
