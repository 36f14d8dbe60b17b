"""
Training Module
Optimizer, checkpoints and the pretraining loop
"""
from src.training.config import TrainConfig
from src.training.optimizer import lr_at, sgd_update, TrainingError, NonFiniteGradient
from src.training.checkpoint import (
    CheckpointData,
    CheckpointCorrupt,
    MetricsLog,
    save_checkpoint,
    load_checkpoint,
    load_encoder,
    resolve_checkpoint,
)
from src.training.trainer import (
    TrainState,
    EmptyDataset,
    init_state,
    train_step,
    run_pretrain,
    prepare_triplets,
    batch_donors,
    epoch_order,
    state_from_checkpoint,
    METRICS_FILE,
)

__all__ = [
    "TrainConfig",
    "lr_at",
    "sgd_update",
    "TrainingError",
    "NonFiniteGradient",
    "CheckpointData",
    "CheckpointCorrupt",
    "MetricsLog",
    "save_checkpoint",
    "load_checkpoint",
    "load_encoder",
    "resolve_checkpoint",
    "TrainState",
    "EmptyDataset",
    "init_state",
    "train_step",
    "run_pretrain",
    "prepare_triplets",
    "batch_donors",
    "epoch_order",
    "state_from_checkpoint",
    "METRICS_FILE",
]
