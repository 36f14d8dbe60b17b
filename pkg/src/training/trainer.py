"""
Trainer
Temporal-discriminative pretraining loop: triplets, dual-network forward, SGD, bank push, momentum update
"""
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import tensorflow as tf

from config.settings import PerformanceConfig
from src.augment.pipeline import augment_triplet
from src.augment.tca import MissingDonor
from src.model.encoder import check_input, encode, forward, init_params, value_and_gradients
from src.model.momentum import EncoderPair, momentum_update
from src.model.params import Params, check_aligned, global_norm, zeros_like
from src.objective.bank import MemoryBank, bank_init, bank_push
from src.objective.loss import td_loss_tf
from src.sampling.triplet import TemporalTriplet, check_video, sample_triplet
from src.tensor.core import VideoClip, stack_clips
from src.training.checkpoint import CheckpointData, MetricsLog, load_checkpoint, save_checkpoint
from src.training.config import TrainConfig
from src.training.optimizer import lr_at, sgd_update
from src.utils.errors import ConfigError, DataError
from src.utils.logger import get_logger

logger = get_logger()

PathLike = Union[str, Path]
METRICS_FILE = "metrics.jsonl"


class EmptyDataset(DataError):
    """Pretraining needs at least one video"""
    pass


@dataclass
class TrainState:
    """
    Everything that changes during pretraining

    Random draws are derived from (seed, epoch, step), so the counters
    are the generator state.
    """
    pair: EncoderPair
    velocity: Params
    bank: MemoryBank
    epoch: int = 0
    step: int = 0

    def __post_init__(self):
        check_aligned(self.pair.online, self.velocity, "velocity")


def init_state(cfg: TrainConfig) -> TrainState:
    """Fresh state: parameters then bank drawn from one seeded generator"""
    rng = np.random.default_rng(cfg.seed)
    online = init_params(cfg.model, rng)
    bank = bank_init(cfg.objective.bank_size, rng, dim=cfg.model.embed_dim)
    return TrainState(
        pair=EncoderPair.from_online(online, cfg.m),
        velocity=zeros_like(online),
        bank=bank,
    )


def triplet_rng(seed: int, step: int, position: int) -> np.random.Generator:
    """Generator for the triplet at a batch position of a global step"""
    return np.random.default_rng([seed, step, position])


def prepare_triplets(
    videos: Sequence[VideoClip],
    donors: Sequence[Optional[VideoClip]],
    cfg: TrainConfig,
    step: int
) -> List[TemporalTriplet]:
    """Sample and augment one triplet per video, in parallel workers"""

    def build(position: int) -> TemporalTriplet:
        rng = triplet_rng(cfg.seed, step, position)
        triplet = sample_triplet(videos[position], cfg.sampling, rng)
        return augment_triplet(
            triplet, donors[position], cfg.basic_aug, cfg.tca, rng, cfg.tca_on_negative
        )

    workers = max(1, min(PerformanceConfig.MAX_WORKERS, len(videos)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(build, range(len(videos))))


def train_step(
    videos: Sequence[VideoClip],
    donors: Sequence[Optional[VideoClip]],
    state: TrainState,
    cfg: TrainConfig
) -> Tuple[TrainState, Dict[str, Any]]:
    """
    One pretraining step

    Order: (1) sample and augment triplets, (2) embed anchors with the
    history network without gradient, (3) embed positives and negatives
    with the online network, (4) loss, (5) SGD on online parameters,
    (6) push anchors into the bank, (7) momentum update of history.

    Args:
        videos: Source videos of the batch
        donors: External-mix donor per video (another video)
        state: Current state
        cfg: Training configuration

    Returns:
        (new state, step metrics)
    """
    if len(videos) == 0:
        raise EmptyDataset("train_step needs at least one video")
    if len(donors) != len(videos):
        raise ValueError(f"{len(videos)} videos but {len(donors)} donors")

    triplets = prepare_triplets(videos, donors, cfg, state.step)
    B = len(triplets)

    anchors = stack_clips([t.anchor for t in triplets])
    check_input(cfg.model, anchors.shape)
    v_a = encode(state.pair.history, anchors, cfg.model)

    pairs = np.concatenate([
        stack_clips([t.positive for t in triplets]),
        stack_clips([t.negative for t in triplets]),
    ])
    check_input(cfg.model, pairs.shape)
    x = tf.constant(pairs)
    v_a_const = tf.constant(v_a)
    bank_slots = tf.constant(state.bank.slots)

    def loss_fn(weights):
        v = forward(weights, x, cfg.model)
        v_p, v_n = v[:B], v[B:]
        loss, per_sample = td_loss_tf(v_a_const, v_p, v_n, bank_slots, cfg.objective)
        aux = {
            "per_sample": per_sample,
            "pos_sim": tf.reduce_mean(tf.reduce_sum(v_a_const * v_p, axis=1)),
            "neg_sim": tf.reduce_mean(tf.reduce_sum(v_a_const * v_n, axis=1)),
        }
        return loss, aux

    loss, grads, aux = value_and_gradients(state.pair.online, loss_fn, has_aux=True)

    lr = lr_at(state.epoch, cfg)
    online, velocity = sgd_update(
        state.pair.online, grads, state.velocity, lr, cfg.sgd_momentum, cfg.weight_decay
    )
    bank = bank_push(state.bank, v_a) if state.bank.capacity else state.bank
    pair = momentum_update(EncoderPair(online=online, history=state.pair.history, m=cfg.m))

    new_state = TrainState(pair=pair, velocity=velocity, bank=bank, epoch=state.epoch, step=state.step + 1)
    metrics = {
        "step": new_state.step,
        "epoch": state.epoch,
        "loss": loss,
        "lr": lr,
        "mean_pos_sim": float(aux["pos_sim"]),
        "mean_neg_sim": float(aux["neg_sim"]),
        "grad_norm": global_norm(grads),
    }
    logger.log_train_step(new_state.step, state.epoch, loss, lr)
    return new_state, metrics


def epoch_order(seed: int, epoch: int, n: int) -> np.ndarray:
    """Seeded permutation of the dataset for one epoch"""
    return np.random.default_rng([seed, epoch]).permutation(n)


def batch_donors(
    videos: Sequence[VideoClip],
    order: np.ndarray,
    start: int,
    indices: np.ndarray
) -> List[VideoClip]:
    """
    Shift-by-one donors within the batch

    A single-video batch takes the next video in epoch order.
    """
    if len(indices) > 1:
        return [videos[indices[(j + 1) % len(indices)]] for j in range(len(indices))]
    return [videos[order[(start + 1) % len(order)]]]


def _checkpoint_data(state: TrainState, cfg: TrainConfig) -> CheckpointData:
    return CheckpointData(
        online=state.pair.online,
        history=state.pair.history,
        velocity=state.velocity,
        bank_slots=state.bank.slots,
        bank_cursor=state.bank.cursor,
        m=state.pair.m,
        epoch=state.epoch,
        step=state.step,
        seed=cfg.seed,
        spec=cfg.model,
        config=cfg.to_dict(),
    )


def state_from_checkpoint(data: CheckpointData) -> TrainState:
    return TrainState(
        pair=EncoderPair(online=data.online, history=data.history, m=data.m),
        velocity=data.velocity,
        bank=MemoryBank(slots=data.bank_slots, cursor=data.bank_cursor),
        epoch=data.epoch,
        step=data.step,
    )


def _same_config(stored: Dict[str, Any], cfg: TrainConfig) -> bool:
    # tuples become lists in JSON
    return json.dumps(stored, sort_keys=True) == json.dumps(cfg.to_dict(), sort_keys=True)


def run_pretrain(
    dataset: Sequence[VideoClip],
    cfg: TrainConfig,
    out_dir: PathLike,
    resume: Optional[PathLike] = None,
    stop_after_epochs: Optional[int] = None
) -> Path:
    """
    Full pretraining run with per-epoch checkpoints

    Args:
        dataset: Training videos
        cfg: Training configuration
        out_dir: Run directory (checkpoints and metrics.jsonl)
        resume: Checkpoint or run directory to continue from
        stop_after_epochs: Stop after this many epochs in this call

    Returns:
        Path of the last checkpoint written (or resumed from)
    """
    cfg.check()
    videos = list(dataset)
    if not videos:
        raise EmptyDataset("pretraining dataset is empty")
    if cfg.tca.enable_external_mix and len({video.source_id for video in videos}) < 2:
        raise MissingDonor("external mix needs at least two distinct videos; disable tca.enable_external_mix")
    for video in videos:
        check_video(video, cfg.sampling)

    out_dir = Path(out_dir)
    metrics = MetricsLog(out_dir / METRICS_FILE)

    if resume is not None:
        data = load_checkpoint(resume)
        if not _same_config(data.config, cfg):
            raise ConfigError(f"configuration differs from the checkpoint at {resume}")
        state = state_from_checkpoint(data)
        last_path = Path(resume)
        if state.epoch >= cfg.epochs:
            logger.info(f"Run at {resume} already finished {state.epoch} epochs", category="training")
            return last_path
        metrics.truncate(state.step)
        logger.info(f"Resuming at epoch {state.epoch}, step {state.step}", category="training")
    else:
        state = init_state(cfg)
        metrics.reset()
        last_path = None

    n = len(videos)
    epochs_run = 0
    with logger.run_log(out_dir):
        logger.info(
            f"Pretraining on {n} videos for epochs {state.epoch}..{cfg.epochs - 1}, batch {cfg.batch_size}",
            category="training",
        )

        for epoch in range(state.epoch, cfg.epochs):
            started = time.time()
            order = epoch_order(cfg.seed, epoch, n)
            losses = []
            for start in range(0, n, cfg.batch_size):
                indices = order[start:start + cfg.batch_size]
                batch = [videos[i] for i in indices]
                donors = batch_donors(videos, order, start, indices)
                state, step_metrics = train_step(batch, donors, state, cfg)
                metrics.append(step_metrics)
                losses.append(step_metrics["loss"])

            state = replace(state, epoch=epoch + 1)
            last_path = save_checkpoint(_checkpoint_data(state, cfg), out_dir)
            logger.log_epoch(epoch + 1, cfg.epochs, float(np.mean(losses)), lr_at(epoch, cfg), time.time() - started)

            epochs_run += 1
            if stop_after_epochs is not None and epochs_run >= stop_after_epochs:
                break

    return last_path
