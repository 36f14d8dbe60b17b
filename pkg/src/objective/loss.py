"""
Temporal-Discriminative Loss
Softmax contrast of the positive pair against the intra-video negative and the memory bank
"""
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np
import tensorflow as tf

from config.settings import ObjectiveDefaults
from src.objective.bank import MemoryBank
from src.tensor.core import Tensor, as_tensor
from src.utils.errors import ConfigError, DataError

REDUCTIONS = ("mean", "sum")


class EmptyBatch(DataError, ValueError):
    """Loss requested for zero triplets"""
    pass


@dataclass
class ObjectiveConfig:
    """
    Similarity and loss configuration

    d(u, v) = exp(u . v / temperature). The two use_* switches drop the
    intra-video negative or the bank sum from the denominator.
    """
    temperature: float = ObjectiveDefaults.TEMPERATURE
    bank_size: int = ObjectiveDefaults.BANK_SIZE
    use_intra_negative: bool = True
    use_bank_negatives: bool = True
    reduction: str = ObjectiveDefaults.REDUCTION

    def validate(self) -> List[str]:
        issues = []
        if not self.temperature > 0:
            issues.append("objective.temperature must be positive")
        if self.bank_size < 0:
            issues.append("objective.bank_size must be non-negative")
        if self.reduction not in REDUCTIONS:
            issues.append(f"objective.reduction must be one of {list(REDUCTIONS)}")
        if not self.use_intra_negative and not (self.use_bank_negatives and self.bank_size > 0):
            issues.append("objective needs a negative: enable use_intra_negative or a non-empty bank")
        return issues

    def check(self):
        issues = self.validate()
        if issues:
            raise ConfigError("; ".join(issues))


SimilarityConfig = ObjectiveConfig


@dataclass(eq=False)
class TripletEmbedding:
    """Embeddings of one triplet; v_a is treated as a constant"""
    v_a: Tensor
    v_p: Tensor
    v_n: Tensor


def similarity(u: Tensor, v: Tensor, cfg: ObjectiveConfig = None) -> float:
    """exp(u . v / T), strictly positive, maximal at u == v"""
    cfg = cfg or ObjectiveConfig()
    return float(np.exp(np.dot(u, v) / cfg.temperature))


def td_loss_tf(
    v_a: tf.Tensor,
    v_p: tf.Tensor,
    v_n: tf.Tensor,
    bank_slots: tf.Tensor,
    cfg: ObjectiveConfig
) -> Tuple[tf.Tensor, tf.Tensor]:
    """
    Differentiable loss on [B, D] embedding batches

    l_i = logsumexp(pos_i, neg_i, bank_ij) - pos_i with logits = dot / T,
    which equals -log(d_p / (d_p + d_n + sum_j d(v_a, B_j))). Anchors and
    bank slots are wrapped in stop_gradient.

    Returns:
        (reduced scalar, per-sample terms)
    """
    v_a = tf.stop_gradient(v_a)
    bank_slots = tf.stop_gradient(bank_slots)
    pos = tf.reduce_sum(v_a * v_p, axis=1) / cfg.temperature
    logits = [pos[:, None]]
    if cfg.use_intra_negative:
        logits.append((tf.reduce_sum(v_a * v_n, axis=1) / cfg.temperature)[:, None])
    if cfg.use_bank_negatives and bank_slots.shape[0]:
        logits.append(tf.matmul(v_a, bank_slots, transpose_b=True) / cfg.temperature)
    per_sample = tf.reduce_logsumexp(tf.concat(logits, axis=1), axis=1) - pos
    if cfg.reduction == "sum":
        return tf.reduce_sum(per_sample), per_sample
    return tf.reduce_mean(per_sample), per_sample


def _stack(batch: Sequence[TripletEmbedding]) -> Tuple[Tensor, Tensor, Tensor]:
    if len(batch) == 0:
        raise EmptyBatch("td_loss needs at least one triplet")
    v_a = as_tensor([t.v_a for t in batch])
    v_p = as_tensor([t.v_p for t in batch])
    v_n = as_tensor([t.v_n for t in batch])
    return v_a, v_p, v_n


def td_loss(
    batch: Sequence[TripletEmbedding],
    bank: MemoryBank,
    cfg: ObjectiveConfig = None
) -> Tuple[float, Tensor]:
    """
    Temporal-discriminative loss of a batch of triplet embeddings

    Args:
        batch: Non-empty list of TripletEmbedding
        bank: Memory bank snapshot (its slots are constants)
        cfg: Objective configuration

    Returns:
        (batch reduction, per-sample terms)
    """
    cfg = cfg or ObjectiveConfig()
    v_a, v_p, v_n = _stack(batch)
    loss, per_sample = td_loss_tf(
        tf.constant(v_a), tf.constant(v_p), tf.constant(v_n), tf.constant(bank.slots), cfg
    )
    return float(loss.numpy()), per_sample.numpy()


def td_loss_gradients(
    batch: Sequence[TripletEmbedding],
    bank: MemoryBank,
    cfg: ObjectiveConfig = None
) -> Dict[str, Tensor]:
    """Gradient of the reduced loss with respect to v_a, v_p and v_n"""
    cfg = cfg or ObjectiveConfig()
    v_a, v_p, v_n = (tf.constant(x) for x in _stack(batch))
    with tf.GradientTape() as tape:
        tape.watch([v_a, v_p, v_n])
        loss, _ = td_loss_tf(v_a, v_p, v_n, tf.constant(bank.slots), cfg)
    grads = tape.gradient(loss, [v_a, v_p, v_n], unconnected_gradients=tf.UnconnectedGradients.ZERO)
    return {name: g.numpy() for name, g in zip(("v_a", "v_p", "v_n"), grads)}
