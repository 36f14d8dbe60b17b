"""
Objective Module
Temporal-discriminative loss and the anchor memory bank
"""
from src.objective.bank import MemoryBank, bank_init, bank_push, BatchExceedsCapacity, NonUnitAnchor
from src.objective.loss import (
    ObjectiveConfig,
    SimilarityConfig,
    TripletEmbedding,
    similarity,
    td_loss,
    td_loss_tf,
    td_loss_gradients,
    EmptyBatch,
)

__all__ = [
    "MemoryBank",
    "bank_init",
    "bank_push",
    "BatchExceedsCapacity",
    "NonUnitAnchor",
    "ObjectiveConfig",
    "SimilarityConfig",
    "TripletEmbedding",
    "similarity",
    "td_loss",
    "td_loss_tf",
    "td_loss_gradients",
    "EmptyBatch",
]
