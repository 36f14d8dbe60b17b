"""
Memory Bank
Fixed-size FIFO ring of past anchor embeddings used as inter-video negatives
"""
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from config.settings import ModelDefaults
from src.tensor.core import Tensor, as_tensor
from src.utils.errors import DataError

UNIT_NORM_TOL = 1e-6


class BatchExceedsCapacity(DataError, ValueError):
    """More anchors pushed at once than the bank holds"""
    pass


class NonUnitAnchor(DataError, ValueError):
    """Pushed anchor is not L2-normalized"""
    pass


@dataclass(frozen=True, eq=False)
class MemoryBank:
    """
    K unit-norm slots and the index of the oldest one

    Slots are read-only; bank_push returns a new bank.
    """
    slots: Tensor
    cursor: int = 0

    def __post_init__(self):
        slots = as_tensor(self.slots).copy()
        if slots.ndim != 2:
            raise ValueError(f"bank slots must be [K, D], got shape {list(slots.shape)}")
        capacity = slots.shape[0]
        if capacity == 0 and self.cursor != 0:
            raise ValueError("an empty bank has cursor 0")
        if capacity and not 0 <= self.cursor < capacity:
            raise ValueError(f"cursor {self.cursor} outside [0, {capacity})")
        slots.setflags(write=False)
        object.__setattr__(self, "slots", slots)

    @property
    def capacity(self) -> int:
        return self.slots.shape[0]

    @property
    def dim(self) -> int:
        return self.slots.shape[1]

    def ordered(self) -> Tensor:
        """Slots from oldest to newest"""
        return np.roll(self.slots, -self.cursor, axis=0)


def bank_init(K: int, rng: np.random.Generator, dim: int = ModelDefaults.EMBED_DIM) -> MemoryBank:
    """
    K independent uniform-on-sphere vectors (Gaussian draw then normalize)

    Args:
        K: Capacity (0 disables the bank)
        rng: Seeded generator
        dim: Embedding dimension

    Returns:
        MemoryBank with cursor 0
    """
    if K < 0:
        raise ValueError(f"bank size must be non-negative, got {K}")
    draws = rng.standard_normal((K, dim))
    if K:
        draws /= np.linalg.norm(draws, axis=1, keepdims=True)
    return MemoryBank(slots=draws, cursor=0)


def bank_push(bank: MemoryBank, anchors: Sequence[Tensor]) -> MemoryBank:
    """
    Overwrite the oldest slots with new anchors, in order

    Args:
        bank: Current bank
        anchors: List or [n, D] array of unit-norm anchor embeddings, n <= K

    Returns:
        New bank with the cursor advanced by n modulo K
    """
    anchors = as_tensor(anchors).reshape(-1, bank.dim) if len(anchors) else np.empty((0, bank.dim))
    n = anchors.shape[0]
    if n == 0:
        return bank
    if n > bank.capacity:
        raise BatchExceedsCapacity(f"cannot push {n} anchors into a bank of {bank.capacity}")
    norms = np.linalg.norm(anchors, axis=1)
    if np.any(np.abs(norms - 1.0) > UNIT_NORM_TOL):
        raise NonUnitAnchor(f"anchor norms must be 1, got {norms.min():.6g}..{norms.max():.6g}")

    slots = np.array(bank.slots)
    index = (bank.cursor + np.arange(n)) % bank.capacity
    slots[index] = anchors
    return MemoryBank(slots=slots, cursor=int((bank.cursor + n) % bank.capacity))
