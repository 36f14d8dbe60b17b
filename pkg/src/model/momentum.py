"""
Momentum Encoder Pair
Online parameters and their exponentially weight-averaged history copy
"""
from collections import OrderedDict
from dataclasses import dataclass

from config.settings import TrainDefaults
from src.model.params import Params, check_aligned, copy_params


@dataclass
class EncoderPair:
    """
    Online network (trained by SGD) and history network (momentum average)

    Features:
    - history embeds anchors and never receives gradient
    - history follows online through momentum_update only
    """
    online: Params
    history: Params
    m: float = TrainDefaults.HISTORY_MOMENTUM

    def __post_init__(self):
        if not 0.0 <= self.m <= 1.0:
            raise ValueError(f"momentum coefficient must lie in [0, 1], got {self.m}")
        check_aligned(self.online, self.history, "encoder pair")

    @classmethod
    def from_online(cls, online: Params, m: float = TrainDefaults.HISTORY_MOMENTUM) -> "EncoderPair":
        """History starts as an exact copy of the online parameters"""
        return cls(online=copy_params(online), history=copy_params(online), m=m)


def momentum_update(pair: EncoderPair) -> EncoderPair:
    """
    history <- m * history + (1 - m) * online, element-wise on every tensor

    Args:
        pair: Current pair

    Returns:
        New pair sharing the online tensors, with fresh history tensors
    """
    check_aligned(pair.online, pair.history, "momentum update")
    m = pair.m
    history = OrderedDict(
        (name, m * pair.history[name] + (1.0 - m) * pair.online[name])
        for name in pair.history
    )
    return EncoderPair(online=pair.online, history=history, m=m)
