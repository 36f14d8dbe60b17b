"""
Optimizer
Step-decay learning-rate schedule and SGD with momentum and weight decay
"""
from collections import OrderedDict
from typing import Tuple

import numpy as np

from src.model.params import Params, check_aligned
from src.utils.errors import VTDLError


class TrainingError(VTDLError):
    """Training cannot continue"""
    pass


class NonFiniteGradient(TrainingError, ArithmeticError):
    """A gradient contains NaN or Inf"""
    pass


def lr_at(epoch: int, cfg) -> float:
    """
    lr0 * factor ** floor(epoch / every)

    Args:
        epoch: Zero-based epoch, 0 <= epoch < cfg.epochs
        cfg: TrainConfig
    """
    if not 0 <= epoch < cfg.epochs:
        raise ValueError(f"epoch {epoch} outside [0, {cfg.epochs})")
    return cfg.lr0 * cfg.lr_decay_factor ** (epoch // cfg.lr_decay_every)


def sgd_update(
    params: Params,
    grads: Params,
    velocity: Params,
    lr: float,
    momentum: float,
    wd: float
) -> Tuple[Params, Params]:
    """
    One SGD step on every tensor

    g' = grad + wd * param; v <- momentum * v + g'; param <- param - lr * v

    Returns:
        (new params, new velocity); the inputs are not modified

    Raises:
        ShapeMismatch: names or shapes differ
        NonFiniteGradient: any gradient element is NaN or Inf
    """
    check_aligned(params, grads, "gradients")
    check_aligned(params, velocity, "velocity")
    for name, grad in grads.items():
        if not np.all(np.isfinite(grad)):
            raise NonFiniteGradient(f"non-finite gradient for {name}")

    new_params, new_velocity = OrderedDict(), OrderedDict()
    for name, value in params.items():
        g = grads[name] + wd * value
        v = momentum * velocity[name] + g
        new_velocity[name] = v
        new_params[name] = value - lr * v
    return new_params, new_velocity
