"""
Parameter Collections
Ordered named tensors shared by the encoder, optimizer and checkpoints
"""
from collections import OrderedDict
from typing import Dict

import numpy as np

from src.tensor.core import ShapeMismatch, Tensor

# Insertion order is the canonical iteration order everywhere.
Params = Dict[str, Tensor]


def copy_params(params: Params) -> Params:
    return OrderedDict((name, np.array(value, copy=True)) for name, value in params.items())


def zeros_like(params: Params) -> Params:
    return OrderedDict((name, np.zeros_like(value)) for name, value in params.items())


def check_aligned(a: Params, b: Params, what: str = "params"):
    """
    Raise ShapeMismatch unless a and b have the same names, order and shapes
    """
    if list(a.keys()) != list(b.keys()):
        missing = set(a) ^ set(b)
        raise ShapeMismatch(f"{what}: names differ ({sorted(missing) or 'order'})")
    for name in a:
        if a[name].shape != b[name].shape:
            raise ShapeMismatch(
                f"{what}: {name} has shape {list(a[name].shape)} vs {list(b[name].shape)}"
            )


def params_equal(a: Params, b: Params) -> bool:
    """Bitwise equality of two parameter collections"""
    if list(a.keys()) != list(b.keys()):
        return False
    return all(
        a[name].shape == b[name].shape and np.array_equal(a[name], b[name])
        for name in a
    )


def global_norm(params: Params) -> float:
    """L2 norm over every element of every tensor"""
    return float(np.sqrt(sum(float(np.sum(np.square(v))) for v in params.values())))


def count_parameters(params: Params) -> int:
    return int(sum(v.size for v in params.values()))
