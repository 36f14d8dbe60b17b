"""
Model Module
Clip encoder, parameter collections and the momentum encoder pair
"""
from src.model.params import (
    Params,
    copy_params,
    zeros_like,
    check_aligned,
    params_equal,
    global_norm,
    count_parameters,
)
from src.model.encoder import (
    EncoderSpec,
    init_params,
    init_bound,
    encode,
    backbone_features,
    forward,
    backbone,
    to_weights,
    value_and_gradients,
    ShapeIncompatible,
    ZeroNorm,
)
from src.model.momentum import EncoderPair, momentum_update
from src.model.gradcheck import GradCheckReport, check_gradients, relative_error

__all__ = [
    "Params",
    "copy_params",
    "zeros_like",
    "check_aligned",
    "params_equal",
    "global_norm",
    "count_parameters",
    "EncoderSpec",
    "init_params",
    "init_bound",
    "encode",
    "backbone_features",
    "forward",
    "backbone",
    "to_weights",
    "value_and_gradients",
    "ShapeIncompatible",
    "ZeroNorm",
    "EncoderPair",
    "momentum_update",
    "GradCheckReport",
    "check_gradients",
    "relative_error",
]
