"""
Clip Encoder
Small 3D convolutional network with global average pooling and an L2-normalized projection head
"""
import os

os.environ.setdefault("TF_CPP_MIN_LOG_LEVEL", "2")

from collections import OrderedDict
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Sequence, Tuple, Union

import numpy as np
import tensorflow as tf

from config.settings import ModelDefaults
from src.model.params import Params
from src.tensor.core import ClipLike, Tensor, as_tensor, stack_clips
from src.utils.errors import ConfigError, DataError
from src.utils.logger import get_logger

logger = get_logger()

tf.config.experimental.enable_op_determinism()

DTYPE = tf.float64


class ShapeIncompatible(DataError, ValueError):
    """Input batch or parameters do not fit the encoder spec"""
    pass


class ZeroNorm(DataError, ArithmeticError):
    """Projection output too close to the origin to normalize"""
    pass


@dataclass
class EncoderSpec:
    """
    Encoder architecture

    Each block is (out_channels, spatial_stride, temporal_stride) and applies
    a cubic convolution, per-channel normalization and a rectifier.
    """
    blocks: Tuple[Tuple[int, int, int], ...] = ModelDefaults.BLOCKS
    embed_dim: int = ModelDefaults.EMBED_DIM
    in_channels: int = ModelDefaults.IN_CHANNELS
    kernel_size: int = ModelDefaults.KERNEL_SIZE
    norm_eps: float = ModelDefaults.NORM_EPS

    def __post_init__(self):
        self.blocks = tuple(tuple(int(v) for v in block) for block in self.blocks)

    @property
    def feature_dim(self) -> int:
        return self.blocks[-1][0]

    @property
    def temporal_reduction(self) -> int:
        return int(np.prod([b[2] for b in self.blocks]))

    @property
    def spatial_reduction(self) -> int:
        return int(np.prod([b[1] for b in self.blocks]))

    def validate(self) -> List[str]:
        issues = []
        if not self.blocks:
            issues.append("model.blocks must contain at least one block")
        for i, block in enumerate(self.blocks):
            if len(block) != 3 or min(block) < 1:
                issues.append(f"model.blocks[{i}] must be three positive integers")
        if self.embed_dim < 1:
            issues.append("model.embed_dim must be positive")
        if self.in_channels not in (1, 3):
            issues.append("model.in_channels must be 1 or 3")
        if self.kernel_size < 1 or self.kernel_size % 2 == 0:
            issues.append("model.kernel_size must be a positive odd integer")
        if self.norm_eps <= 0:
            issues.append("model.norm_eps must be positive")
        return issues

    def check(self):
        issues = self.validate()
        if issues:
            raise ConfigError("; ".join(issues))

    def param_shapes(self) -> "OrderedDict[str, Tuple[int, ...]]":
        """Name -> shape of every parameter tensor, in canonical order"""
        k = self.kernel_size
        shapes = OrderedDict()
        in_ch = self.in_channels
        for i, (out_ch, _, _) in enumerate(self.blocks):
            shapes[f"block{i}.conv.kernel"] = (k, k, k, in_ch, out_ch)
            shapes[f"block{i}.conv.bias"] = (out_ch,)
            shapes[f"block{i}.norm.scale"] = (out_ch,)
            shapes[f"block{i}.norm.shift"] = (out_ch,)
            in_ch = out_ch
        shapes["proj.weight"] = (in_ch, self.embed_dim)
        shapes["proj.bias"] = (self.embed_dim,)
        return shapes

    def to_dict(self) -> Dict[str, Any]:
        return {
            "blocks": [list(b) for b in self.blocks],
            "embed_dim": self.embed_dim,
            "in_channels": self.in_channels,
            "kernel_size": self.kernel_size,
            "norm_eps": self.norm_eps,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EncoderSpec":
        data = dict(data)
        if "blocks" in data:
            data["blocks"] = tuple(tuple(b) for b in data["blocks"])
        return cls(**data)


def init_bound(fan_in: int) -> float:
    """Half-width of the uniform initialization range"""
    return float(np.sqrt(6.0 / fan_in))


def init_params(spec: EncoderSpec, rng: np.random.Generator) -> Params:
    """
    Initialize encoder parameters

    Convolution kernels and the projection weight are drawn uniform in
    [-b, b] with b = sqrt(6 / fan_in); biases and shifts are zero and
    normalization scales one.

    Args:
        spec: Encoder architecture
        rng: Seeded generator

    Returns:
        Ordered parameter collection
    """
    spec.check()
    params = OrderedDict()
    for name, shape in spec.param_shapes().items():
        if name.endswith(".kernel") or name == "proj.weight":
            fan_in = int(np.prod(shape[:-1]))
            bound = init_bound(fan_in)
            params[name] = rng.uniform(-bound, bound, size=shape)
        elif name.endswith(".scale"):
            params[name] = np.ones(shape)
        else:
            params[name] = np.zeros(shape)
    return params


def check_params(spec: EncoderSpec, params: Params):
    expected = spec.param_shapes()
    if list(params.keys()) != list(expected.keys()):
        raise ShapeIncompatible("parameter names do not match the encoder spec")
    for name, shape in expected.items():
        if tuple(params[name].shape) != shape:
            raise ShapeIncompatible(f"{name}: expected shape {list(shape)}, got {list(params[name].shape)}")


def check_input(spec: EncoderSpec, shape: Sequence[int]):
    """Raise ShapeIncompatible unless a [B, T, H, W, C] batch fits the strides"""
    if len(shape) != 5:
        raise ShapeIncompatible(f"expected a [B, T, H, W, C] batch, got shape {list(shape)}")
    B, T, H, W, C = shape
    if B < 1:
        raise ShapeIncompatible("empty batch")
    if C != spec.in_channels:
        raise ShapeIncompatible(f"expected {spec.in_channels} channels, got {C}")
    if T % spec.temporal_reduction:
        raise ShapeIncompatible(f"clip length {T} not divisible by temporal reduction {spec.temporal_reduction}")
    if H % spec.spatial_reduction or W % spec.spatial_reduction:
        raise ShapeIncompatible(f"frame size {H}x{W} not divisible by spatial reduction {spec.spatial_reduction}")


def to_batch(clips: Union[Sequence[ClipLike], np.ndarray]) -> Tensor:
    """[B, T, H, W, C] float64 array from a batch array or a list of clips"""
    if isinstance(clips, np.ndarray):
        return as_tensor(clips)
    if len(clips) == 0:
        raise ShapeIncompatible("empty batch")
    shapes = {tuple(np.shape(getattr(c, "frames", c))) for c in clips}
    if len(shapes) != 1:
        raise ShapeIncompatible(f"clips in a batch must share one shape, got {sorted(shapes)}")
    return stack_clips(clips)


def to_weights(params: Params) -> "OrderedDict[str, tf.Tensor]":
    return OrderedDict((name, tf.constant(value, dtype=DTYPE)) for name, value in params.items())


def backbone(weights: Dict[str, tf.Tensor], x: tf.Tensor, spec: EncoderSpec) -> tf.Tensor:
    """
    Block stack followed by global average pooling over (T, H, W)

    Normalization statistics are taken per clip and channel, so a clip's
    features never depend on the other clips in its batch.
    """
    h = x
    for i, (_, s_stride, t_stride) in enumerate(spec.blocks):
        h = tf.nn.conv3d(
            h,
            weights[f"block{i}.conv.kernel"],
            strides=[1, t_stride, s_stride, s_stride, 1],
            padding="SAME",
        )
        h = h + weights[f"block{i}.conv.bias"]
        mean, var = tf.nn.moments(h, axes=[1, 2, 3], keepdims=True)
        h = (h - mean) * tf.math.rsqrt(var + spec.norm_eps)
        h = h * weights[f"block{i}.norm.scale"] + weights[f"block{i}.norm.shift"]
        h = tf.nn.relu(h)
    return tf.reduce_mean(h, axis=[1, 2, 3])


def project(weights: Dict[str, tf.Tensor], features: tf.Tensor) -> tf.Tensor:
    """Affine map to the embedding space followed by L2 normalization"""
    z = tf.matmul(features, weights["proj.weight"]) + weights["proj.bias"]
    norms = tf.norm(z, axis=1, keepdims=True)
    smallest = float(tf.reduce_min(norms))
    if smallest < ModelDefaults.ZERO_NORM_EPS:
        raise ZeroNorm(f"projection norm {smallest:.3e} below {ModelDefaults.ZERO_NORM_EPS}")
    return z / norms


def forward(weights: Dict[str, tf.Tensor], x: tf.Tensor, spec: EncoderSpec) -> tf.Tensor:
    """Differentiable embedding of a [B, T, H, W, C] batch"""
    return project(weights, backbone(weights, x, spec))


def encode(params: Params, clips, spec: EncoderSpec = None) -> Tensor:
    """
    Embed a batch of clips

    Args:
        params: Encoder parameters
        clips: List of VideoClip / arrays, or a [B, T, H, W, C] array
        spec: Encoder architecture (default spec when omitted)

    Returns:
        [B, embed_dim] array of unit-norm embeddings
    """
    spec = spec or EncoderSpec()
    batch = to_batch(clips)
    check_input(spec, batch.shape)
    check_params(spec, params)
    out = forward(to_weights(params), tf.constant(batch, dtype=DTYPE), spec)
    return out.numpy()


def backbone_features(params: Params, clips, spec: EncoderSpec = None) -> Tensor:
    """
    Pooled activations before the projection head (not normalized)

    Returns:
        [B, last out_channels] array
    """
    spec = spec or EncoderSpec()
    batch = to_batch(clips)
    check_input(spec, batch.shape)
    check_params(spec, params)
    out = backbone(to_weights(params), tf.constant(batch, dtype=DTYPE), spec)
    return out.numpy()


def value_and_gradients(
    params: Params,
    loss_fn: Callable[[Dict[str, tf.Tensor]], Any],
    has_aux: bool = False
) -> Tuple[float, Params, Any]:
    """
    Evaluate a scalar function of the parameters and its gradient

    Args:
        params: Point of evaluation
        loss_fn: Maps TF weights to a scalar, or to (scalar, aux) with has_aux
        has_aux: loss_fn also returns auxiliary tensors

    Returns:
        (value, gradient per parameter, aux converted to numpy)
        Parameters the function does not depend on get zero gradients.
    """
    weights = to_weights(params)
    variables = list(weights.values())
    with tf.GradientTape() as tape:
        tape.watch(variables)
        result = loss_fn(weights)
    value, aux = result if has_aux else (result, None)
    grads = tape.gradient(value, variables, unconnected_gradients=tf.UnconnectedGradients.ZERO)
    grads = OrderedDict((name, g.numpy()) for name, g in zip(weights.keys(), grads))
    if aux is not None:
        aux = tf.nest.map_structure(lambda t: t.numpy() if tf.is_tensor(t) else t, aux)
    return float(value.numpy()), grads, aux


if __name__ == "__main__":
    spec = EncoderSpec()
    params = init_params(spec, np.random.default_rng(0))
    clips = np.random.default_rng(1).uniform(size=(2, 16, 32, 32, 3))
    v = encode(params, clips, spec)
    print(f"✅ Encoder: {sum(p.size for p in params.values())} parameters")
    print(f"   Embedding shape: {v.shape}, norms: {np.linalg.norm(v, axis=1)}")
    print(f"   Backbone features: {backbone_features(params, clips, spec).shape}")
