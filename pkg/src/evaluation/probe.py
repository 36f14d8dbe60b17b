"""
Linear Probe
Affine classifier on frozen backbone features, with the motion-removed appearance control
"""
import json
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np
import tensorflow as tf
from sklearn.metrics import accuracy_score, confusion_matrix
from sklearn.preprocessing import StandardScaler

from config.settings import AugmentDefaults, ProbeDefaults
from src.augment.basic import center_view
from src.evaluation.synthetic import LabeledDataset
from src.model.encoder import EncoderSpec, backbone_features, init_params, value_and_gradients
from src.model.params import Params
from src.sampling.triplet import SamplingConfig, sample_clip
from src.tensor.core import CropBox, Tensor, VideoClip, stack_clips
from src.training.checkpoint import load_checkpoint
from src.training.optimizer import sgd_update
from src.utils.errors import ConfigError
from src.utils.logger import get_logger

logger = get_logger()

PathLike = Union[str, Path]
FeatureHook = Callable[[Tensor, np.ndarray], Tensor]
FEATURE_BATCH = 64


@dataclass
class ProbeConfig:
    """Linear probe training parameters"""
    lr: float = ProbeDefaults.LR
    epochs: int = ProbeDefaults.EPOCHS
    momentum: float = ProbeDefaults.MOMENTUM
    weight_decay: float = ProbeDefaults.WEIGHT_DECAY
    encoder: str = ProbeDefaults.ENCODER

    def validate(self) -> List[str]:
        issues = []
        if not self.lr > 0:
            issues.append("probe.lr must be positive")
        if self.epochs < 1:
            issues.append("probe.epochs must be at least 1")
        if not 0 <= self.momentum < 1:
            issues.append("probe.momentum must lie in [0, 1)")
        if self.weight_decay < 0:
            issues.append("probe.weight_decay must be non-negative")
        if self.encoder not in ("history", "online"):
            issues.append("probe.encoder must be 'history' or 'online'")
        return issues

    def check(self):
        issues = self.validate()
        if issues:
            raise ConfigError("; ".join(issues))


@dataclass
class ProbeResult:
    """Test-split accuracy of the probe"""
    top1: float
    per_class: List[float]
    confusion: List[List[int]]
    n_train: int
    n_test: int
    control: bool = False
    encoder: str = "history"
    extra: Dict = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {
            "top1": self.top1,
            "per_class": self.per_class,
            "confusion": self.confusion,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "control": self.control,
            "encoder": self.encoder,
            **self.extra,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


@dataclass
class ProbeEncoder:
    """Frozen encoder plus the view it was trained on"""
    params: Params
    spec: EncoderSpec
    sampling: SamplingConfig
    view_size: int
    name: str = "history"

    @classmethod
    def from_checkpoint(cls, path: PathLike, which: str = ProbeDefaults.ENCODER) -> "ProbeEncoder":
        """
        Load one network and its sampling settings

        Raises:
            CheckpointCorrupt: unreadable checkpoint
        """
        data = load_checkpoint(path)
        config = data.config or {}
        sampling = SamplingConfig(**config.get("sampling", {}))
        view_size = config.get("basic_aug", {}).get("crop_size", AugmentDefaults.CROP_SIZE)
        params = data.history if which == "history" else data.online
        return cls(params=params, spec=data.spec, sampling=sampling, view_size=view_size, name=which)

    @classmethod
    def random(cls, spec: EncoderSpec, sampling: SamplingConfig, view_size: int, seed: int) -> "ProbeEncoder":
        """Untrained encoder, the random-features baseline"""
        params = init_params(spec, np.random.default_rng(seed))
        return cls(params=params, spec=spec, sampling=sampling, view_size=view_size, name="random")


def probe_clip(video: VideoClip, sampling: SamplingConfig, view_size: int) -> VideoClip:
    """Strided window at t = 0, centred crop, resized to the training view size"""
    size = min(sampling.crop_size, video.height, video.width)
    crop = CropBox((video.height - size) // 2, (video.width - size) // 2, size, size)
    return center_view(sample_clip(video, 0, sampling, crop), view_size)


def static_clip(clip: VideoClip) -> VideoClip:
    """First frame repeated over the whole clip length"""
    return clip.with_frames(np.repeat(clip.frames[:1], clip.length, axis=0))


def one_hot_hook(n_classes: int) -> FeatureHook:
    """Replace features by one-hot labels (separable sanity case)"""
    def hook(features: Tensor, labels: np.ndarray) -> Tensor:
        return np.eye(n_classes)[labels]
    return hook


def extract_features(
    encoder: ProbeEncoder,
    videos: Sequence[VideoClip],
    control: bool = False
) -> Tensor:
    """Backbone features of every video's probe clip"""
    out = []
    for start in range(0, len(videos), FEATURE_BATCH):
        clips = [probe_clip(v, encoder.sampling, encoder.view_size) for v in videos[start:start + FEATURE_BATCH]]
        if control:
            clips = [static_clip(c) for c in clips]
        out.append(backbone_features(encoder.params, stack_clips(clips), encoder.spec))
    return np.concatenate(out, axis=0)


def fit_classifier(
    features: Tensor,
    labels: np.ndarray,
    n_classes: int,
    cfg: ProbeConfig
) -> Params:
    """
    Full-batch softmax regression trained with sgd_update

    Weights start at zero, so the fit is deterministic.
    """
    params = OrderedDict([
        ("probe.weight", np.zeros((features.shape[1], n_classes))),
        ("probe.bias", np.zeros(n_classes)),
    ])
    velocity = OrderedDict((name, np.zeros_like(v)) for name, v in params.items())
    x = tf.constant(features)
    y = tf.constant(labels)

    def loss_fn(weights):
        logits = tf.matmul(x, weights["probe.weight"]) + weights["probe.bias"]
        return tf.reduce_mean(tf.nn.sparse_softmax_cross_entropy_with_logits(labels=y, logits=logits))

    for epoch in range(cfg.epochs):
        loss, grads, _ = value_and_gradients(params, loss_fn)
        params, velocity = sgd_update(params, grads, velocity, cfg.lr, cfg.momentum, cfg.weight_decay)
        if epoch % 25 == 0:
            logger.debug(f"Probe epoch {epoch}: loss {loss:.4f}", category="evaluation")
    return params


def predict(params: Params, features: Tensor) -> np.ndarray:
    logits = features @ params["probe.weight"] + params["probe.bias"]
    return np.argmax(logits, axis=1)


def _as_encoder(source: Union[PathLike, ProbeEncoder], cfg: ProbeConfig) -> ProbeEncoder:
    if isinstance(source, ProbeEncoder):
        return source
    return ProbeEncoder.from_checkpoint(source, cfg.encoder)


def linear_probe(
    checkpoint: Union[PathLike, ProbeEncoder],
    dataset: LabeledDataset,
    probe_cfg: Optional[ProbeConfig] = None,
    feature_hook: Optional[FeatureHook] = None,
    control: bool = False
) -> ProbeResult:
    """
    Train an affine classifier on frozen features and score the test split

    Args:
        checkpoint: Checkpoint path (or a loaded ProbeEncoder)
        dataset: Labelled dataset
        probe_cfg: Probe configuration
        feature_hook: Optional replacement of the features (test hook)
        control: Use motion-removed clips (appearance control)

    Returns:
        ProbeResult

    Raises:
        CheckpointCorrupt: unreadable checkpoint
    """
    cfg = probe_cfg or ProbeConfig()
    cfg.check()
    encoder = _as_encoder(checkpoint, cfg)

    train_x = extract_features(encoder, dataset.train, control)
    test_x = extract_features(encoder, dataset.test, control)
    if feature_hook is not None:
        train_x = feature_hook(train_x, dataset.train_labels)
        test_x = feature_hook(test_x, dataset.test_labels)

    scaler = StandardScaler().fit(train_x)
    train_x, test_x = scaler.transform(train_x), scaler.transform(test_x)

    params = fit_classifier(train_x, dataset.train_labels, dataset.n_classes, cfg)
    predictions = predict(params, test_x)

    classes = list(range(dataset.n_classes))
    confusion = confusion_matrix(dataset.test_labels, predictions, labels=classes)
    support = confusion.sum(axis=1)
    per_class = [
        float(confusion[c, c] / support[c]) if support[c] else 0.0
        for c in classes
    ]
    result = ProbeResult(
        top1=float(accuracy_score(dataset.test_labels, predictions)),
        per_class=per_class,
        confusion=confusion.tolist(),
        n_train=len(dataset.train),
        n_test=len(dataset.test),
        control=control,
        encoder=encoder.name,
    )
    logger.log_probe(result.top1, result.n_test, control)
    return result


def appearance_control(
    checkpoint: Union[PathLike, ProbeEncoder],
    dataset: LabeledDataset,
    probe_cfg: Optional[ProbeConfig] = None
) -> ProbeResult:
    """Linear probe on clips whose frames are all replaced by the first frame"""
    return linear_probe(checkpoint, dataset, probe_cfg, control=True)
