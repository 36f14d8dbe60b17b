"""
Shared test fixtures
Seeded clips, a small encoder, tiny training configs and datasets
"""
import numpy as np
import pytest

from src.augment.basic import BasicAugConfig
from src.augment.tca import TCAConfig
from src.evaluation.probe import ProbeConfig
from src.evaluation.synthetic import SynthConfig, generate_synthetic
from src.model.encoder import EncoderSpec
from src.objective.loss import ObjectiveConfig
from src.sampling.triplet import SamplingConfig
from src.tensor.core import VideoClip
from src.training.config import TrainConfig


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def make_clip():
    """Factory for random clips with values in [0, 1]"""
    def factory(shape=(16, 32, 32, 3), source_id="clip", seed=0):
        frames = np.random.default_rng(seed).uniform(size=shape)
        return VideoClip(frames=frames, source_id=source_id)
    return factory


@pytest.fixture
def small_spec():
    """Two blocks: spatial reduction 4, temporal reduction 2"""
    return EncoderSpec(blocks=((4, 2, 1), (8, 2, 2)), embed_dim=16)


@pytest.fixture
def tiny_train_config(small_spec):
    """Training config sized to run a few steps in seconds"""
    return TrainConfig(
        epochs=2,
        batch_size=4,
        lr_decay_every=1,
        seed=7,
        sampling=SamplingConfig(clip_len=4, temporal_stride=2, tau=2, crop_size=20),
        basic_aug=BasicAugConfig(crop_size=16),
        tca=TCAConfig(),
        objective=ObjectiveConfig(bank_size=16),
        model=small_spec,
    )


@pytest.fixture
def tiny_synth_config():
    return SynthConfig(n_train=2, n_test=2, clip_len_source=16, seed=3)


@pytest.fixture
def tiny_dataset(tiny_synth_config):
    """8 train / 8 test videos of 16 frames"""
    return generate_synthetic(tiny_synth_config)


@pytest.fixture
def fast_probe_config():
    return ProbeConfig(epochs=30)
