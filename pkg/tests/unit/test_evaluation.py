"""
Tests for the synthetic dataset, the linear probe and the ablation harness
"""
import json
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from src.evaluation.ablation import apply_variant, run_ablation
from src.evaluation.probe import (
    ProbeConfig,
    ProbeEncoder,
    appearance_control,
    extract_features,
    linear_probe,
    one_hot_hook,
    probe_clip,
    static_clip,
)
from src.evaluation.synthetic import (
    DIRECTIONS,
    LABELS_FILE,
    ConfigInfeasible,
    DatasetError,
    SynthConfig,
    draw_appearance,
    generate_synthetic,
    load_dataset,
    render_video,
    save_dataset,
    split_labels,
    square_position,
    video_rng,
)
from src.model.params import copy_params, params_equal
from src.sampling.triplet import SamplingConfig
from src.training.trainer import METRICS_FILE, run_pretrain
from src.utils.errors import ConfigError


def _random_encoder(small_spec, seed=0):
    sampling = SamplingConfig(clip_len=4, temporal_stride=2, tau=2, crop_size=20)
    return ProbeEncoder.random(small_spec, sampling, view_size=16, seed=seed)


def test_synthetic_counts_and_balance(tiny_dataset):
    assert len(tiny_dataset.train) == 8 and len(tiny_dataset.test) == 8
    assert np.bincount(tiny_dataset.train_labels).tolist() == [2, 2, 2, 2]
    assert np.bincount(tiny_dataset.test_labels).tolist() == [2, 2, 2, 2]
    assert tiny_dataset.train[0].shape == (16, 32, 32, 3)
    assert tiny_dataset.train[3].source_id == "train_00003"
    assert tiny_dataset.meta["classes"] == ["up", "down", "left", "right"]


def test_synthetic_deterministic(tiny_synth_config):
    a = generate_synthetic(tiny_synth_config)
    b = generate_synthetic(tiny_synth_config)
    for x, y in zip(a.train + a.test, b.train + b.test):
        assert np.array_equal(x.frames, y.frames)
    c = generate_synthetic(replace(tiny_synth_config, seed=4))
    assert not np.array_equal(a.train[0].frames, c.train[0].frames)


def test_synthetic_square_moves_by_label(tiny_synth_config):
    """Frame t holds the square at start + direction * speed * t over the fixed background"""
    cfg = tiny_synth_config
    for index in range(4):
        clip, label = render_video(cfg, "train", index)
        rng = video_rng(cfg, "train", index)
        background, color = draw_appearance(cfg, rng)
        speed = int(rng.choice(cfg.speeds))
        start = (int(rng.integers(cfg.frame_size)), int(rng.integers(cfg.frame_size)))

        offsets = np.arange(cfg.square_size)
        for t in range(clip.length):
            top, left = square_position(start, DIRECTIONS[label], speed, t, cfg.frame_size)
            rows, cols = (top + offsets) % cfg.frame_size, (left + offsets) % cfg.frame_size
            inside = np.zeros((cfg.frame_size, cfg.frame_size), dtype=bool)
            inside[np.ix_(rows, cols)] = True
            np.testing.assert_allclose(clip.frames[t][inside], np.broadcast_to(np.round(color * 255) / 255, (inside.sum(), 3)))
            np.testing.assert_allclose(clip.frames[t][~inside], np.round(background[~inside] * 255) / 255)


def test_synthetic_labels_shuffled_but_balanced():
    """Labels are a seeded permutation of a balanced multiset, not index mod n_classes"""
    cfg = SynthConfig(n_train=64, n_test=8, seed=11)
    labels = split_labels(cfg, "train")
    assert np.bincount(labels).tolist() == [64, 64, 64, 64]
    assert not np.array_equal(labels, np.arange(len(labels)) % 4)
    assert np.array_equal(labels, split_labels(cfg, "train"))
    assert not np.array_equal(split_labels(cfg, "test"), labels[:32])

    clip, label = render_video(cfg, "train", 5)
    assert label == labels[5]


def test_synthetic_appearance_independent_of_label():
    """Background and colour carry no label signal: |r| < 0.05 over 10^4 videos"""
    cfg = SynthConfig(n_train=2500, seed=2)
    labels = split_labels(cfg, "train")
    colors, backgrounds = [], []
    for index in range(len(labels)):
        background, color = draw_appearance(cfg, video_rng(cfg, "train", index))
        colors.append(color)
        backgrounds.append(background.mean(axis=(0, 1)))
    appearance = np.hstack([np.array(colors), np.array(backgrounds)])

    for c in range(cfg.n_classes):
        indicator = (labels == c).astype(float)
        for column in appearance.T:
            assert abs(np.corrcoef(indicator, column)[0, 1]) < 0.05


def test_synthetic_infeasible():
    with pytest.raises(ConfigInfeasible):
        generate_synthetic(SynthConfig(square_size=32, frame_size=32))
    with pytest.raises(ConfigError):
        generate_synthetic(SynthConfig(n_classes=5))


def test_dataset_save_load(tmp_path, tiny_dataset):
    save_dataset(tiny_dataset, tmp_path / "a")
    loaded = load_dataset(tmp_path / "a")
    assert [c.source_id for c in loaded.train] == [c.source_id for c in tiny_dataset.train]
    assert np.array_equal(loaded.train_labels, tiny_dataset.train_labels)
    assert np.array_equal(loaded.test_labels, tiny_dataset.test_labels)
    assert loaded.n_classes == 4
    for x, y in zip(loaded.train + loaded.test, tiny_dataset.train + tiny_dataset.test):
        assert np.array_equal(x.frames, y.frames)

    save_dataset(tiny_dataset, tmp_path / "b")
    assert (tmp_path / "a" / LABELS_FILE).read_bytes() == (tmp_path / "b" / LABELS_FILE).read_bytes()


def test_load_dataset_errors(tmp_path):
    with pytest.raises(DatasetError):
        load_dataset(tmp_path)
    (tmp_path / LABELS_FILE).write_text("{not json")
    with pytest.raises(DatasetError):
        load_dataset(tmp_path)
    (tmp_path / LABELS_FILE).write_text(json.dumps({}))
    with pytest.raises(DatasetError):
        load_dataset(tmp_path)


def test_probe_clip_and_static_clip(tiny_dataset):
    sampling = SamplingConfig(clip_len=4, temporal_stride=2, crop_size=20)
    clip = probe_clip(tiny_dataset.train[0], sampling, 16)
    assert clip.shape == (4, 16, 16, 3)

    frozen = static_clip(clip)
    assert frozen.shape == clip.shape
    assert np.all(frozen.frames == clip.frames[0])


def test_probe_separable_features(small_spec, tiny_dataset, fast_probe_config):
    """One-hot label features give a perfect probe"""
    result = linear_probe(
        _random_encoder(small_spec), tiny_dataset, fast_probe_config, feature_hook=one_hot_hook(4)
    )
    assert result.top1 == 1.0
    assert result.per_class == [1.0, 1.0, 1.0, 1.0]
    assert np.trace(result.confusion) == 8


def test_probe_result_shape(small_spec, tiny_dataset, fast_probe_config):
    encoder = _random_encoder(small_spec)
    before = copy_params(encoder.params)
    result = linear_probe(encoder, tiny_dataset, fast_probe_config)

    assert params_equal(encoder.params, before)
    assert 0.0 <= result.top1 <= 1.0
    confusion = np.array(result.confusion)
    assert confusion.shape == (4, 4)
    assert confusion.sum(axis=1).tolist() == np.bincount(tiny_dataset.test_labels).tolist()
    assert json.loads(result.to_json())["n_test"] == 8
    assert result.encoder == "random" and not result.control


def test_probe_deterministic(small_spec, tiny_dataset, fast_probe_config):
    a = linear_probe(_random_encoder(small_spec), tiny_dataset, fast_probe_config)
    b = linear_probe(_random_encoder(small_spec), tiny_dataset, fast_probe_config)
    assert a.to_dict() == b.to_dict()


def test_linear_eval_leaves_encoder_untouched(small_spec, tiny_dataset, fast_probe_config):
    """Linear evaluation and the appearance control only read the frozen encoder"""
    encoder = _random_encoder(small_spec, seed=3)
    before = copy_params(encoder.params)
    linear_probe(encoder, tiny_dataset, fast_probe_config)
    appearance_control(encoder, tiny_dataset, fast_probe_config)
    assert params_equal(encoder.params, before)
    for name, value in encoder.params.items():
        assert np.array_equal(value, before[name]), name


def test_linear_eval_invariant_to_test_order(small_spec, tiny_dataset, fast_probe_config):
    order = np.random.default_rng(9).permutation(len(tiny_dataset.test))
    shuffled = replace(
        tiny_dataset,
        test=[tiny_dataset.test[i] for i in order],
        test_labels=tiny_dataset.test_labels[order],
    )
    a = linear_probe(_random_encoder(small_spec), tiny_dataset, fast_probe_config)
    b = linear_probe(_random_encoder(small_spec), shuffled, fast_probe_config)
    assert a.top1 == b.top1
    assert a.confusion == b.confusion


def test_appearance_control_sees_static_clips(small_spec, tiny_dataset, fast_probe_config):
    encoder = _random_encoder(small_spec)
    features = extract_features(encoder, tiny_dataset.test[:2], control=True)
    assert features.shape == (2, small_spec.feature_dim)
    assert appearance_control(encoder, tiny_dataset, fast_probe_config).control


def test_probe_config_validation():
    assert not ProbeConfig().validate()
    with pytest.raises(ConfigError):
        ProbeConfig(encoder="target").check()
    with pytest.raises(ConfigError):
        ProbeConfig(epochs=0).check()


def test_probe_from_checkpoint(tmp_path, tiny_train_config, tiny_dataset, fast_probe_config):
    checkpoint = run_pretrain(tiny_dataset.train, replace(tiny_train_config, epochs=1), tmp_path / "run")
    encoder = ProbeEncoder.from_checkpoint(checkpoint)
    assert encoder.name == "history"
    assert encoder.sampling == tiny_train_config.sampling
    assert encoder.view_size == 16

    result = linear_probe(checkpoint, tiny_dataset, fast_probe_config)
    assert result.n_train == 8 and result.n_test == 8
    online = linear_probe(checkpoint, tiny_dataset, replace(fast_probe_config, encoder="online"))
    assert online.encoder == "online"


def test_apply_variant(tiny_train_config):
    basic = apply_variant(tiny_train_config, "basic_only")
    assert not (basic.tca.enable_cutout or basic.tca.enable_internal_mix or basic.tca.enable_external_mix)
    assert tiny_train_config.tca.enable_cutout

    cutout = apply_variant(tiny_train_config, "cutout_only")
    assert cutout.tca.enable_cutout and not cutout.tca.enable_external_mix
    assert not apply_variant(tiny_train_config, "no_bank").objective.use_bank_negatives
    assert apply_variant(tiny_train_config, "tau=3").sampling.tau == 3
    assert apply_variant(tiny_train_config, "stride=1").sampling.temporal_stride == 1

    with pytest.raises(ConfigError):
        apply_variant(tiny_train_config, "tau=x")
    with pytest.raises(ConfigError):
        apply_variant(tiny_train_config, "bigger_model")


def test_run_ablation(tmp_path, tiny_train_config, tiny_dataset):
    cfg = replace(tiny_train_config, epochs=1)
    result = run_ablation(["full", "basic_only"], [0], tiny_dataset, cfg, tmp_path, ProbeConfig(epochs=5))

    assert result.runs["variant"].tolist() == ["full", "basic_only"]
    assert {"top1", "control_top1", "final_loss", "run_dir"} <= set(result.runs.columns)
    for run_dir in result.runs["run_dir"]:
        assert (Path(run_dir) / METRICS_FILE).exists()
    assert "top1_mean" in result.summary.columns
    assert (tmp_path / "full" / "seed_0" / "epoch_0001").is_dir()
    assert (tmp_path / "ablation.png").is_file()
    written = json.loads((tmp_path / "ablation.json").read_text())
    assert len(written["runs"]) == 2
