"""
Tests for clip and temporal triplet sampling
"""
import numpy as np
import pytest
from scipy import stats

from src.sampling.triplet import (
    CropOutOfBounds,
    FrameTooSmall,
    SamplingConfig,
    VideoTooShort,
    check_video,
    negative_start_candidates,
    sample_clip,
    sample_negative_start,
    sample_triplet,
)
from src.tensor.core import CropBox, VideoClip


def _indexed_video(L, size=32):
    """Frame t has every pixel equal to t / (L - 1), so frame values encode indices"""
    frames = np.repeat(np.linspace(0.0, 1.0, L)[:, None, None, None], size * size * 3).reshape(L, size, size, 3)
    return VideoClip(frames=frames, source_id="indexed")


def _frame_indices(clip, L):
    return np.rint(clip.frames[:, 0, 0, 0] * (L - 1)).astype(int).tolist()


def test_sample_clip_indices():
    """L=100, start 0, 16 frames at stride 4 gives 0, 4, ..., 60"""
    video = _indexed_video(100)
    clip = sample_clip(video, 0, SamplingConfig(clip_len=16, temporal_stride=4))
    assert _frame_indices(clip, 100) == list(range(0, 64, 4))
    assert clip.start_timestep == 0 and clip.temporal_stride == 4


def test_sample_clip_wraps():
    """Windows past the end loop back to the start"""
    video = _indexed_video(20)
    clip = sample_clip(video, 10, SamplingConfig(clip_len=16, temporal_stride=4))
    assert _frame_indices(clip, 20) == [(10 + 4 * i) % 20 for i in range(16)]
    assert _frame_indices(clip, 20)[:5] == [10, 14, 18, 2, 6]


def test_sample_clip_identity_and_crop():
    video = _indexed_video(12, size=16)
    clip = sample_clip(video, 0, SamplingConfig(clip_len=12, temporal_stride=1))
    assert np.array_equal(clip.frames, video.frames)

    cropped = sample_clip(video, 0, SamplingConfig(clip_len=4, temporal_stride=1), CropBox(2, 3, 8, 8))
    assert cropped.shape == (4, 8, 8, 3)
    assert cropped.crop_box == CropBox(2, 3, 8, 8)

    with pytest.raises(CropOutOfBounds):
        sample_clip(video, 0, SamplingConfig(clip_len=4), CropBox(10, 10, 8, 8))


def test_negative_start_candidates():
    assert negative_start_candidates(10, 5, 2).tolist() == [0, 1, 2, 8, 9]
    assert negative_start_candidates(6, 3, 0).tolist() == [0, 1, 2, 4, 5]
    assert negative_start_candidates(5, 2, 4).tolist() == []
    with pytest.raises(ValueError):
        negative_start_candidates(0, 0, 1)


def test_triplet_constraints_hold():
    """10,000 triplets on a 100-frame video all satisfy the tau, time and crop rules"""
    video = _indexed_video(100)
    cfg = SamplingConfig(tau=2)
    rng = np.random.default_rng(0)
    for _ in range(10_000):
        t = sample_triplet(video, cfg, rng)
        assert abs(t.t_a - t.t_n) > 2
        assert t.t_p == t.t_a
        assert t.positive.crop_box != t.anchor.crop_box
        assert t.positive.crop_box.offset_from(t.anchor.crop_box) >= cfg.crop_offset


def test_triplet_short_video_errors():
    with pytest.raises(VideoTooShort):
        sample_triplet(_indexed_video(3), SamplingConfig(tau=10), np.random.default_rng(0))

    with pytest.raises(FrameTooSmall):
        sample_triplet(_indexed_video(10, size=16), SamplingConfig(crop_size=20), np.random.default_rng(0))


def test_triplet_tau_zero_boundary():
    """With tau = 0 and L = 2 the negative is always the other frame"""
    video = _indexed_video(2)
    cfg = SamplingConfig(clip_len=2, temporal_stride=1, tau=0)
    rng = np.random.default_rng(3)
    for _ in range(50):
        t = sample_triplet(video, cfg, rng)
        assert t.t_n == 1 - t.t_a


def test_triplet_deterministic():
    video = _indexed_video(40)
    cfg = SamplingConfig()
    a = sample_triplet(video, cfg, np.random.default_rng(11))
    b = sample_triplet(video, cfg, np.random.default_rng(11))
    assert (a.t_a, a.t_n) == (b.t_a, b.t_n)
    for name in ("anchor", "positive", "negative"):
        assert getattr(a, name).crop_box == getattr(b, name).crop_box
        assert np.array_equal(getattr(a, name).frames, getattr(b, name).frames)


def test_negative_start_uniform():
    """t_n is uniform over the candidate set (chi-square, p > 0.01)"""
    L, t_a, tau = 30, 12, 2
    candidates = negative_start_candidates(L, t_a, tau)
    rng = np.random.default_rng(2024)
    draws = np.array([sample_negative_start(L, t_a, tau, rng) for _ in range(100_000)])
    observed = np.array([np.sum(draws == c) for c in candidates])
    assert observed.sum() == draws.size
    _, p_value = stats.chisquare(observed)
    assert p_value > 0.01


def test_check_video():
    cfg = SamplingConfig()
    check_video(_indexed_video(16), cfg)

    with pytest.raises(VideoTooShort):
        check_video(_indexed_video(3), SamplingConfig(tau=5))
    # 24px crop in 32px frames: the central anchor has no partner 6px away
    with pytest.raises(FrameTooSmall):
        check_video(_indexed_video(16), SamplingConfig(crop_size=24))
    with pytest.raises(FrameTooSmall):
        check_video(_indexed_video(16, size=16), cfg)


def test_sampling_config_defaults():
    cfg = SamplingConfig()
    assert (cfg.clip_len, cfg.temporal_stride, cfg.tau) == (16, 4, 2)
    assert cfg.crop_offset == cfg.crop_size // 4
    assert SamplingConfig(clip_len=1).validate()
