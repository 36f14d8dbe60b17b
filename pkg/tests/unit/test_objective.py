"""
Tests for similarity, the temporal-discriminative loss and the memory bank
"""
from collections import deque

import numpy as np
import pytest

from src.health.diagnostics import reference_td_loss
from src.objective.bank import BatchExceedsCapacity, MemoryBank, NonUnitAnchor, bank_init, bank_push
from src.objective.loss import (
    EmptyBatch,
    ObjectiveConfig,
    TripletEmbedding,
    similarity,
    td_loss,
    td_loss_gradients,
)
from src.utils.errors import ConfigError


def _unit(rng, n, dim):
    x = rng.standard_normal((n, dim))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def _empty_bank(dim):
    return MemoryBank(slots=np.empty((0, dim)))


def _batch(v_a, v_p, v_n):
    return [TripletEmbedding(a, p, n) for a, p, n in zip(v_a, v_p, v_n)]


def test_similarity_values():
    u = np.array([1.0, 0.0])
    v = np.array([0.0, 1.0])
    assert similarity(u, u, ObjectiveConfig(temperature=1.0)) == pytest.approx(np.e)
    assert similarity(u, v, ObjectiveConfig(temperature=1.0)) == 1.0
    assert similarity(u, -u, ObjectiveConfig(temperature=0.07)) == pytest.approx(np.exp(-1 / 0.07))
    assert similarity(u, -u) > 0.0


def test_loss_symmetric_case_is_log_two():
    """Positive and negative equally similar to the anchor with no bank"""
    rng = np.random.default_rng(0)
    v_a, u = _unit(rng, 1, 8), _unit(rng, 1, 8)
    loss, _ = td_loss(_batch(v_a, u, u), _empty_bank(8), ObjectiveConfig(bank_size=0))
    assert abs(loss - np.log(2.0)) <= 1e-12


def test_loss_orthogonal_negative():
    """a . p = 1, a . n = 0, T = 1 gives log(1 + e^-1)"""
    e1, e2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    cfg = ObjectiveConfig(temperature=1.0, bank_size=0)
    loss, _ = td_loss([TripletEmbedding(e1, e1, e2)], _empty_bank(2), cfg)
    assert loss == pytest.approx(np.log1p(np.exp(-1.0)), abs=1e-12)
    assert loss == pytest.approx(0.31326, abs=1e-5)


def test_loss_matches_reference():
    rng = np.random.default_rng(1)
    for _ in range(20):
        B, K, D = int(rng.integers(1, 8)), int(rng.integers(0, 12)), 16
        T = float(rng.uniform(0.05, 1.0))
        v_a, v_p, v_n = _unit(rng, B, D), _unit(rng, B, D), _unit(rng, B, D)
        bank = MemoryBank(slots=_unit(rng, K, D) if K else np.empty((0, D)))
        loss, per_sample = td_loss(_batch(v_a, v_p, v_n), bank, ObjectiveConfig(temperature=T, bank_size=K))
        expected = reference_td_loss(v_a, v_p, v_n, bank.slots, T)
        np.testing.assert_allclose(per_sample, expected, atol=1e-10, rtol=0)
        assert loss == pytest.approx(expected.mean(), abs=1e-10)


def test_loss_reductions():
    rng = np.random.default_rng(2)
    v_a, v_p, v_n = _unit(rng, 4, 8), _unit(rng, 4, 8), _unit(rng, 4, 8)
    bank = MemoryBank(slots=_unit(rng, 3, 8))
    mean, per_sample = td_loss(_batch(v_a, v_p, v_n), bank, ObjectiveConfig(bank_size=3))
    total, _ = td_loss(_batch(v_a, v_p, v_n), bank, ObjectiveConfig(bank_size=3, reduction="sum"))
    assert total == pytest.approx(4 * mean, abs=1e-10)
    assert np.all(per_sample > 0.0)


def test_loss_gradient_matches_finite_differences():
    rng = np.random.default_rng(3)
    B, K, D, eps = 2, 4, 6, 1e-5
    cfg = ObjectiveConfig(temperature=0.5, bank_size=K)
    v_a, v_p, v_n = _unit(rng, B, D), _unit(rng, B, D), _unit(rng, B, D)
    bank = MemoryBank(slots=_unit(rng, K, D))
    grads = td_loss_gradients(_batch(v_a, v_p, v_n), bank, cfg)

    def loss_at(p, n):
        return td_loss(_batch(v_a, p, n), bank, cfg)[0]

    for key in ("v_p", "v_n"):
        base = v_p if key == "v_p" else v_n
        numeric = np.zeros_like(base)
        for index in np.ndindex(base.shape):
            plus, minus = base.copy(), base.copy()
            plus[index] += eps
            minus[index] -= eps
            if key == "v_p":
                numeric[index] = (loss_at(plus, v_n) - loss_at(minus, v_n)) / (2 * eps)
            else:
                numeric[index] = (loss_at(v_p, plus) - loss_at(v_p, minus)) / (2 * eps)
        np.testing.assert_allclose(grads[key], numeric, rtol=1e-5, atol=1e-9)

    # anchors are constants
    assert np.all(grads["v_a"] == 0.0)


def test_loss_monotonic_in_positive_similarity():
    """Moving the positive towards the anchor lowers the loss"""
    e1, e2, e3 = np.eye(3)
    cfg = ObjectiveConfig(temperature=0.5, bank_size=0)
    losses = []
    for weight in (0.0, 0.5, 0.9, 1.0):
        p = weight * e1 + (1 - weight) * e3
        p /= np.linalg.norm(p)
        losses.append(td_loss([TripletEmbedding(e1, p, e2)], _empty_bank(3), cfg)[0])
    assert losses == sorted(losses, reverse=True)


def test_loss_closed_form_without_bank():
    """K = 0: each term is -s_p + logaddexp(s_p, s_n)"""
    rng = np.random.default_rng(12)
    cfg = ObjectiveConfig(temperature=0.2, bank_size=0, reduction="sum")
    for _ in range(20):
        v_a, v_p, v_n = _unit(rng, 4, 16), _unit(rng, 4, 16), _unit(rng, 4, 16)
        s_p = np.sum(v_a * v_p, axis=1) / cfg.temperature
        s_n = np.sum(v_a * v_n, axis=1) / cfg.temperature
        loss, per_sample = td_loss(_batch(v_a, v_p, v_n), _empty_bank(16), cfg)
        np.testing.assert_allclose(per_sample, -s_p + np.logaddexp(s_p, s_n), atol=1e-12, rtol=0)
        assert abs(loss - np.sum(-s_p + np.logaddexp(s_p, s_n))) <= 1e-12


def test_loss_invariant_to_batch_order():
    rng = np.random.default_rng(13)
    v_a, v_p, v_n = _unit(rng, 6, 8), _unit(rng, 6, 8), _unit(rng, 6, 8)
    bank = MemoryBank(slots=_unit(rng, 10, 8))
    order = rng.permutation(6)
    for reduction in ("mean", "sum"):
        cfg = ObjectiveConfig(bank_size=10, reduction=reduction)
        a, per_a = td_loss(_batch(v_a, v_p, v_n), bank, cfg)
        b, per_b = td_loss(_batch(v_a[order], v_p[order], v_n[order]), bank, cfg)
        assert a == pytest.approx(b, abs=1e-12)
        np.testing.assert_allclose(per_b, per_a[order], atol=1e-12, rtol=0)


def test_loss_monotonic_in_negative_similarity():
    """Moving the negative towards the anchor raises the loss"""
    e1, e2, e3 = np.eye(3)
    rng = np.random.default_rng(14)
    bank = MemoryBank(slots=_unit(rng, 4, 3))
    cfg = ObjectiveConfig(temperature=0.5, bank_size=4)
    losses = []
    for weight in (0.0, 0.3, 0.6, 0.9, 1.0):
        n = weight * e1 + (1 - weight) * e3
        n /= np.linalg.norm(n)
        losses.append(td_loss([TripletEmbedding(e1, e2, n)], bank, cfg)[0])
    assert all(later > earlier for earlier, later in zip(losses, losses[1:]))


def test_loss_bank_order_invariant():
    rng = np.random.default_rng(4)
    v_a, v_p, v_n = _unit(rng, 3, 8), _unit(rng, 3, 8), _unit(rng, 3, 8)
    slots = _unit(rng, 5, 8)
    cfg = ObjectiveConfig(bank_size=5)
    a, _ = td_loss(_batch(v_a, v_p, v_n), MemoryBank(slots=slots), cfg)
    b, _ = td_loss(_batch(v_a, v_p, v_n), MemoryBank(slots=slots[::-1], cursor=2), cfg)
    assert a == pytest.approx(b, abs=1e-12)


def test_loss_switches():
    """Dropping the intra negative or the bank removes its term from the denominator"""
    rng = np.random.default_rng(5)
    v_a, v_p, v_n = _unit(rng, 2, 8), _unit(rng, 2, 8), _unit(rng, 2, 8)
    bank = MemoryBank(slots=_unit(rng, 4, 8))
    full, _ = td_loss(_batch(v_a, v_p, v_n), bank, ObjectiveConfig(bank_size=4))
    no_bank, _ = td_loss(_batch(v_a, v_p, v_n), bank, ObjectiveConfig(bank_size=4, use_bank_negatives=False))
    no_intra, _ = td_loss(_batch(v_a, v_p, v_n), bank, ObjectiveConfig(bank_size=4, use_intra_negative=False))
    assert no_bank < full and no_intra < full

    expected = reference_td_loss(v_a, v_p, v_n, np.empty((0, 8)), ObjectiveConfig().temperature).mean()
    assert no_bank == pytest.approx(expected, abs=1e-10)


def test_loss_empty_batch():
    with pytest.raises(EmptyBatch):
        td_loss([], _empty_bank(4))


def test_objective_config_validation():
    assert not ObjectiveConfig().validate()
    assert ObjectiveConfig(temperature=0.0).validate()
    assert ObjectiveConfig(reduction="max").validate()
    with pytest.raises(ConfigError):
        ObjectiveConfig(use_intra_negative=False, bank_size=0).check()
    with pytest.raises(ConfigError):
        ObjectiveConfig(use_intra_negative=False, use_bank_negatives=False).check()
    ObjectiveConfig(use_intra_negative=False, bank_size=8).check()


def test_bank_push_overwrites_oldest():
    """K=4: push a, b, c, d then e leaves e, b, c, d with the cursor at 1"""
    a, b, c, d = np.eye(4)
    e = np.full(4, 0.5)
    bank = MemoryBank(slots=np.zeros((4, 4)))
    bank = bank_push(bank, [a, b, c, d])
    assert bank.cursor == 0
    bank = bank_push(bank, [e])
    assert bank.cursor == 1
    np.testing.assert_array_equal(bank.slots, [e, b, c, d])
    np.testing.assert_array_equal(bank.ordered(), [b, c, d, e])


def test_bank_push_single_anchors():
    """K + 3 single pushes keep exactly the last K anchors"""
    rng = np.random.default_rng(6)
    K, D = 5, 4
    bank = bank_init(K, rng, dim=D)
    oracle = deque(bank.slots, maxlen=K)
    for _ in range(K + 3):
        anchor = _unit(rng, 1, D)
        bank = bank_push(bank, anchor)
        oracle.extend(anchor)
    assert bank.cursor == (K + 3) % K
    np.testing.assert_array_equal(bank.ordered(), np.array(oracle))


def test_bank_push_edges():
    bank = bank_init(3, np.random.default_rng(0), dim=4)
    assert bank_push(bank, []) is bank
    with pytest.raises(BatchExceedsCapacity):
        bank_push(bank, np.ones((4, 4)) / 2.0)
    assert not bank.slots.flags.writeable


def test_bank_push_rejects_unnormalized_anchors():
    bank = bank_init(4, np.random.default_rng(1), dim=3)
    with pytest.raises(NonUnitAnchor):
        bank_push(bank, [np.array([1.0, 1.0, 0.0])])
    with pytest.raises(NonUnitAnchor):
        bank_push(bank, [np.array([1.0, 0.0, 0.0]), np.zeros(3)])
    pushed = bank_push(bank, [np.array([0.0, 0.6, 0.8])])
    np.testing.assert_allclose(np.linalg.norm(pushed.slots, axis=1), 1.0, atol=1e-12)


def test_bank_init():
    a = bank_init(16, np.random.default_rng(7), dim=8)
    b = bank_init(16, np.random.default_rng(7), dim=8)
    assert np.array_equal(a.slots, b.slots)
    np.testing.assert_allclose(np.linalg.norm(a.slots, axis=1), 1.0, atol=1e-12)
    assert a.cursor == 0

    empty = bank_init(0, np.random.default_rng(0), dim=8)
    assert empty.capacity == 0
    with pytest.raises(ValueError):
        bank_init(-1, np.random.default_rng(0))


def test_bank_init_is_spread_out():
    """Mean pairwise |cosine| for K=1024, D=128 is about sqrt(2 / (pi * 128))"""
    bank = bank_init(1024, np.random.default_rng(8), dim=128)
    cosine = bank.slots @ bank.slots.T
    off_diagonal = np.abs(cosine[~np.eye(1024, dtype=bool)])
    assert abs(off_diagonal.mean() - 0.0705) <= 0.01
