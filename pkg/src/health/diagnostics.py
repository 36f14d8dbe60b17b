"""
System Diagnostics
Invariance self-check of augmentation, loss, gradients, memory bank and momentum mechanics
"""
from collections import deque
from datetime import datetime
from typing import Any, Callable, Dict, List, Optional
import time
import traceback

import numpy as np
import tensorflow as tf

from src.augment.tca import TCAConfig, apply_tca, cutout_regions, derivative_scale, tca_mix
from src.model.encoder import EncoderSpec, encode, forward, init_params
from src.model.gradcheck import check_gradients, relative_error
from src.model.momentum import EncoderPair, momentum_update
from src.objective.bank import MemoryBank, bank_init, bank_push
from src.objective.loss import ObjectiveConfig, TripletEmbedding, td_loss, td_loss_gradients
from src.sampling.triplet import SamplingConfig, sample_triplet
from src.tensor.core import VideoClip, frame_difference
from src.utils.logger import get_logger

logger = get_logger()

FAULTS = ("cascade_order", "momentum_swap", "bank_lifo")


def _lifo_push(bank: MemoryBank, anchors) -> MemoryBank:
    # fault: every anchor lands on the newest slot
    slots = np.array(bank.slots)
    newest = (bank.cursor - 1) % bank.capacity
    for anchor in np.atleast_2d(anchors):
        slots[newest] = anchor
    return MemoryBank(slots=slots, cursor=bank.cursor)


def _swapped_momentum(pair: EncoderPair) -> EncoderPair:
    # fault: coefficients exchanged
    history = {
        name: (1.0 - pair.m) * pair.history[name] + pair.m * pair.online[name]
        for name in pair.history
    }
    return EncoderPair(online=pair.online, history=history, m=pair.m)


def reference_td_loss(v_a, v_p, v_n, bank_slots, temperature: float) -> np.ndarray:
    """Straight-line per-sample loss: -log(d_p / (d_p + d_n + sum_j d(v_a, B_j)))"""
    out = []
    for a, p, n in zip(v_a, v_p, v_n):
        d_p = np.exp(np.dot(a, p) / temperature)
        d_n = np.exp(np.dot(a, n) / temperature)
        d_bank = sum(np.exp(np.dot(a, b) / temperature) for b in bank_slots)
        out.append(-np.log(d_p / (d_p + d_n + d_bank)))
    return np.array(out)


def _unit_rows(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    x = rng.standard_normal((n, dim))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


class SystemDiagnostics:
    """
    Run the invariance suite

    Features:
    - Time-derivative scaling of TCA and the cascade order
    - Loss oracle and loss gradients
    - Encoder gradient check and embedding norms
    - FIFO memory bank and momentum contraction
    - Triplet sampling constraints
    """

    def __init__(self, fault: Optional[str] = None, seed: int = 0):
        """
        Initialize diagnostics

        Args:
            fault: Optional injected fault, one of FAULTS
            seed: Seed for every random draw of the suite
        """
        if fault is not None and fault not in FAULTS:
            raise ValueError(f"unknown fault {fault!r}; known: {list(FAULTS)}")
        self.logger = logger
        self.fault = fault
        self.seed = seed

        self._push: Callable = _lifo_push if fault == "bank_lifo" else bank_push
        self._momentum: Callable = _swapped_momentum if fault == "momentum_swap" else momentum_update
        self._cascade = (
            ("cutout", "internal_mix", "external_mix") if fault == "cascade_order"
            else TCAConfig().cascade
        )

    def _rng(self, tag: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, tag])

    def run_all_diagnostics(self) -> Dict[str, Any]:
        """Run all property checks"""
        self.logger.info(
            f"Running selfcheck{' with fault ' + self.fault if self.fault else ''}",
            category="selfcheck",
        )
        started = time.time()

        results = {
            'augmentation': self._run_category('Augmentation', [
                ('tca_derivative_scaling', self._check_derivative_scaling),
                ('tca_cascade', self._check_cascade),
            ]),
            'objective': self._run_category('Objective', [
                ('loss_oracle', self._check_loss_oracle),
                ('loss_gradient', self._check_loss_gradient),
            ]),
            'model': self._run_category('Model', [
                ('embedding_norm', self._check_embedding_norm),
                ('encoder_gradient', self._check_encoder_gradient),
            ]),
            'mechanics': self._run_category('Algorithm mechanics', [
                ('bank_fifo', self._check_bank_fifo),
                ('momentum_contraction', self._check_momentum),
                ('triplet_constraints', self._check_triplets),
            ]),
            'timestamp': datetime.now(),
        }

        all_tests = []
        for category in results.values():
            if isinstance(category, dict) and 'tests' in category:
                all_tests.extend(category['tests'])

        passed = sum(1 for t in all_tests if t.get('passed', False))
        total = len(all_tests)
        results['summary'] = {
            'total_tests': total,
            'passed': passed,
            'failed': total - passed,
            'failed_names': [t['name'] for t in all_tests if not t.get('passed', False)],
            'pass_rate': (passed / total * 100) if total > 0 else 0,
            'duration': time.time() - started,
        }
        return results

    def _run_category(self, category: str, checks: List) -> Dict[str, Any]:
        tests = []
        for name, check in checks:
            try:
                passed, details = check()
                tests.append({'name': name, 'passed': bool(passed), 'details': details})
            except Exception as e:
                self.logger.debug(traceback.format_exc(), category="selfcheck")
                tests.append({'name': name, 'passed': False, 'error': str(e)})
            self.logger.log_selfcheck(name, tests[-1]['passed'], tests[-1].get('details'))
        return {'category': category, 'tests': tests}

    def _random_clip(self, rng: np.random.Generator, source_id: str, shape=(16, 32, 32, 3)) -> VideoClip:
        return VideoClip(frames=rng.uniform(size=shape), source_id=source_id)

    def _check_derivative_scaling(self):
        """Delta^k of a mixed clip equals alpha * Delta^k of the original"""
        rng = self._rng(1)
        worst = 0.0
        for i in range(20):
            clip = self._random_clip(rng, f"clip_{i}")
            image = rng.uniform(size=clip.frames.shape[1:])
            for alpha in (0.5, 0.7, 1.0):
                mixed = tca_mix(clip, image, alpha)
                for k in (1, 2, 3):
                    error = np.abs(frame_difference(mixed, k) - alpha * frame_difference(clip, k)).max()
                    worst = max(worst, float(error))
        return worst <= 1e-12, {'max_abs_error': worst}

    def _check_cascade(self):
        """Cutout region is zero in every output frame; elsewhere derivatives scale by the alpha product"""
        rng = self._rng(2)
        cfg = TCAConfig(cascade=self._cascade)
        worst_region, worst_scale = 0.0, 0.0
        for i in range(10):
            clip = self._random_clip(rng, f"clip_{i}")
            donor = self._random_clip(rng, f"donor_{i}")
            out, record = apply_tca(clip, donor, cfg, rng)
            mask = np.ones(clip.frames.shape[1:3], dtype=bool)
            for box in cutout_regions(record):
                region = out.frames[:, box.top:box.top + box.height, box.left:box.left + box.width]
                worst_region = max(worst_region, float(np.abs(region).max(initial=0.0)))
                mask[box.top:box.top + box.height, box.left:box.left + box.width] = False
            scale = derivative_scale(record)
            diff = frame_difference(out, 1) - scale * frame_difference(clip, 1)
            worst_scale = max(worst_scale, float(np.abs(diff[:, mask]).max(initial=0.0)))
        passed = worst_region == 0.0 and worst_scale <= 1e-12
        return passed, {'cutout_max': worst_region, 'scaling_error': worst_scale}

    def _check_loss_oracle(self):
        """td_loss against a straight-line evaluation; log 2 in the symmetric case"""
        rng = self._rng(3)
        worst = 0.0
        for _ in range(50):
            B, K, D = int(rng.integers(1, 6)), int(rng.integers(0, 9)), 16
            T = float(rng.uniform(0.05, 1.0))
            v_a, v_p, v_n = _unit_rows(rng, B, D), _unit_rows(rng, B, D), _unit_rows(rng, B, D)
            bank = MemoryBank(slots=_unit_rows(rng, K, D) if K else np.empty((0, D)))
            cfg = ObjectiveConfig(temperature=T, bank_size=K)
            batch = [TripletEmbedding(a, p, n) for a, p, n in zip(v_a, v_p, v_n)]
            _, per_sample = td_loss(batch, bank, cfg)
            expected = reference_td_loss(v_a, v_p, v_n, bank.slots, T)
            worst = max(worst, float(np.abs(per_sample - expected).max()))

        v = _unit_rows(rng, 1, 16)[0]
        u = _unit_rows(rng, 1, 16)[0]
        symmetric, _ = td_loss([TripletEmbedding(v, u, u)], MemoryBank(slots=np.empty((0, 16))),
                               ObjectiveConfig(bank_size=0))
        symmetric_error = abs(symmetric - np.log(2.0))
        passed = worst <= 1e-10 and symmetric_error <= 1e-12
        return passed, {'max_abs_error': worst, 'log2_error': symmetric_error}

    def _check_loss_gradient(self):
        """Loss gradient w.r.t. v_p and v_n against central differences"""
        rng = self._rng(4)
        B, K, D, eps = 3, 5, 8, 1e-5
        cfg = ObjectiveConfig(temperature=0.5, bank_size=K)
        v_a, v_p, v_n = _unit_rows(rng, B, D), _unit_rows(rng, B, D), _unit_rows(rng, B, D)
        bank = MemoryBank(slots=_unit_rows(rng, K, D))

        def loss_at(p, n):
            batch = [TripletEmbedding(a, pi, ni) for a, pi, ni in zip(v_a, p, n)]
            return td_loss(batch, bank, cfg)[0]

        grads = td_loss_gradients([TripletEmbedding(a, p, n) for a, p, n in zip(v_a, v_p, v_n)], bank, cfg)
        worst = 0.0
        for key, base in (("v_p", v_p), ("v_n", v_n)):
            numeric = np.zeros_like(base)
            for index in np.ndindex(base.shape):
                plus, minus = base.copy(), base.copy()
                plus[index] += eps
                minus[index] -= eps
                if key == "v_p":
                    numeric[index] = (loss_at(plus, v_n) - loss_at(minus, v_n)) / (2 * eps)
                else:
                    numeric[index] = (loss_at(v_p, plus) - loss_at(v_p, minus)) / (2 * eps)
            worst = max(worst, float(relative_error(grads[key], numeric).max()))
        anchor_grad = float(np.abs(grads["v_a"]).max())
        return worst <= 1e-5 and anchor_grad == 0.0, {'max_rel_error': worst, 'anchor_grad': anchor_grad}

    def _check_embedding_norm(self):
        """Every embedding has unit norm"""
        rng = self._rng(5)
        spec = EncoderSpec()
        params = init_params(spec, rng)
        v = encode(params, rng.uniform(size=(4, 16, 32, 32, 3)), spec)
        worst = float(np.abs(np.linalg.norm(v, axis=1) - 1.0).max())
        return worst <= 1e-9, {'max_norm_error': worst}

    def _check_encoder_gradient(self):
        """Gradient of v . c against central differences on sampled parameters"""
        rng = self._rng(6)
        spec = EncoderSpec(blocks=((4, 2, 1), (8, 2, 2)), embed_dim=16)
        params = init_params(spec, rng)
        x = tf.constant(rng.uniform(size=(2, 4, 8, 8, 3)))
        c = tf.constant(rng.standard_normal((2, spec.embed_dim)))

        def scalar_fn(weights):
            return tf.reduce_sum(forward(weights, x, spec) * c)

        report = check_gradients(params, scalar_fn, n_coords=200, rng=rng)
        return report.passed, report.summary()

    def _check_bank_fifo(self):
        """Bank holds exactly the last K anchors, oldest overwritten first"""
        rng = self._rng(7)
        K, D = 4, 8
        bank = bank_init(K, rng, dim=D)
        oracle = deque(bank.slots, maxlen=K)
        for size in (2, 3, 1, 4, 1, 1, 2):
            anchors = _unit_rows(rng, size, D)
            bank = self._push(bank, anchors)
            oracle.extend(anchors)
        passed = np.array_equal(bank.ordered(), np.array(oracle))
        return passed, {'capacity': K, 'cursor': bank.cursor}

    def _check_momentum(self):
        """Frozen online scalar: history after n updates is 1 - m^n, contraction by m"""
        m = 0.99
        pair = EncoderPair(online={"w": np.array([1.0])}, history={"w": np.array([0.0])}, m=m)
        worst_closed, worst_contraction = 0.0, 0.0
        for n in range(1, 201):
            previous_gap = abs(pair.history["w"][0] - 1.0)
            pair = self._momentum(pair)
            gap = abs(pair.history["w"][0] - 1.0)
            worst_closed = max(worst_closed, abs(pair.history["w"][0] - (1.0 - m ** n)))
            worst_contraction = max(worst_contraction, abs(gap - m * previous_gap))
        passed = worst_closed <= 1e-12 and worst_contraction <= 1e-12
        return passed, {'closed_form_error': worst_closed, 'contraction_error': worst_contraction}

    def _check_triplets(self):
        """Every triplet satisfies the tau constraint, t_p == t_a and distinct crops"""
        rng = self._rng(8)
        cfg = SamplingConfig()
        video = VideoClip(frames=rng.uniform(size=(100, 32, 32, 3)), source_id="long_video")
        violations = 0
        for _ in range(1000):
            t = sample_triplet(video, cfg, rng)
            if not (abs(t.t_a - t.t_n) > cfg.tau and t.t_p == t.t_a
                    and t.positive.crop_box != t.anchor.crop_box):
                violations += 1
        return violations == 0, {'violations': violations, 'samples': 1000}


def format_table(results: Dict[str, Any]) -> str:
    """Pass/fail table of a diagnostics run"""
    lines = [f"{'property':<26} {'category':<22} result"]
    lines.append("-" * 56)
    for category in results.values():
        if isinstance(category, dict) and 'tests' in category:
            for test in category['tests']:
                status = "PASS" if test['passed'] else "FAIL"
                lines.append(f"{test['name']:<26} {category['category']:<22} {status}")
    summary = results['summary']
    lines.append("-" * 56)
    lines.append(f"{summary['passed']}/{summary['total_tests']} passed in {summary['duration']:.1f}s")
    return "\n".join(lines)


if __name__ == "__main__":
    print("🔍 Running selfcheck...")

    diag = SystemDiagnostics()
    results = diag.run_all_diagnostics()

    print(format_table(results))
    print(f"\n📊 Pass Rate: {results['summary']['pass_rate']:.1f}%")
