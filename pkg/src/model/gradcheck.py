"""
Gradient Check
Compares analytic parameter gradients with central finite differences
"""
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Tuple

import numpy as np
import tensorflow as tf

from src.model.encoder import to_weights, value_and_gradients
from src.model.params import Params, copy_params

Coordinate = Tuple[str, Tuple[int, ...]]


@dataclass
class GradCheckReport:
    """Outcome of a finite-difference comparison"""
    n_checked: int
    n_passed: int
    max_rel_error: float
    tolerance: float
    min_fraction: float
    worst: List[Dict] = field(default_factory=list)

    @property
    def fraction_passed(self) -> float:
        return self.n_passed / self.n_checked if self.n_checked else 1.0

    @property
    def passed(self) -> bool:
        return self.fraction_passed >= self.min_fraction

    def summary(self) -> Dict:
        return {
            "checked": self.n_checked,
            "passed": self.n_passed,
            "fraction": round(self.fraction_passed, 4),
            "max_rel_error": self.max_rel_error,
        }


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-7) -> np.ndarray:
    """|a - n| / max(|a|, |n|, floor)"""
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return np.abs(analytic - numeric) / scale


def sample_coordinates(params: Params, n: int, rng: np.random.Generator) -> List[Coordinate]:
    """Draw n parameter coordinates, spread over tensors in proportion to their size"""
    names = list(params.keys())
    sizes = np.array([params[name].size for name in names])
    flat = rng.choice(int(sizes.sum()), size=min(n, int(sizes.sum())), replace=False)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    coords = []
    for index in np.sort(flat):
        t = int(np.searchsorted(offsets, index, side="right") - 1)
        name = names[t]
        coords.append((name, tuple(int(i) for i in np.unravel_index(index - offsets[t], params[name].shape))))
    return coords


def central_differences(
    params: Params,
    scalar_fn: Callable[[Dict[str, tf.Tensor]], tf.Tensor],
    coords: List[Coordinate],
    eps: float = 1e-5
) -> np.ndarray:
    """(f(p + eps) - f(p - eps)) / (2 eps) at each coordinate"""
    work = copy_params(params)
    out = np.empty(len(coords))
    for i, (name, index) in enumerate(coords):
        original = work[name][index]
        work[name][index] = original + eps
        plus = float(scalar_fn(to_weights(work)).numpy())
        work[name][index] = original - eps
        minus = float(scalar_fn(to_weights(work)).numpy())
        work[name][index] = original
        out[i] = (plus - minus) / (2.0 * eps)
    return out


def check_gradients(
    params: Params,
    scalar_fn: Callable[[Dict[str, tf.Tensor]], tf.Tensor],
    n_coords: int,
    rng: np.random.Generator,
    eps: float = 1e-5,
    tolerance: float = 1e-4,
    min_fraction: float = 0.99
) -> GradCheckReport:
    """
    Gradient check on randomly sampled coordinates

    Args:
        params: Point of evaluation
        scalar_fn: Scalar function of the TF weights
        n_coords: Number of coordinates to compare
        rng: Seeded generator choosing coordinates
        eps: Finite-difference step
        tolerance: Maximum relative error per coordinate
        min_fraction: Fraction of coordinates that must pass

    Returns:
        GradCheckReport
    """
    _, grads, _ = value_and_gradients(params, scalar_fn)
    coords = sample_coordinates(params, n_coords, rng)
    analytic = np.array([grads[name][index] for name, index in coords])
    numeric = central_differences(params, scalar_fn, coords, eps)
    errors = relative_error(analytic, numeric)

    order = np.argsort(errors)[::-1][:5]
    worst = [
        {"param": coords[i][0], "index": list(coords[i][1]), "analytic": float(analytic[i]),
         "numeric": float(numeric[i]), "rel_error": float(errors[i])}
        for i in order
    ]
    return GradCheckReport(
        n_checked=len(coords),
        n_passed=int(np.sum(errors <= tolerance)),
        max_rel_error=float(errors.max()) if len(errors) else 0.0,
        tolerance=tolerance,
        min_fraction=min_fraction,
        worst=worst,
    )
