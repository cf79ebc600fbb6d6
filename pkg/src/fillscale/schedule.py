"""Reward normalization, the diversity-vs-fill weighting ramp, and fusion."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigError,
    DegenerateInputError,
    NumericError,
    ShapeMismatchError,
)


@dataclass(frozen=True)
class ScheduleConfig:
    """Ramp bounds in checkpoint-index units plus variance-adjustment knobs."""

    s_begin: float
    s_end: float
    variance_center: float = 0.00065
    variance_sensitivity: float = 50.0

    def __post_init__(self):
        if not self.s_begin < self.s_end:
            raise ConfigError("s_begin must be strictly below s_end")
        if self.variance_sensitivity < 0:
            raise ConfigError("variance_sensitivity must be non-negative")


def minmax_normalize(values) -> np.ndarray:
    """Scale to [0, 1]; a constant vector maps to all 0.5.

    The constant case deliberately lands mid-range so that when one reward
    carries no information the other alone determines the fused ranking.
    """
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ShapeMismatchError("cannot normalize an empty vector")
    if not np.all(np.isfinite(arr)):
        raise NumericError("non-finite values in normalization input")
    lo, hi = float(arr.min()), float(arr.max())
    if hi == lo:
        return np.full(arr.size, 0.5)
    return (arr - lo) / (hi - lo)


def weight_at(checkpoint_index: float, total_checkpoints: int,
              cfg: ScheduleConfig) -> float:
    """Diversity weight at a checkpoint: 1 early, 0 late, linear between.

    Exactly 1 at or before ``s_begin`` and exactly 0 at or after ``s_end``,
    so early filtering favors spread and late filtering favors the fill
    score alone.
    """
    if total_checkpoints < 1:
        raise ConfigError("total_checkpoints must be positive")
    s = float(checkpoint_index)
    if not 0 <= s < total_checkpoints:
        raise ConfigError(
            f"checkpoint {checkpoint_index} outside [0, {total_checkpoints})")
    if s <= cfg.s_begin:
        return 1.0
    if s >= cfg.s_end:
        return 0.0
    return (cfg.s_end - s) / (cfg.s_end - cfg.s_begin)


def _logistic(x: float) -> float:
    # tanh form avoids overflow for large |x|
    return 0.5 * (1.0 + math.tanh(0.5 * x))


def variance_adjust(w: float, fill_values, variance_center: float,
                    variance_sensitivity: float) -> float:
    """Shift the weight by how spread the raw fill scores are.

    High variance means the fill reward separates the batch well, so its
    share grows (the diversity weight drops); low variance does the
    opposite. At variance exactly equal to the center the weight is
    returned unchanged. The result is clamped to [0, 1].
    """
    arr = np.asarray(fill_values, dtype=np.float64).ravel()
    if arr.size < 2:
        raise DegenerateInputError("variance needs at least 2 values")
    if not np.all(np.isfinite(arr)):
        raise NumericError("non-finite fill values")
    var = float(np.var(arr))
    adjusted = w - _logistic((var - variance_center) * variance_sensitivity) + 0.5
    return min(1.0, max(0.0, adjusted))


def unified_rewards(norm_fill, norm_div, w_hat: float) -> np.ndarray:
    """Convex combination: w_hat of diversity, the rest of fill score."""
    nf = np.asarray(norm_fill, dtype=np.float64).ravel()
    nd = np.asarray(norm_div, dtype=np.float64).ravel()
    if nf.shape != nd.shape:
        raise ShapeMismatchError("reward vectors differ in length")
    if not 0.0 <= w_hat <= 1.0:
        raise ConfigError(f"weight {w_hat} outside [0, 1]")
    return w_hat * nd + (1.0 - w_hat) * nf
