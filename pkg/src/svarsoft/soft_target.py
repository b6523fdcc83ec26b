"""Smoothed target density, importance weights and effective sample size.

All density work happens in log space: the regularisation scale can be as
small as 1e-6 and linear-space products underflow long before that.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import q_of
from .restrictions import MarginEvaluator

LOG2 = float(np.log(2.0))


class AllInfeasible(ValueError):
    """Every importance weight is zero; the batch carries no information."""


def logistic(x: float, delta: float) -> float:
    """1 / (1 + exp(-x/delta)), overflow-safe for any x/delta.

    Strictly inside (0, 1) mathematically; for x/delta below roughly -745
    the exp(x/delta) form underflows to 0.0 in float64.
    """
    t = x / delta
    if t >= 0:
        return 1.0 / (1.0 + np.exp(-t))
    e = np.exp(t)
    return e / (1.0 + e)


def log_regularizer(m: np.ndarray, delta: float) -> np.ndarray:
    """log Lambda(m, delta) = -log(1 + exp(-m/delta)), elementwise stable."""
    return -np.logaddexp(0.0, -np.asarray(m) / delta)


@dataclass
class SoftTargetParams:
    """Target f_delta at a fixed phi: normal kernel times logistic penalties."""

    evaluator: MarginEvaluator
    delta: float

    def __post_init__(self) -> None:
        if self.delta <= 0:
            raise ValueError("delta must be positive")


@dataclass(frozen=True)
class TargetEval:
    """One evaluation of log f_delta with its by-products."""

    log_f: float
    margins: np.ndarray
    Q: np.ndarray
    z: np.ndarray


def log_f_delta(z: np.ndarray, target: SoftTargetParams) -> TargetEval:
    """log f_delta(Z) up to the normalising constant.

    -||Z||^2_F / 2 plus the sum of log-logistic penalties over margins.
    """
    n = target.evaluator.phi.n
    Q = q_of(z.reshape(n, n))
    m = target.evaluator(Q)
    log_f = -0.5 * float(z @ z) + float(log_regularizer(m, target.delta).sum())
    return TargetEval(log_f=log_f, margins=m, Q=Q, z=z)


def log_importance_weight(margins: np.ndarray, delta: float) -> float:
    """log of the unnormalised weight; -inf when any margin is negative."""
    if margins.min() < 0.0:
        return -np.inf
    return float(np.logaddexp(0.0, -margins / delta).sum())


def importance_weight(margins: np.ndarray, delta: float) -> float:
    """Unnormalised importance weight, bounded by 0 <= w <= 2**s.

    Zero whenever the draw violates any restriction; the bound 2**s is
    attained when every margin sits exactly on the boundary.
    """
    margins = np.asarray(margins, dtype=float)
    lw = log_importance_weight(margins, delta)
    return float(np.exp(lw)) if np.isfinite(lw) else 0.0


def effective_sample_size(weights: np.ndarray) -> float:
    """ESS as a percentage of the draw count: (100/K) (sum w)^2 / sum w^2."""
    w = np.asarray(weights, dtype=float)
    if w.size == 0 or not np.any(w > 0):
        raise AllInfeasible("all importance weights are zero")
    return float(100.0 / w.size * w.sum() ** 2 / (w @ w))


@dataclass
class WeightedDrawBatch:
    """M draws with margins and unnormalised weights from one chain."""

    Z: np.ndarray  # (M, n*n)
    Q: np.ndarray  # (M, n, n)
    margins: np.ndarray  # (M, s)
    weights: np.ndarray  # (M,)
    margin_evals: int = 0  # evaluator calls consumed producing the batch

    @property
    def size(self) -> int:
        return self.weights.shape[0]

    @property
    def feasible_count(self) -> int:
        return int(np.count_nonzero(self.weights > 0))

    @property
    def is_empty_verdict(self) -> bool:
        return self.feasible_count == 0

    @property
    def ess_percent(self) -> float:
        return effective_sample_size(self.weights)

    def feasible_Q(self) -> np.ndarray:
        return self.Q[self.weights > 0]

    def resample_indices(self, K: int, rng: np.random.Generator) -> np.ndarray:
        if self.is_empty_verdict:
            raise AllInfeasible("cannot resample: no feasible draws")
        p = self.weights / self.weights.sum()
        return rng.choice(self.size, size=K, replace=True, p=p)


def resample(
    batch: WeightedDrawBatch, K: int, rng: np.random.Generator
) -> np.ndarray:
    """K multinomial draws of Q proportional to the importance weights."""
    idx = batch.resample_indices(K, rng)
    return batch.Q[idx]
