"""Prior-robust Bayesian summaries from per-phi identified-set bounds."""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .model import ReducedFormParams, compute_irf_coefficients
from .posterior import JointDrawRecord


@dataclass(frozen=True)
class BoundsRecord:
    """Identified-set bounds per (variable, shock, horizon) at one phi.

    Bounds are approximated as extrema of the impulse response over the
    stored feasible Q draws, so lower <= upper and both are attained.
    """

    lower: np.ndarray  # (H+1, n, n)
    upper: np.ndarray  # (H+1, n, n)
    n_draws: int


def irf_bounds(
    phi: ReducedFormParams, Qs: np.ndarray, horizons: int, cumulative: bool = False
) -> BoundsRecord:
    """Min/max impulse responses over a stack of feasible Q draws."""
    if Qs.ndim != 3 or Qs.shape[0] == 0:
        raise ValueError("need a nonempty (F, n, n) stack of draws")
    irf = compute_irf_coefficients(phi, horizons)
    coeffs = irf.coeffs
    if cumulative:
        coeffs = np.cumsum(coeffs, axis=0)
    resp = np.einsum("hik,fkj->fhij", coeffs, Qs)
    return BoundsRecord(
        lower=resp.min(axis=0), upper=resp.max(axis=0), n_draws=Qs.shape[0]
    )


def identified_set_bounds(
    record: JointDrawRecord, horizons: int, cumulative: bool = False
) -> BoundsRecord:
    """Bounds for one kept phi draw, preferring the full feasible set.

    Resampling is unnecessary here: the bounds depend only on extrema over
    the identified set, so every feasible (nonzero-weight) draw is used.
    """
    if record.empty or record.phi is None:
        raise ValueError("cannot bound an empty identified set")
    Qs = record.Q_feasible if record.Q_feasible is not None else record.Q_resampled
    return irf_bounds(record.phi, Qs, horizons, cumulative=cumulative)


def set_of_posterior_medians(
    lowers: np.ndarray, uppers: np.ndarray
) -> tuple[float, float]:
    """[median of identified-set lower bounds, median of upper bounds]."""
    lowers = np.asarray(lowers, dtype=float)
    uppers = np.asarray(uppers, dtype=float)
    if lowers.size == 0:
        raise ValueError("need at least one phi draw")
    return float(np.median(lowers)), float(np.median(uppers))


def robust_credible_interval(
    lowers: np.ndarray, uppers: np.ndarray, alpha: float
) -> tuple[float, float]:
    """Shortest [a, b] containing at least a fraction alpha of the
    per-phi intervals [lower, upper]; leftmost interval on width ties.

    The optimum has a among the lowers and b among the uppers, so a scan
    over lowers in descending order with a capped max-heap of uppers
    finds it in O(N log N).
    """
    lowers = np.asarray(lowers, dtype=float)
    uppers = np.asarray(uppers, dtype=float)
    N = lowers.size
    if N < 2:
        raise ValueError("need at least two phi draws")
    if not (0.0 < alpha <= 1.0):
        raise ValueError("alpha must lie in (0, 1]")
    m = math.ceil(alpha * N)

    order = np.argsort(-lowers, kind="stable")
    heap: list[float] = []  # max-heap via negation, capped at size m
    best: tuple[float, float, float] | None = None  # (width, a, b)
    for idx in order:
        a = float(lowers[idx])
        u = float(uppers[idx])
        if len(heap) < m:
            heapq.heappush(heap, -u)
        elif u < -heap[0]:
            heapq.heapreplace(heap, -u)
        if len(heap) == m:
            b = -heap[0]
            if b >= a:
                width = b - a
                if (
                    best is None
                    or width < best[0]
                    or (width == best[0] and a < best[1])
                ):
                    best = (width, a, b)
    if best is None:
        raise ValueError("no candidate interval found")
    return best[1], best[2]


def prior_informativeness(
    standard_interval: tuple[float, float],
    robust_interval: tuple[float, float],
) -> float:
    """1 - width(credible) / width(robust credible), defined as 0 when
    the robust interval is degenerate (point identification)."""
    w_std = standard_interval[1] - standard_interval[0]
    w_rob = robust_interval[1] - robust_interval[0]
    if w_rob <= 0.0:
        return 0.0
    return float(min(1.0, max(0.0, 1.0 - w_std / w_rob)))


def required_draws(d: int, epsilon: float, delta: float) -> int:
    """Draws from inside the identified set needed for misclassification
    error below epsilon with probability at least 1 - delta:

        min{2d ln(2d/delta), e (2d + ln(1/delta))} / epsilon

    rounded to the nearest integer.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    if not (0 < epsilon < 1 and 0 < delta < 1):
        raise ValueError("epsilon and delta must lie in (0, 1)")
    value = (
        min(2 * d * math.log(2 * d / delta), math.e * (2 * d + math.log(1 / delta)))
        / epsilon
    )
    return int(value + 0.5)


def iso_draw_epsilon(d: int, m_draws: int, delta: float) -> float:
    """Accuracy epsilon guaranteed by m_draws at confidence 1 - delta."""
    return (
        min(2 * d * math.log(2 * d / delta), math.e * (2 * d + math.log(1 / delta)))
        / m_draws
    )


def iso_draw_curve(
    d: int, m_draws: int, deltas: np.ndarray
) -> np.ndarray:
    """(delta, epsilon) pairs supported by a fixed draw count."""
    return np.array([iso_draw_epsilon(d, m_draws, float(x)) for x in deltas])


def ess_grossed_up_draws(target_draws: int, mean_ess_percent: float) -> int:
    """Draws from the smoothed target needed for a target count of
    effective draws, grossing up by the average ESS."""
    if mean_ess_percent <= 0:
        raise ValueError("mean ESS must be positive")
    return math.ceil(target_draws / (mean_ess_percent / 100.0))


@dataclass(frozen=True)
class RobustSummary:
    """Per-(variable, shock, horizon) robust and standard summaries."""

    alpha: float
    is_lower: np.ndarray  # (H+1, n, n) pooled identified-set envelope
    is_upper: np.ndarray
    med_set_lo: np.ndarray
    med_set_hi: np.ndarray
    rci_lo: np.ndarray
    rci_hi: np.ndarray
    std_median: np.ndarray
    std_lo: np.ndarray
    std_hi: np.ndarray
    informativeness: np.ndarray

    @property
    def horizons(self) -> int:
        return self.is_lower.shape[0] - 1

    @property
    def n(self) -> int:
        return self.is_lower.shape[1]

    def informativeness_by_pair(self) -> np.ndarray:
        """Prior informativeness averaged over horizons, (n, n)."""
        return self.informativeness.mean(axis=0)


def summarize_robust(
    records: list[JointDrawRecord],
    horizons: int,
    alpha: float = 0.68,
    cumulative: bool = False,
) -> RobustSummary:
    """Reduce per-phi bounds and pooled standard draws to the summary table."""
    kept = [r for r in records if not r.empty]
    if len(kept) < 2:
        raise ValueError("need at least two nonempty phi draws")
    bounds = [identified_set_bounds(r, horizons, cumulative) for r in kept]
    lowers = np.stack([b.lower for b in bounds])  # (R, H+1, n, n)
    uppers = np.stack([b.upper for b in bounds])

    # pooled standard-posterior draws across (phi, Q)
    resp = []
    for r in kept:
        irf = compute_irf_coefficients(r.phi, horizons)
        coeffs = np.cumsum(irf.coeffs, axis=0) if cumulative else irf.coeffs
        resp.append(np.einsum("hik,fkj->fhij", coeffs, r.Q_resampled))
    pooled = np.concatenate(resp, axis=0)  # (R*K, H+1, n, n)
    lo_q, hi_q = (1.0 - alpha) / 2.0, 1.0 - (1.0 - alpha) / 2.0
    std_median = np.median(pooled, axis=0)
    std_lo = np.quantile(pooled, lo_q, axis=0)
    std_hi = np.quantile(pooled, hi_q, axis=0)

    H1, n = lowers.shape[1], lowers.shape[2]
    med_lo = np.median(lowers, axis=0)
    med_hi = np.median(uppers, axis=0)
    rci_lo = np.empty((H1, n, n))
    rci_hi = np.empty((H1, n, n))
    info = np.empty((H1, n, n))
    for h in range(H1):
        for i in range(n):
            for j in range(n):
                a, b = robust_credible_interval(
                    lowers[:, h, i, j], uppers[:, h, i, j], alpha
                )
                rci_lo[h, i, j] = a
                rci_hi[h, i, j] = b
                info[h, i, j] = prior_informativeness(
                    (std_lo[h, i, j], std_hi[h, i, j]), (a, b)
                )
    return RobustSummary(
        alpha=alpha,
        is_lower=lowers.min(axis=0),
        is_upper=uppers.max(axis=0),
        med_set_lo=med_lo,
        med_set_hi=med_hi,
        rci_lo=rci_lo,
        rci_hi=rci_hi,
        std_median=std_median,
        std_lo=std_lo,
        std_hi=std_hi,
        informativeness=info,
    )
