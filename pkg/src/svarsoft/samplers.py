"""The two Q-samplers: accept-reject and soft-sign slice sampling.

Both samplers price a candidate through the same compiled margin
evaluator, so "effort" is comparable across them at the level of one
margin evaluation per candidate.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .linalg import RankDeficient, RngStream, q_of
from .model import ReducedFormParams
from .restrictions import EvalContext, MarginEvaluator, RestrictionSet
from .soft_target import (
    SoftTargetParams,
    TargetEval,
    WeightedDrawBatch,
    log_f_delta,
    log_importance_weight,
)


class ShrinkBudgetExceeded(RuntimeError):
    """Shrinkage failed to find an admissible point; diagnostic only."""


@dataclass(frozen=True)
class SliceConfig:
    """Tuning for the soft-sign slice sampler.

    The proposal box side is contaminated: width_small with probability
    width_mix, width_large otherwise. init_delta of None applies the
    default policy max(0.1, 1000 * delta).
    """

    m_draws: int = 1000
    delta: float = 1e-5
    width_small: float = 2.0
    width_large: float = 6.0
    width_mix: float = 0.95
    init_delta: float | None = None
    max_shrink_iterations: int = 1000
    burn_in: int = 0
    thin: int = 1

    def __post_init__(self) -> None:
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if not (0.0 < self.width_mix <= 1.0):
            raise ValueError("width_mix must lie in (0, 1]")
        if self.width_small <= 0 or self.width_large <= 0:
            raise ValueError("widths must be positive")
        if self.init_delta is not None and self.init_delta < self.delta:
            raise ValueError("init_delta must be >= delta")
        if self.thin < 1 or self.burn_in < 0:
            raise ValueError("bad burn_in/thin")

    @property
    def resolved_init_delta(self) -> float:
        if self.init_delta is not None:
            return self.init_delta
        return max(0.1, 1000.0 * self.delta)


@dataclass(frozen=True)
class AcceptRejectConfig:
    """max_attempts doubles as the emptiness budget per requested draw."""

    max_attempts: int = 1000
    mechanical_normalisation: bool = True

    def __post_init__(self) -> None:
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")


def _slice_margin_mode(rset: RestrictionSet) -> str:
    # the slice target always carries the normalisation as soft margins
    # whenever the set declares one
    return "none" if rset.normalisation == "none" else "soft"


def accept_reject_draw(
    phi: ReducedFormParams,
    rset: RestrictionSet,
    cfg: AcceptRejectConfig,
    rng: np.random.Generator,
    context: EvalContext | None = None,
    evaluator: MarginEvaluator | None = None,
) -> tuple[np.ndarray | None, int]:
    """Draw Q Haar-uniform over the identified set, or report emptiness.

    Returns (Q, attempts) on success and (None, max_attempts) when the
    budget is exhausted, which callers treat as an empty-set verdict.
    """
    n = phi.n
    mechanical = (
        rset.normalisation != "none" and cfg.mechanical_normalisation
    )
    if evaluator is None:
        mode = "mechanical" if mechanical else _slice_margin_mode(rset)
        evaluator = MarginEvaluator(rset, phi, context, mode=mode)
    sigma_inv = phi.sigma_tr_inv() if mechanical else None

    for attempt in range(1, cfg.max_attempts + 1):
        Z = rng.standard_normal((n, n))
        try:
            Q = q_of(Z)
        except RankDeficient:
            continue
        if mechanical:
            d = np.sign(np.einsum("ij,ij->j", Q, sigma_inv))
            d[d == 0] = 1.0
            Q = Q * d
        if evaluator(Q).min() >= 0.0:
            return Q, attempt
    return None, cfg.max_attempts


def initialise_chain(
    target: SoftTargetParams,
    cfg: SliceConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """Start the chain at a (possibly local) maximum of log f at init_delta.

    Runs a derivative-free simplex search from a standard matrix-normal
    draw; any finite point is a valid chain start since f is everywhere
    positive, so the incumbent is returned as-is on budget exhaustion.
    """
    n = target.evaluator.phi.n
    init_target = SoftTargetParams(
        evaluator=target.evaluator, delta=cfg.resolved_init_delta
    )

    def objective(z: np.ndarray) -> float:
        try:
            return -log_f_delta(z, init_target).log_f
        except RankDeficient:
            return np.inf

    z0 = rng.standard_normal(n * n)
    # stop on simplex diameter < 1e-4 or 200 n^2 evaluations
    res = minimize(
        objective,
        z0,
        method="Nelder-Mead",
        options={
            "xatol": 1e-4,
            "fatol": np.inf,
            "maxfev": 200 * n * n,
            "maxiter": 200 * n * n,
        },
    )
    return np.asarray(res.x, dtype=float)


def slice_step(
    prev: TargetEval | np.ndarray,
    target: SoftTargetParams,
    cfg: SliceConfig,
    rng: np.random.Generator,
) -> TargetEval:
    """One hyperrectangle slice update of the whole n^2 coordinate block.

    Level set in log space (log y = log f - Exp(1)), one contaminated
    width per step, uniform proposal in the box, per-coordinate shrink
    toward the current point on rejection. The box always contains the
    current point, so termination is a.s. guaranteed; the iteration cap
    is a defensive diagnostic.
    """
    if not isinstance(prev, TargetEval):
        prev = log_f_delta(np.asarray(prev, dtype=float), target)
    z = prev.z
    d = z.shape[0]

    log_y = prev.log_f - rng.exponential(1.0)
    w = cfg.width_small if rng.uniform() < cfg.width_mix else cfg.width_large
    U = rng.uniform(size=d)
    L = z - w * U
    R = L + w

    for _ in range(cfg.max_shrink_iterations):
        u = rng.uniform(size=d)
        z_new = L + u * (R - L)
        try:
            cand = log_f_delta(z_new, target)
        except RankDeficient:
            cand = None
        if cand is not None and cand.log_f > log_y:
            return cand
        lower = z_new < z
        upper = z_new > z
        L = np.where(lower, z_new, L)
        R = np.where(upper, z_new, R)
    raise ShrinkBudgetExceeded(
        f"no admissible point after {cfg.max_shrink_iterations} shrink steps"
    )


def soft_sign_sample(
    phi: ReducedFormParams,
    rset: RestrictionSet,
    cfg: SliceConfig,
    rng_stream: RngStream,
    context: EvalContext | None = None,
) -> WeightedDrawBatch:
    """Run one soft-sign chain and weight its draws against the hard set.

    An all-zero weight vector is the empty-set verdict, reported through
    the batch rather than an exception.
    """
    rng = rng_stream.generator()
    evaluator = MarginEvaluator(
        rset, phi, context, mode=_slice_margin_mode(rset)
    )
    target = SoftTargetParams(evaluator=evaluator, delta=cfg.delta)
    n = phi.n
    M = cfg.m_draws

    z0 = initialise_chain(target, cfg, rng)
    state = log_f_delta(z0, target)

    for _ in range(cfg.burn_in):
        state = slice_step(state, target, cfg, rng)

    Z = np.empty((M, n * n))
    Q = np.empty((M, n, n))
    margins = np.empty((M, evaluator.s))
    weights = np.empty(M)
    delta = cfg.delta
    for m in range(M):
        for _ in range(cfg.thin):
            state = slice_step(state, target, cfg, rng)
        Z[m] = state.z
        Q[m] = state.Q
        margins[m] = state.margins
        lw = log_importance_weight(state.margins, delta)
        weights[m] = np.exp(lw) if np.isfinite(lw) else 0.0

    return WeightedDrawBatch(
        Z=Z, Q=Q, margins=margins, weights=weights,
        margin_evals=evaluator.n_evals,
    )


def efficiency_report(
    *,
    sampler: str,
    wall_time: float,
    accepted: int | None = None,
    attempts: int | None = None,
    ess_percent: float | None = None,
    m_draws: int | None = None,
) -> dict:
    """Effective-draw accounting for a completed run.

    Accept-reject effective draws are the accepted count; soft-sign
    effective draws are ESS% x M / 100. Rates use wall time, which is
    excluded from determinism guarantees.
    """
    report: dict = {"sampler": sampler, "wall_time_seconds": wall_time}
    if sampler == "accept-reject":
        report["accepted"] = accepted
        report["attempts"] = attempts
        report["acceptance_rate"] = (
            accepted / attempts if attempts else 0.0
        )
        effective = float(accepted or 0)
    else:
        report["ess_percent"] = ess_percent
        report["m_draws"] = m_draws
        effective = (ess_percent or 0.0) * (m_draws or 0) / 100.0
    report["effective_draws"] = effective
    report["effective_draws_per_second"] = (
        effective / wall_time if wall_time > 0 else float("inf")
    )
    return report
