"""Diffuse normal-inverse-Wishart posterior and the joint (phi, Q) loop.

The reduced-form prior is the improper density |Sigma|^{-(n+1)/2}, under
which Sigma | data is inverse-Wishart around the OLS residual scatter and
B | Sigma, data is matrix normal centred at OLS.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import stats as sps
from scipy.linalg import solve_triangular

from .linalg import RngStream, cholesky_lower
from .model import InsufficientData, ReducedFormParams, SufficientStats, compute_irf_coefficients
from .restrictions import EvalContext, RestrictionSet
from .samplers import (
    AcceptRejectConfig,
    SliceConfig,
    accept_reject_draw,
    soft_sign_sample,
)
from .soft_target import WeightedDrawBatch, resample

SAMPLERS = ("accept-reject", "soft-sign")


class PlausibilityFloor(RuntimeError):
    """phi draws almost never admit a feasible Q; restrictions look
    incompatible with the data."""


class EmptyIdentifiedSet(RuntimeError):
    """A sampler reported an empty identified set at the supplied phi."""


@dataclass(frozen=True)
class NiwPosterior:
    """Posterior blocks for (B, Sigma) under the diffuse prior."""

    B_mean: np.ndarray  # n x k, equals OLS
    xtx_inv_factor: np.ndarray  # F with F F' = (X'X)^{-1}
    scale: np.ndarray  # inverse-Wishart scale (OLS residual scatter)
    dof: int
    n: int
    p: int
    has_constant: bool
    T_used: int

    def sigma_mean(self) -> np.ndarray:
        if self.dof <= self.n + 1:
            raise InsufficientData("inverse-Wishart mean undefined")
        return self.scale / (self.dof - self.n - 1)

    def phi_mean(self) -> ReducedFormParams:
        """phi at (posterior mean of B, posterior mean of Sigma)."""
        return ReducedFormParams(
            n=self.n, p=self.p, has_constant=self.has_constant,
            B=self.B_mean, sigma_tr=cholesky_lower(self.sigma_mean()),
        )


def fit_niw(stats: SufficientStats) -> NiwPosterior:
    """Posterior under p(B, Sigma) proportional to |Sigma|^{-(n+1)/2}."""
    n, k = stats.n, stats.k
    dof = stats.T_used - k
    if dof <= n - 1:
        raise InsufficientData(
            f"posterior degrees of freedom {dof} <= n - 1 = {n - 1}"
        )
    L = cholesky_lower(stats.XtX)
    # F = L^{-T} satisfies F F' = (X'X)^{-1}
    F = solve_triangular(L, np.eye(k), lower=True, check_finite=False).T
    return NiwPosterior(
        B_mean=stats.B_ols,
        xtx_inv_factor=F,
        scale=stats.S_ols,
        dof=dof,
        n=n,
        p=stats.p,
        has_constant=stats.has_constant,
        T_used=stats.T_used,
    )


def draw_phi(post: NiwPosterior, rng: np.random.Generator) -> ReducedFormParams:
    """One draw of phi: Sigma first, then B | Sigma (fixed RNG order)."""
    sigma = sps.invwishart.rvs(df=post.dof, scale=post.scale, random_state=rng)
    sigma = np.atleast_2d(sigma)
    sigma_tr = cholesky_lower(sigma)
    k = post.xtx_inv_factor.shape[0]
    Zmat = rng.standard_normal((k, post.n))
    Bc = post.B_mean.T + post.xtx_inv_factor @ Zmat @ sigma_tr.T
    return ReducedFormParams(
        n=post.n, p=post.p, has_constant=post.has_constant,
        B=Bc.T, sigma_tr=sigma_tr,
    )


@dataclass
class JointDrawRecord:
    """Outcome of one phi attempt: verdict, efficiency and stored draws."""

    phi_index: int
    empty: bool
    attempts: int  # candidate Q draws consumed on the emptiness question
    phi: ReducedFormParams | None = None
    ess_percent: float | None = None
    Q_resampled: np.ndarray | None = None  # (K, n, n)
    Q_feasible: np.ndarray | None = None  # all feasible draws (robust layer)
    margin_evals: int = 0


def _build_context(
    rset: RestrictionSet,
    phi: ReducedFormParams,
    stats: SufficientStats | None,
    date_to_index: dict[str, int] | None,
) -> EvalContext | None:
    if not rset.has_narrative:
        return None
    if stats is None:
        raise ValueError("narrative restrictions need reduced-form data")
    # innovations recomputed from the current draw's B, not OLS residuals
    return EvalContext(
        innovations=stats.innovations_for(phi.B),
        date_to_index=date_to_index,
    )


def _attempt(
    index: int,
    post: NiwPosterior,
    rset: RestrictionSet,
    sampler: str,
    stats: SufficientStats | None,
    date_to_index: dict[str, int] | None,
    rng: RngStream,
    slice_cfg: SliceConfig,
    ar_cfg: AcceptRejectConfig,
    k_draws: int,
    keep_feasible: bool,
) -> JointDrawRecord:
    phi = draw_phi(post, rng.child(3 * index).generator())
    context = _build_context(rset, phi, stats, date_to_index)

    if sampler == "soft-sign":
        batch = soft_sign_sample(phi, rset, slice_cfg, rng.child(3 * index + 1), context)
        evals = slice_cfg.m_draws  # emptiness budget: M candidate draws
        if batch.is_empty_verdict:
            return JointDrawRecord(
                phi_index=index, empty=True, attempts=evals, phi=phi,
            )
        Qr = resample(batch, k_draws, rng.child(3 * index + 2).generator())
        return JointDrawRecord(
            phi_index=index,
            empty=False,
            attempts=evals,
            phi=phi,
            ess_percent=batch.ess_percent,
            Q_resampled=Qr,
            Q_feasible=batch.feasible_Q() if keep_feasible else None,
        )

    # accept-reject: the first draw's budget decides emptiness
    gen = rng.child(3 * index + 1).generator()
    Q0, attempts = accept_reject_draw(phi, rset, ar_cfg, gen, context)
    if Q0 is None:
        return JointDrawRecord(
            phi_index=index, empty=True, attempts=attempts, phi=phi,
        )
    draws = [Q0]
    total_attempts = attempts
    budget = ar_cfg.max_attempts * k_draws
    while len(draws) < k_draws and total_attempts < budget:
        remaining = AcceptRejectConfig(
            max_attempts=budget - total_attempts,
            mechanical_normalisation=ar_cfg.mechanical_normalisation,
        )
        Qi, att = accept_reject_draw(phi, rset, remaining, gen, context)
        total_attempts += att
        if Qi is None:
            break
        draws.append(Qi)
    Q = np.array(draws)
    return JointDrawRecord(
        phi_index=index,
        empty=False,
        attempts=total_attempts,
        phi=phi,
        ess_percent=100.0,
        Q_resampled=Q,
        Q_feasible=Q if keep_feasible else None,
    )


def run_joint_sampler(
    post: NiwPosterior,
    rset: RestrictionSet,
    sampler: str,
    n_phi_kept: int,
    rng: RngStream,
    stats: SufficientStats | None = None,
    date_to_index: dict[str, int] | None = None,
    slice_cfg: SliceConfig | None = None,
    ar_cfg: AcceptRejectConfig | None = None,
    k_draws: int | None = None,
    keep_feasible: bool = False,
    max_phi_attempts: int = 100_000,
    plausibility_floor: float = 1e-4,
    threads: int = 1,
) -> list[JointDrawRecord]:
    """Draw phi until n_phi_kept of them have nonempty identified sets.

    Discards (empty verdicts) stay in the record list; the list is
    truncated right after the n-th success so results are identical for
    any worker count. Raises :class:`PlausibilityFloor` when successes
    are so rare the restrictions look incompatible with the data.
    """
    if sampler not in SAMPLERS:
        raise ValueError(f"sampler must be one of {SAMPLERS}")
    slice_cfg = slice_cfg or SliceConfig()
    ar_cfg = ar_cfg or AcceptRejectConfig()
    if k_draws is None:
        k_draws = slice_cfg.m_draws

    records: list[JointDrawRecord] = []
    kept = 0
    next_index = 0
    batch_size = 16  # fixed so results do not depend on worker count

    def make_args(i: int) -> tuple:
        return (
            i, post, rset, sampler, stats, date_to_index, rng,
            slice_cfg, ar_cfg, k_draws, keep_feasible,
        )

    pool = None
    if threads > 1:
        import concurrent.futures as cf

        pool = cf.ProcessPoolExecutor(max_workers=threads)
    try:
        while kept < n_phi_kept:
            if next_index >= max_phi_attempts:
                if kept / next_index < plausibility_floor:
                    raise PlausibilityFloor(
                        f"{kept} nonempty sets in {next_index} phi attempts; "
                        "the identifying restrictions appear incompatible "
                        "with the data and likely need to be relaxed"
                    )
                # budget exhausted but sets are not vanishingly rare:
                # return the partial run for plausibility accounting
                break
            indices = range(next_index, next_index + batch_size)
            if pool is not None:
                batch = list(pool.map(_attempt_star, map(make_args, indices)))
            else:
                batch = [_attempt(*make_args(i)) for i in indices]
            next_index += batch_size
            for rec in batch:
                records.append(rec)
                if not rec.empty:
                    kept += 1
                    if kept == n_phi_kept:
                        return records
    finally:
        if pool is not None:
            pool.shutdown()
    return records


def _attempt_star(args: tuple) -> JointDrawRecord:
    return _attempt(*args)


def posterior_plausibility(records: list[JointDrawRecord]) -> float:
    """Percentage of phi attempts whose identified set was nonempty."""
    if not records:
        raise ValueError("no phi attempts recorded")
    nonempty = sum(1 for r in records if not r.empty)
    return 100.0 * nonempty / len(records)


def conditional_posterior_check(
    phi: ReducedFormParams,
    rset: RestrictionSet,
    rng: RngStream,
    m_draws: int = 10_000,
    slice_cfg: SliceConfig | None = None,
    ar_cfg: AcceptRejectConfig | None = None,
    context: EvalContext | None = None,
) -> dict:
    """Compare the two samplers' conditional posteriors at a fixed phi.

    Returns per-(variable, shock) impact-response draws from both
    samplers and their two-sample KS statistics.
    """
    from scipy.stats import ks_2samp

    slice_cfg = replace(slice_cfg or SliceConfig(), m_draws=m_draws)
    ar_cfg = ar_cfg or AcceptRejectConfig()

    batch = soft_sign_sample(phi, rset, slice_cfg, rng.child(1), context)
    if batch.is_empty_verdict:
        raise EmptyIdentifiedSet("soft-sign sampler found no feasible draw")
    Q_soft = resample(batch, m_draws, rng.child(2).generator())

    gen = rng.child(3).generator()
    ar_draws = []
    for _ in range(m_draws):
        Qi, _ = accept_reject_draw(phi, rset, ar_cfg, gen, context)
        if Qi is None:
            raise EmptyIdentifiedSet(
                "accept-reject budget exhausted at the supplied phi"
            )
        ar_draws.append(Qi)
    Q_ar = np.array(ar_draws)

    n = phi.n
    irf = compute_irf_coefficients(phi, 0)
    impact_soft = np.einsum("ik,fkj->fij", irf.coeffs[0], Q_soft)
    impact_ar = np.einsum("ik,fkj->fij", irf.coeffs[0], Q_ar)
    tests = {}
    for i in range(n):
        for j in range(n):
            res = ks_2samp(impact_soft[:, i, j], impact_ar[:, i, j])
            tests[(i, j)] = {
                "ks_stat": float(res.statistic),
                "ks_pvalue": float(res.pvalue),
            }
    return {
        "impact_soft": impact_soft,
        "impact_ar": impact_ar,
        "tests": tests,
        "ess_percent": batch.ess_percent,
    }
