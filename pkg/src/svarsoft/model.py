"""Reduced-form and structural SVAR quantities.

Conventions: y_t is n x 1, the VAR has p lags and an optional constant,
and the reduced-form coefficient matrix B stacks (B_1, ..., B_p, c) with
the constant last so the lag blocks stay contiguous.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular


class InsufficientData(ValueError):
    """Not enough usable observations for estimation."""


class OutOfSample(IndexError):
    """A requested time index falls outside the innovation series."""


@dataclass(frozen=True)
class ReducedFormParams:
    """phi = (vec(B)', vech(Sigma_tr)')' with dimension metadata."""

    n: int
    p: int
    has_constant: bool
    B: np.ndarray  # n x (n*p + has_constant); empty columns allowed when p=0
    sigma_tr: np.ndarray  # n x n lower-triangular Cholesky factor

    def __post_init__(self) -> None:
        k = self.n * self.p + int(self.has_constant)
        if self.B.shape != (self.n, k):
            raise ValueError(
                f"B must be {self.n}x{k}, got {self.B.shape}"
            )
        if self.sigma_tr.shape != (self.n, self.n):
            raise ValueError("sigma_tr must be n x n")
        if np.any(np.diag(self.sigma_tr) <= 0):
            raise ValueError("diag(sigma_tr) must be positive")

    def lag_block(self, l: int) -> np.ndarray:
        """B_l for l = 1..p."""
        return self.B[:, (l - 1) * self.n : l * self.n]

    @property
    def constant(self) -> np.ndarray:
        if not self.has_constant:
            return np.zeros(self.n)
        return self.B[:, -1]

    def sigma_tr_inv(self) -> np.ndarray:
        """Inverse of the Cholesky factor via triangular solve."""
        return solve_triangular(
            self.sigma_tr, np.eye(self.n), lower=True, check_finite=False
        )


@dataclass(frozen=True)
class IrfCoefficients:
    """Rows of C_h Sigma_tr for h = 0..H, cached as coeffs[h, i, :] = c_ih."""

    horizons: int
    coeffs: np.ndarray  # (H+1, n, n); coeffs[h] = C_h @ Sigma_tr

    @property
    def n(self) -> int:
        return self.coeffs.shape[1]

    def c(self, i: int, h: int) -> np.ndarray:
        return self.coeffs[h, i, :]


@dataclass(frozen=True)
class InnovationSeries:
    """u_t = y_t - B x_t for the usable sample (length T - p)."""

    u: np.ndarray  # (T - p, n)

    def __len__(self) -> int:
        return self.u.shape[0]


def compute_irf_coefficients(phi: ReducedFormParams, H: int) -> IrfCoefficients:
    """C_0 = I; C_h = sum_{l=1}^{min(h,p)} B_l C_{h-l}; rows of C_h Sigma_tr."""
    if H < 0:
        raise ValueError("horizon must be nonnegative")
    n, p = phi.n, phi.p
    C = np.zeros((H + 1, n, n))
    C[0] = np.eye(n)
    for h in range(1, H + 1):
        acc = np.zeros((n, n))
        for l in range(1, min(h, p) + 1):
            acc += phi.lag_block(l) @ C[h - l]
        C[h] = acc
    return IrfCoefficients(horizons=H, coeffs=C @ phi.sigma_tr)


def impulse_response(
    irf: IrfCoefficients,
    Q: np.ndarray,
    i: int,
    j: int,
    h: int,
    cumulative: bool = False,
) -> float:
    """Horizon-h response of variable i to shock j: c_ih ' q_j.

    With ``cumulative`` the responses are summed over horizons 0..h,
    which is what long-run cumulative restrictions need.
    """
    if cumulative:
        return float(irf.coeffs[: h + 1, i, :].sum(axis=0) @ Q[:, j])
    return float(irf.coeffs[h, i, :] @ Q[:, j])


def impulse_response_matrix(irf: IrfCoefficients, Q: np.ndarray) -> np.ndarray:
    """All responses at once: out[h, i, j] = c_ih ' q_j."""
    return irf.coeffs @ Q


def structural_coefficient(
    phi: ReducedFormParams, Q: np.ndarray, j: int, i: int
) -> float:
    """Entry (j, i) of A_0 = Q' Sigma_tr^{-1}, via triangular solve."""
    e_i = np.zeros(phi.n)
    e_i[i] = 1.0
    v = solve_triangular(phi.sigma_tr, e_i, lower=True, check_finite=False)
    return float(v @ Q[:, j])


def structural_shock(
    phi: ReducedFormParams, Q: np.ndarray, u_t: np.ndarray
) -> np.ndarray:
    """eps_t = Q' Sigma_tr^{-1} u_t."""
    v = solve_triangular(phi.sigma_tr, u_t, lower=True, check_finite=False)
    return Q.T @ v


def historical_decomposition(
    phi: ReducedFormParams,
    Q: np.ndarray,
    irf: IrfCoefficients,
    innovations: InnovationSeries,
    i: int,
    j: int,
    k: int,
    h: int,
) -> float:
    """Contribution of shock j to the unexpected change in variable i
    between periods k and k+h:

        H_{i,j,k,k+h} = sum_{l=0}^{h} (c_il ' q_j)(q_j ' Sigma_tr^{-1} u_{k+h-l})
    """
    if k < 0 or k + h >= len(innovations):
        raise OutOfSample(
            f"episode [{k}, {k + h}] outside innovation series of length "
            f"{len(innovations)}"
        )
    if h > irf.horizons:
        raise ValueError("IRF coefficients not computed to requested span")
    q_j = Q[:, j]
    total = 0.0
    for l in range(h + 1):
        v = solve_triangular(
            phi.sigma_tr, innovations.u[k + h - l], lower=True, check_finite=False
        )
        total += float(irf.coeffs[l, i, :] @ q_j) * float(q_j @ v)
    return total


@dataclass(frozen=True)
class SufficientStats:
    """OLS sufficient statistics retained for the reduced-form posterior."""

    Y: np.ndarray  # (T_used, n) left-hand-side observations
    X: np.ndarray  # (T_used, k) regressors, constant last
    XtX: np.ndarray
    B_ols: np.ndarray  # n x k
    S_ols: np.ndarray  # n x n residual cross-product
    T_used: int
    n: int
    p: int
    has_constant: bool

    @property
    def k(self) -> int:
        return self.X.shape[1]

    def innovations_for(self, B: np.ndarray) -> InnovationSeries:
        """Recompute u_t = y_t - B x_t for a given coefficient draw."""
        return InnovationSeries(u=self.Y - self.X @ B.T)


def build_regressors(
    Y: np.ndarray, p: int, has_constant: bool
) -> tuple[np.ndarray, np.ndarray]:
    """Stack lagged regressors x_t = (y_{t-1}', ..., y_{t-p}', 1)'."""
    Y = np.asarray(Y, dtype=float)
    T, n = Y.shape
    T_used = T - p
    k = n * p + int(has_constant)
    X = np.empty((T_used, k))
    for l in range(1, p + 1):
        X[:, (l - 1) * n : l * n] = Y[p - l : T - l, :]
    if has_constant:
        X[:, -1] = 1.0
    return Y[p:, :], X


def estimate_reduced_form(
    Y: np.ndarray, p: int, has_constant: bool = True
) -> tuple[ReducedFormParams, SufficientStats]:
    """OLS fit of the VAR(p); returns point estimates and sufficient stats.

    The OLS Sigma uses the degrees-of-freedom-corrected residual covariance.
    """
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 2:
        raise InsufficientData("data matrix must be T x n")
    T, n = Y.shape
    k = n * p + int(has_constant)
    if T - p <= k or T - p <= n + 1 or T <= n * p + n + 1:
        raise InsufficientData(
            f"need more than {max(k + p, n * p + n + 1)} observations, got {T}"
        )
    Yl, X = build_regressors(Y, p, has_constant)
    T_used = Yl.shape[0]
    XtX = X.T @ X
    B_ols = np.linalg.solve(XtX, X.T @ Yl).T  # n x k
    resid = Yl - X @ B_ols.T
    S_ols = resid.T @ resid
    dof = T_used - k
    if dof <= n - 1:
        raise InsufficientData("residual degrees of freedom too small")
    sigma = S_ols / dof
    from .linalg import cholesky_lower

    phi = ReducedFormParams(
        n=n, p=p, has_constant=has_constant, B=B_ols, sigma_tr=cholesky_lower(sigma)
    )
    stats = SufficientStats(
        Y=Yl,
        X=X,
        XtX=XtX,
        B_ols=B_ols,
        S_ols=S_ols,
        T_used=T_used,
        n=n,
        p=p,
        has_constant=has_constant,
    )
    return phi, stats
