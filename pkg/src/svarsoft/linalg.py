"""Deterministic linear-algebra and random-matrix primitives.

Everything here is pure given an :class:`RngStream`; callers running
concurrent chains must use distinct stream ids.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Internal tolerances guarding invariants (not user-configurable).
ORTHONORMALITY_TOL = 1e-10
RANK_TOL = 1e-12

# Odd 64-bit multiplier (splitmix64) used to derive child stream ids.
_STREAM_MIX = 0x9E3779B97F4A7C15


class RankDeficient(ValueError):
    """QR input is numerically rank deficient; redraw the matrix."""


class NotPositiveDefinite(ValueError):
    """Cholesky input is not symmetric positive definite."""


@dataclass(frozen=True)
class RngStream:
    """Counter-based random stream addressed by (seed, stream_id).

    Identical (seed, stream_id) pairs produce bit-identical sequences;
    distinct stream ids give statistically independent streams (Philox
    keys differing in any bit are independent).
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array(
            [self.seed % (1 << 64), self.stream_id % (1 << 64)], dtype=np.uint64
        )
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, tag: int) -> "RngStream":
        """Derive an independent stream; distinct tags give distinct ids."""
        mixed = (self.stream_id * _STREAM_MIX + tag + 1) % (1 << 64)
        return RngStream(self.seed, mixed)


def draw_standard_matrix_normal(
    n: int, rng: np.random.Generator, size: int | None = None
) -> np.ndarray:
    """Draw an n x n matrix of i.i.d. standard normals (row-major fill).

    With ``size`` given, returns a (size, n, n) stack drawn in index order.
    """
    if size is None:
        return rng.standard_normal((n, n))
    return rng.standard_normal((size, n, n))


def qr_positive_diag(Z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """QR decomposition with diag(R) >= 0; the map Z -> Q used throughout.

    Accepts a single matrix or a stacked (..., n, n) array. Raises
    :class:`RankDeficient` if any diagonal of R falls below ``RANK_TOL``.
    """
    Q, R = np.linalg.qr(Z)
    d = np.sign(np.diagonal(R, axis1=-2, axis2=-1)).copy()
    d[d == 0] = 1.0
    Q = Q * d[..., np.newaxis, :]
    R = R * d[..., :, np.newaxis]
    if np.any(np.diagonal(R, axis1=-2, axis2=-1) < RANK_TOL):
        raise RankDeficient("matrix numerically rank deficient in QR")
    return Q, R


def haar_orthonormal(
    n: int, rng: np.random.Generator, size: int | None = None
) -> np.ndarray:
    """Haar-uniform draw(s) from O(n) via normal draws and sign-fixed QR."""
    Z = draw_standard_matrix_normal(n, rng, size=size)
    Q, _ = qr_positive_diag(Z)
    return Q


def q_of(Z: np.ndarray) -> np.ndarray:
    """The orthogonal factor of the positive-diagonal QR of Z.

    Same map as ``qr_positive_diag(Z)[0]``; n = 2 and n = 3 take exact
    closed forms (orthonormal completion with the diag(R) >= 0 sign
    convention) because samplers evaluate this millions of times.
    """
    n = Z.shape[-1]
    if Z.ndim != 2:
        return qr_positive_diag(Z)[0]
    if n == 2:
        a, c = Z[0, 0], Z[1, 0]
        r11 = np.hypot(a, c)
        if r11 < RANK_TOL:
            raise RankDeficient("first column numerically zero")
        q11 = a / r11
        q21 = c / r11
        r22 = -q21 * Z[0, 1] + q11 * Z[1, 1]
        if abs(r22) < RANK_TOL:
            raise RankDeficient("columns numerically collinear")
        s = 1.0 if r22 >= 0 else -1.0
        return np.array([[q11, -s * q21], [q21, s * q11]])
    if n == 3:
        z1 = Z[:, 0]
        r11 = np.sqrt(z1 @ z1)
        if r11 < RANK_TOL:
            raise RankDeficient("first column numerically zero")
        q1 = z1 / r11
        y2 = Z[:, 1] - (q1 @ Z[:, 1]) * q1
        y2 -= (q1 @ y2) * q1  # re-orthogonalise to restore 1e-10 orthogonality
        r22 = np.sqrt(y2 @ y2)
        if r22 < RANK_TOL:
            raise RankDeficient("columns numerically collinear")
        q2 = y2 / r22
        q3 = np.cross(q1, q2)
        if q3 @ Z[:, 2] < 0:
            q3 = -q3
        if abs(q3 @ Z[:, 2]) < RANK_TOL:
            raise RankDeficient("matrix numerically rank deficient")
        return np.column_stack((q1, q2, q3))
    return qr_positive_diag(Z)[0]


def cholesky_lower(S: np.ndarray) -> np.ndarray:
    """Lower-triangular L with LL' = S and diag(L) > 0."""
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise NotPositiveDefinite(f"expected square matrix, got shape {S.shape}")
    if not np.allclose(S, S.T, rtol=0.0, atol=1e-8 * max(1.0, np.abs(S).max())):
        raise NotPositiveDefinite("matrix is not symmetric")
    try:
        return np.linalg.cholesky(S)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("matrix is not positive definite") from exc
