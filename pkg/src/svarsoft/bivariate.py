"""Closed-form identified sets for the two bivariate testbeds.

These are the trusted oracles the sampler tests validate against. The
model is the lag-free bivariate SVAR with phi = (sigma11, sigma21,
sigma22) and sigma21 < 0; O(2) splits into rotations (det = +1) and
reflections (det = -1), each parameterised by theta in [-pi, pi].
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ReducedFormParams
from .restrictions import RestrictionSet, parse_restrictions


class EmptySet(ValueError):
    """The identified set is empty for the requested parameters."""


@dataclass(frozen=True)
class BivariatePhi:
    sigma11: float
    sigma21: float
    sigma22: float

    def __post_init__(self) -> None:
        if self.sigma11 <= 0 or self.sigma22 <= 0:
            raise ValueError("diagonal entries must be positive")
        if self.sigma21 >= 0:
            raise ValueError("sigma21 < 0 is required by the closed forms")

    def reduced_form(self) -> ReducedFormParams:
        sigma_tr = np.array([[self.sigma11, 0.0], [self.sigma21, self.sigma22]])
        return ReducedFormParams(
            n=2, p=0, has_constant=False, B=np.zeros((2, 0)), sigma_tr=sigma_tr
        )


@dataclass(frozen=True)
class ThetaIntervalSet:
    """Disjoint closed intervals within [-pi, pi], sorted."""

    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        prev_hi = -np.inf
        for lo, hi in self.intervals:
            if lo > hi:
                raise ValueError(f"interval [{lo}, {hi}] is inverted")
            if lo < prev_hi:
                raise ValueError("intervals must be sorted and disjoint")
            prev_hi = hi

    @property
    def total_measure(self) -> float:
        return float(sum(hi - lo for lo, hi in self.intervals))

    def contains(self, theta: float, tol: float = 0.0) -> bool:
        return any(lo - tol <= theta <= hi + tol for lo, hi in self.intervals)


def _arccot_negative(x: float) -> float:
    """arccot branch mapping negative arguments into (-pi/2, 0)."""
    if x >= 0:
        raise ValueError("branch only defined for negative arguments")
    return float(np.arctan(1.0 / x))


def connected_identified_set(
    phi: BivariatePhi, omega_bar: float
) -> ThetaIntervalSet:
    """Identified set under the four impact sign restrictions plus the
    supply-elasticity upper bound omega_bar >= 0.

    Degenerates to the point arctan(sigma22/sigma21) as omega_bar -> 0 and
    its upper endpoint tends to zero as omega_bar -> infinity.
    """
    if omega_bar < 0:
        raise ValueError("omega_bar must be nonnegative")
    lo = float(np.arctan(phi.sigma22 / phi.sigma21))
    arg = phi.sigma21 / phi.sigma22 - (phi.sigma11 / phi.sigma22) * omega_bar
    hi = _arccot_negative(arg)
    return ThetaIntervalSet(intervals=((lo, hi),))


def disconnected_identified_set(
    phi: BivariatePhi, lam: float
) -> ThetaIntervalSet:
    """Identified set under eta_120 >= lam plus the sign normalisation.

    Two disjoint intervals; the first (rotation branch) empties once
    lam/sigma11 exceeds sigma22 / sqrt(sigma22^2 + sigma21^2), and the
    whole set is empty for lam > sigma11.
    """
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    if lam > phi.sigma11:
        raise EmptySet(f"lam={lam} exceeds sigma11={phi.sigma11}")
    ratio = lam / phi.sigma11
    atan_lo = float(np.arctan(phi.sigma22 / phi.sigma21))

    intervals: list[tuple[float, float]] = []
    cutoff = phi.sigma22 / np.hypot(phi.sigma22, phi.sigma21)
    if ratio <= cutoff:
        intervals.append((atan_lo, float(np.arcsin(-ratio))))
    hi2 = min(np.pi - float(np.arcsin(ratio)), np.pi + atan_lo)
    intervals.append((np.pi / 2.0, hi2))
    return ThetaIntervalSet(intervals=tuple(intervals))


def theta_of(Q: np.ndarray) -> tuple[float, str]:
    """Angle and branch of a 2x2 orthonormal matrix.

    Rotations have det = +1; for both branches the first column is
    (cos theta, sin theta), so theta = atan2(Q[1,0], Q[0,0]).
    """
    branch = "rotation" if np.linalg.det(Q) > 0 else "reflection"
    return float(np.arctan2(Q[1, 0], Q[0, 0])), branch


def matrix_from_theta(theta: float, branch: str = "rotation") -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    if branch == "rotation":
        return np.array([[c, -s], [s, c]])
    return np.array([[c, s], [s, -c]])


def connected_config(omega_bar: float) -> dict:
    """Restriction config for the connected testbed (price p, quantity q).

    Impact signs make shock 1 a supply shock and shock 2 a demand shock;
    the elasticity restriction bounds the quantity/price impact ratio for
    the demand shock, whose denominator sign is pinned by the signs.
    """
    return {
        "variables": ["p", "q"],
        "shocks": ["supply", "demand"],
        "sign_normalisation": "none",
        "restrictions": [
            {"kind": "irf-sign", "variable": "p", "shock": "supply", "horizons": [0], "sign": "+"},
            {"kind": "irf-sign", "variable": "q", "shock": "supply", "horizons": [0], "sign": "-"},
            {"kind": "irf-sign", "variable": "p", "shock": "demand", "horizons": [0], "sign": "+"},
            {"kind": "irf-sign", "variable": "q", "shock": "demand", "horizons": [0], "sign": "+"},
            {
                "kind": "elasticity-bound",
                "numerator": "q",
                "denominator": "p",
                "shock": "demand",
                "bound": float(omega_bar),
                "direction": "<=",
                "denominator_sign": "+",
            },
        ],
    }


def disconnected_config(lam: float) -> dict:
    """Restriction config for the disconnected testbed: eta_120 >= lam,
    with the sign normalisation as part of the set."""
    return {
        "variables": ["p", "q"],
        "shocks": ["supply", "demand"],
        "sign_normalisation": "soft",
        "restrictions": [
            {
                "kind": "irf-sign",
                "variable": "p",
                "shock": "demand",
                "horizons": [0],
                "sign": "+",
                "bound": float(lam),
            },
        ],
    }


def connected_testbed(
    omega_bar: float, phi: BivariatePhi | None = None
) -> tuple[ReducedFormParams, RestrictionSet]:
    phi = phi or BivariatePhi(1.0, -0.5, 1.0)
    return phi.reduced_form(), parse_restrictions(connected_config(omega_bar))


def disconnected_testbed(
    lam: float, phi: BivariatePhi | None = None
) -> tuple[ReducedFormParams, RestrictionSet]:
    phi = phi or BivariatePhi(1.0, -0.5, 1.0)
    return phi.reduced_form(), parse_restrictions(disconnected_config(lam))
