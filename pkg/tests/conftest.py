import numpy as np
import pytest

from svarsoft.bivariate import BivariatePhi


@pytest.fixture
def bphi() -> BivariatePhi:
    return BivariatePhi(1.0, -0.5, 1.0)


def rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def reflection(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s], [s, -c]])


def connected_margins_trig(theta, phi: BivariatePhi, omega_bar: float, branch: str):
    """Independent trig oracle for the connected-testbed margins.

    Written directly from the inequality definitions (impact signs on
    Sigma_tr Q plus the cross-multiplied elasticity bound), bypassing the
    production margin code entirely.
    """
    s11, s21, s22 = phi.sigma11, phi.sigma21, phi.sigma22
    c, s = np.cos(theta), np.sin(theta)
    if branch == "rotation":
        q1 = (c, s)
        q2 = (-s, c)
    else:
        q1 = (c, s)
        q2 = (s, -c)
    m = np.stack(
        [
            s11 * q1[0],
            -(s21 * q1[0] + s22 * q1[1]),
            s11 * q2[0],
            s21 * q2[0] + s22 * q2[1],
            omega_bar * (s11 * q2[0]) - (s21 * q2[0] + s22 * q2[1]),
        ]
    )
    return m


def disconnected_margins_trig(theta, phi: BivariatePhi, lam: float, branch: str):
    """Independent trig oracle for the disconnected testbed: price impact
    of the demand shock bounded below plus the sign normalisation."""
    s11, s21, s22 = phi.sigma11, phi.sigma21, phi.sigma22
    c, s = np.cos(theta), np.sin(theta)
    if branch == "rotation":
        q1 = (c, s)
        q2 = (-s, c)
    else:
        q1 = (c, s)
        q2 = (s, -c)
    # Sigma_tr^{-1} columns: e1 -> (1/s11, -s21/(s11 s22)), e2 -> (0, 1/s22)
    a0_11 = q1[0] / s11 - q1[1] * s21 / (s11 * s22)
    a0_22 = q2[1] / s22
    return np.stack([s11 * q2[0] - lam, a0_11, a0_22])
