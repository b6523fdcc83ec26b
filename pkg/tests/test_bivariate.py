import numpy as np
import pytest

from conftest import connected_margins_trig, disconnected_margins_trig, reflection, rotation
from svarsoft.bivariate import (
    BivariatePhi,
    EmptySet,
    ThetaIntervalSet,
    connected_identified_set,
    disconnected_identified_set,
    matrix_from_theta,
    theta_of,
)
from svarsoft.linalg import RngStream


def grid_endpoints(feasible_fn, coarse=1e-3, fine=1e-6):
    """Brute-force interval endpoints of {theta: feasible_fn(theta)} by a
    coarse scan refined to `fine` resolution around each sign change."""
    grid = np.arange(-np.pi, np.pi, coarse)
    feas = feasible_fn(grid)
    edges = np.flatnonzero(np.diff(feas.astype(int)))
    intervals = []
    starts = []
    if feas[0]:
        starts.append(grid[0])
    for e in edges:
        lo, hi = grid[e], grid[e + 1]
        refined = np.arange(lo, hi + fine, fine)
        rfeas = feasible_fn(refined)
        if feas[e + 1] and not feas[e]:  # entering the set
            starts.append(refined[np.argmax(rfeas)])
        else:  # leaving the set
            last = refined[len(rfeas) - 1 - np.argmax(rfeas[::-1])]
            intervals.append((starts.pop(), last))
    if feas[-1] and starts:
        intervals.append((starts.pop(), grid[-1]))
    return intervals


def random_bphi(rng) -> BivariatePhi:
    return BivariatePhi(
        sigma11=float(rng.uniform(0.3, 2.0)),
        sigma21=float(-rng.uniform(0.1, 1.5)),
        sigma22=float(rng.uniform(0.3, 2.0)),
    )


class TestConnectedSet:
    def test_reference_values(self, bphi):
        iset = connected_identified_set(bphi, 1.0)
        (lo, hi), = iset.intervals
        assert lo == pytest.approx(-1.1071487177940904, abs=1e-9)
        assert hi == pytest.approx(-0.5880026035475675, abs=1e-9)

    def test_matches_grid_bruteforce(self):
        rng = RngStream(50, 0).generator()
        for _ in range(100):
            phi = random_bphi(rng)
            omega_bar = float(rng.uniform(0.05, 3.0))
            iset = connected_identified_set(phi, omega_bar)

            def feasible(thetas):
                m = connected_margins_trig(thetas, phi, omega_bar, "rotation")
                return m.min(axis=0) >= 0

            got = grid_endpoints(feasible)
            assert len(got) == 1
            (lo, hi), = iset.intervals
            assert abs(got[0][0] - lo) < 1e-5
            assert abs(got[0][1] - hi) < 1e-5

    def test_degenerates_as_omega_to_zero(self, bphi):
        iset = connected_identified_set(bphi, 0.0)
        (lo, hi), = iset.intervals
        assert hi == pytest.approx(lo, abs=1e-12)
        assert lo == pytest.approx(np.arctan(bphi.sigma22 / bphi.sigma21))

    def test_upper_endpoint_to_zero_as_omega_grows(self, bphi):
        iset = connected_identified_set(bphi, 1e6)
        assert abs(iset.intervals[0][1]) < 1e-5

    def test_width_nondecreasing_in_omega(self, bphi):
        widths = [
            connected_identified_set(bphi, w).total_measure
            for w in (0.0, 0.01, 0.1, 0.5, 1.0, 10.0, 1e4)
        ]
        assert all(a <= b + 1e-15 for a, b in zip(widths, widths[1:]))


class TestDisconnectedSet:
    def test_reference_values(self, bphi):
        iset = disconnected_identified_set(bphi, 0.5)
        assert len(iset.intervals) == 2
        (a, b), (c, d) = iset.intervals
        assert a == pytest.approx(-1.1071487177940904, abs=1e-9)
        assert b == pytest.approx(-0.5235987755982988, abs=1e-9)  # arcsin(-1/2)
        assert c == pytest.approx(np.pi / 2, abs=1e-12)
        assert d == pytest.approx(2.0344439357957027, abs=1e-9)  # pi + arctan(-2)

    def test_first_interval_share(self, bphi):
        iset = disconnected_identified_set(bphi, 0.5)
        w1 = iset.intervals[0][1] - iset.intervals[0][0]
        share = w1 / iset.total_measure
        assert share == pytest.approx(0.557, abs=5e-4)

    def test_matches_grid_bruteforce(self):
        rng = RngStream(51, 0).generator()
        for _ in range(100):
            phi = random_bphi(rng)
            lam = float(rng.uniform(0.0, phi.sigma11))
            iset = disconnected_identified_set(phi, lam)

            def feasible(thetas):
                mr = disconnected_margins_trig(thetas, phi, lam, "rotation")
                mf = disconnected_margins_trig(thetas, phi, lam, "reflection")
                return (mr.min(axis=0) >= 0) | (mf.min(axis=0) >= 0)

            got = grid_endpoints(feasible)
            assert len(got) == len(iset.intervals)
            for (glo, ghi), (lo, hi) in zip(got, iset.intervals):
                assert abs(glo - lo) < 1e-5
                assert abs(ghi - hi) < 1e-5

    def test_lambda_zero_endpoints(self, bphi):
        iset = disconnected_identified_set(bphi, 0.0)
        assert iset.intervals[0][1] == pytest.approx(0.0, abs=1e-12)
        assert iset.intervals[1][1] == pytest.approx(
            np.pi + np.arctan(bphi.sigma22 / bphi.sigma21)
        )

    def test_first_interval_empties(self):
        phi = BivariatePhi(1.0, -2.0, 0.5)
        # cutoff: sigma22 / hypot = 0.5 / sqrt(4.25) ~ 0.2425
        iset = disconnected_identified_set(phi, 0.3)
        assert len(iset.intervals) == 1
        assert iset.intervals[0][0] == pytest.approx(np.pi / 2)

    def test_lambda_above_sigma11_empty(self, bphi):
        with pytest.raises(EmptySet):
            disconnected_identified_set(bphi, 1.0 + 1e-9)

    def test_measure_nonincreasing_in_lambda(self, bphi):
        measures = [
            disconnected_identified_set(bphi, lam).total_measure
            for lam in (0.0, 0.1, 0.3, 0.5, 0.8, 0.99)
        ]
        assert all(a >= b - 1e-15 for a, b in zip(measures, measures[1:]))


class TestThetaOf:
    def test_identity(self):
        theta, branch = theta_of(np.eye(2))
        assert theta == 0.0
        assert branch == "rotation"

    def test_swap_is_reflection(self):
        theta, branch = theta_of(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert theta == pytest.approx(np.pi / 2)
        assert branch == "reflection"

    def test_round_trip(self):
        rng = RngStream(52, 0).generator()
        for _ in range(300):
            theta = float(rng.uniform(-np.pi, np.pi))
            for branch in ("rotation", "reflection"):
                got, got_branch = theta_of(matrix_from_theta(theta, branch))
                assert got_branch == branch
                assert got == pytest.approx(theta, abs=1e-12)


class TestThetaIntervalSet:
    def test_rejects_unsorted(self):
        with pytest.raises(ValueError):
            ThetaIntervalSet(intervals=((0.0, 1.0), (0.5, 2.0)))

    def test_rejects_inverted(self):
        with pytest.raises(ValueError):
            ThetaIntervalSet(intervals=((1.0, 0.0),))

    def test_contains(self):
        iset = ThetaIntervalSet(intervals=((-1.0, -0.5), (0.5, 1.0)))
        assert iset.contains(-0.7)
        assert not iset.contains(0.0)
        assert iset.contains(-0.5)
