"""Series expansion: oracle evaluation, branch split, crossings."""

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nhvmc.series import (
    SeriesPoint,
    branch_crossings,
    default_grid,
    e_high,
    e_low,
    extrapolate,
)

mpmath.mp.dps = 50


def e_low_oracle(eta, xi, j=1.0):
    """Monomial-by-monomial evaluation at 50 decimal digits."""
    eta, xi, j = mpmath.mpf(eta), mpmath.mpf(xi), mpmath.mpf(j)
    t = [
        -j,
        -(eta**2 - xi**2) / (4 * j),
        -(eta**4 + xi**4) / (64 * j**3),
        -5 * eta**2 * xi**2 / (32 * j**3),
        -(eta**6 - xi**6) / (256 * j**5),
        -7 * (eta**4 * xi**2 - eta**2 * xi**4) / (256 * j**5),
        -25 * (eta**8 + xi**8) / (16384 * j**7),
        -129 * (eta**6 * xi**2 + eta**2 * xi**6) / (4096 * j**7),
        -171 * eta**4 * xi**4 / (8192 * j**7),
        -49 * (eta**10 - xi**10) / (65536 * j**9),
        781 * (eta**8 * xi**2 - eta**2 * xi**8) / (65536 * j**9),
        -33 * (eta**6 * xi**4 - eta**4 * xi**6) / (32768 * j**9),
        -441 * (eta**12 + xi**12) / (1048576 * j**11),
        -7631 * (eta**10 * xi**2 + eta**2 * xi**10) / (524288 * j**11),
        -18551 * (eta**8 * xi**4 + eta**4 * xi**8) / (1048576 * j**11),
        -7241 * eta**6 * xi**6 / (262144 * j**11),
    ]
    return mpmath.fsum(t)


def e_high_oracle(eta, xi, j=1.0):
    eta, xi, j = mpmath.mpf(eta), mpmath.mpf(xi), mpmath.mpf(j)
    x2 = xi * xi
    s = eta * eta + x2
    t = [
        -eta,
        -j**2 / (4 * eta),
        -j**4 * (eta**2 - 3 * x2) / (64 * eta**3 * s),
        -j**6 * (eta**2 + 5 * x2) / (256 * eta**5 * s),
        -j**8 * (25 * eta**6 - 269 * eta**4 * x2 - 405 * eta**2 * x2**2
                 - 175 * x2**3) / (16384 * eta**7 * s**3),
        -j**10 * (49 * eta**6 + 715 * eta**4 * x2 + 1043 * eta**2 * x2**2
                  + 441 * x2**3) / (65536 * eta**9 * s**3),
    ]
    return mpmath.fsum(t)


class TestLowField:
    def test_classical_point(self):
        assert e_low(0.0, 0.0) == -1.0
        assert e_low(0.0, 0.0, j=1.7) == -1.7

    def test_hermitian_sample_against_oracle(self):
        got = e_low(0.2, 0.0)
        want = float(e_low_oracle(0.2, 0.0))
        assert got == pytest.approx(want, rel=1e-15)
        # leading terms are -1 - eta^2/4 - eta^4/64 - ...
        assert got == pytest.approx(-1.0 - 0.01 - 2.5e-5, abs=1e-6)

    @given(st.floats(0.0, 3.0), st.floats(0.0, 0.5))
    @settings(max_examples=40, deadline=None)
    def test_matches_oracle_everywhere(self, eta, xi):
        assert e_low(eta, xi) == pytest.approx(float(e_low_oracle(eta, xi)),
                                               rel=1e-13, abs=1e-13)

    @given(st.floats(0.0, 3.0), st.floats(0.0, 0.5))
    @settings(max_examples=40, deadline=None)
    def test_even_in_xi(self, eta, xi):
        assert e_low(eta, xi) == e_low(eta, -xi)

    def test_hermitian_reduction_term_by_term(self):
        # at xi = 0 only the pure-eta monomials survive
        coeffs = {2: 1 / 4, 4: 1 / 64, 6: 1 / 256, 8: 25 / 16384,
                  10: 49 / 65536, 12: 441 / 1048576}
        eta = 0.3
        expected = -1.0 - sum(c * eta**p for p, c in coeffs.items())
        assert e_low(eta, 0.0) == pytest.approx(expected, rel=1e-14)

    def test_requires_nonzero_coupling(self):
        with pytest.raises(ValueError):
            e_low(0.5, 0.05, j=0.0)


class TestHighField:
    def test_domain_error_at_nonpositive_eta(self):
        with pytest.raises(ValueError):
            e_high(0.0, 0.0)
        with pytest.raises(ValueError):
            e_high(-1.0, 0.1)

    def test_leading_behavior_at_large_field(self):
        # the -eta term dominates; recovering the subleading -J^2/(4 eta)
        # costs one float cancellation, hence the absolute tolerance
        assert e_high(1e6, 0.0) + 1e6 == pytest.approx(-1.0 / (4e6), abs=1e-9)

    def test_hermitian_sample_against_oracle(self):
        assert e_high(2.0, 0.0) == pytest.approx(float(e_high_oracle(2.0, 0.0)),
                                                 rel=1e-15)

    @given(st.floats(0.2, 3.0), st.floats(0.0, 0.5))
    @settings(max_examples=40, deadline=None)
    def test_matches_oracle_everywhere(self, eta, xi):
        assert e_high(eta, xi) == pytest.approx(float(e_high_oracle(eta, xi)),
                                                rel=1e-13, abs=1e-13)

    def test_large_field_matches_dense_diagonalization(self):
        # derived once from the N=12 PBC spectrum at (eta, xi) = (3, 0.3);
        # recomputed live by the slow smoke suite
        ed_energy_per_spin = -3.0262519409
        assert e_high(3.0, 0.3) == pytest.approx(ed_energy_per_spin, abs=1e-3)


class TestExtrapolate:
    def test_branch_split(self):
        points = {p.eta: p for p in extrapolate()}
        assert points[0.5].chosen == "low"
        assert points[2.0].chosen == "high"
        assert points[1.5].chosen == "low"  # split is inclusive on the low side
        assert points[0.5].e_extrapolated == points[0.5].e_low
        assert points[2.0].e_extrapolated == points[2.0].e_high

    def test_default_grid_arithmetic(self):
        grid = default_grid()
        assert len(grid) == 31
        assert grid[0] == 0.0 and grid[-1] == 3.0

    def test_eta_zero_high_branch_undefined(self):
        point = extrapolate([0.0])[0]
        assert math.isnan(point.e_high)
        assert point.chosen == "low"
        assert point.e_extrapolated == -1.0

    def test_xi_rule_applied(self):
        point = extrapolate([1.0])[0]
        assert point.xi == pytest.approx(0.1)
        assert isinstance(point, SeriesPoint)

    def test_continuity_no_spurious_poles(self):
        # bounds are ~2x the largest true slope of each branch on the range
        # where it is used; a pole would overshoot them by orders of magnitude
        delta = 1e-4
        for eta in np.arange(0.0, 3.0, 0.037):
            assert abs(e_low(eta + delta, (eta + delta) / 10)
                       - e_low(eta, eta / 10)) < 3000 * delta
        for eta in np.arange(0.5, 3.0, 0.037):
            assert abs(e_high(eta + delta, (eta + delta) / 10)
                       - e_high(eta, eta / 10)) < 150 * delta


class TestBranchCrossings:
    def test_three_crossings_on_default_grid(self):
        roots = branch_crossings()
        assert len(roots) == 3
        assert roots[0] == pytest.approx(0.798315, abs=1e-5)
        assert roots[1] == pytest.approx(1.013638, abs=1e-5)
        assert roots[2] == pytest.approx(1.177587, abs=1e-5)

    def test_transition_crossing_near_one(self):
        assert any(0.9 <= r <= 1.1 for r in branch_crossings())
