"""Tests for the covariance recursion, its fixed point, and the gains."""

import math

import numpy as np
import pytest

from macfb import (
    ConvergenceError,
    Covariance2,
    InvalidParameterError,
    gain_set,
    optimal_gain,
    riccati_fixed_point,
    riccati_step,
    riccati_trajectory,
    steady_state_closed_form,
)

GRID = [1.2, 1.5, 2.0, 3.0]
SIGMAS = [0.5, 1.0, 2.0]


class TestRiccatiStep:
    def test_zero_is_fixed(self):
        q = riccati_step(Covariance2(0.0, 0.0, 0.0), 2.0, -2.0, 1.0)
        assert q.q11 == 0.0 and q.q22 == 0.0 and q.q12 == 0.0

    def test_hand_computed_step_from_identity(self):
        # HQH^T = 2, beta = 3, correction has all entries 1/3:
        # A (Q - corr) A = [[8/3, 4/3], [4/3, 8/3]]
        q = riccati_step(Covariance2(1.0, 1.0, 0.0), 2.0, -2.0, 1.0)
        assert q.q11 == pytest.approx(8.0 / 3.0, abs=1e-15)
        assert q.q22 == pytest.approx(8.0 / 3.0, abs=1e-15)
        assert q.q12 == pytest.approx(4.0 / 3.0, abs=1e-15)

    def test_fixed_point_maps_to_itself(self):
        q = riccati_fixed_point(2.0, -2.0, 1.0)
        nxt = riccati_step(q, 2.0, -2.0, 1.0)
        assert nxt.max_abs_diff(q) < 1e-12

    def test_rejects_nonpositive_noise(self):
        with pytest.raises(InvalidParameterError):
            riccati_step(Covariance2(1.0, 1.0, 0.0), 2.0, -2.0, 0.0)


class TestFixedPoint:
    def test_reference_instance(self):
        q = riccati_fixed_point(2.0, -2.0, 1.0)
        assert q.q11 == pytest.approx(75.0 / 16.0, rel=1e-11)
        assert q.q22 == pytest.approx(75.0 / 16.0, rel=1e-11)
        assert abs(q.q12) / math.sqrt(q.q11 * q.q22) == pytest.approx(0.6, rel=1e-10)

    def test_noise_scaling_homogeneity(self):
        base = riccati_fixed_point(1.7, -1.3, 1.0)
        for c in (0.5, 2.0, 7.25):
            scaled = riccati_fixed_point(1.7, -1.3, c)
            assert scaled.q11 == pytest.approx(c * base.q11, rel=1e-9)
            assert scaled.q22 == pytest.approx(c * base.q22, rel=1e-9)
            assert scaled.q12 == pytest.approx(c * base.q12, rel=1e-9)

    @pytest.mark.parametrize("m1", GRID)
    @pytest.mark.parametrize("m2", GRID)
    @pytest.mark.parametrize("sigma", SIGMAS)
    def test_matches_closed_form_on_grid(self, m1, m2, sigma):
        for a1, a2 in ((m1, -m2), (-m1, m2)):
            q = riccati_fixed_point(a1, a2, sigma)
            p1, p2, rho = steady_state_closed_form(a1, a2, sigma)
            assert q.q11 == pytest.approx(p1, rel=1e-9)
            assert q.q22 == pytest.approx(p2, rel=1e-9)
            assert abs(q.q12) / math.sqrt(q.q11 * q.q22) == pytest.approx(rho, rel=1e-9)

    def test_off_diagonal_sign_is_deterministic(self):
        # with opposite-sign scale factors the iteration settles on q12 > 0
        for m1 in GRID:
            for m2 in GRID:
                q = riccati_fixed_point(m1, -m2, 1.0)
                assert q.q12 > 0

    def test_nonconvergence_carries_residual(self):
        with pytest.raises(ConvergenceError) as err:
            riccati_fixed_point(2.0, -2.0, 1.0, tol=1e-12, max_iter=2)
        assert err.value.residual is not None and err.value.residual > 0

    def test_rejects_non_expanding_scale(self):
        with pytest.raises(InvalidParameterError):
            riccati_fixed_point(1.0, -2.0, 1.0)


class TestClosedForm:
    def test_reference_values(self):
        p1, p2, rho = steady_state_closed_form(2.0, -2.0, 1.0)
        assert p1 == pytest.approx(4.6875, abs=1e-15)
        assert p2 == pytest.approx(4.6875, abs=1e-15)
        assert rho == pytest.approx(0.6, abs=1e-15)

    def test_power_vanishes_at_unit_gain(self):
        p1, _, _ = steady_state_closed_form(1.0 + 1e-9, -2.0, 1.0)
        assert 0 < p1 < 1e-8

    def test_rejects_unit_gain(self):
        with pytest.raises(InvalidParameterError):
            steady_state_closed_form(0.9, -2.0, 1.0)
        with pytest.raises(InvalidParameterError):
            steady_state_closed_form(2.0, -2.0, -1.0)


class TestOptimalGain:
    def test_zero_covariance(self):
        ell = optimal_gain(Covariance2(0.0, 0.0, 0.0), 1.0)
        assert np.allclose(ell, [0.0, 0.0])

    def test_identity_covariance(self):
        ell = optimal_gain(Covariance2(1.0, 1.0, 0.0), 1.0)
        assert np.allclose(ell, [1.0 / 3.0, 1.0 / 3.0])

    def test_reference_fixed_point_gain(self):
        # at Q* = [[75/16, 45/16], [45/16, 75/16]]: QH^T = (15/2, 15/2),
        # H Q H^T + 1 = 16, so l = (15/32, 15/32)
        q = riccati_fixed_point(2.0, -2.0, 1.0)
        ell = optimal_gain(q, 1.0)
        assert np.allclose(ell, [15.0 / 32.0, 15.0 / 32.0], atol=1e-10)


class TestGainSet:
    def test_big_l_consistency(self):
        g = gain_set(2.0, -2.0, 1.0)
        assert g.big_l[0] == pytest.approx(g.a1 * g.l1)
        assert g.big_l[1] == pytest.approx(g.a2 * g.l2)
        assert g.big_l[0] == pytest.approx(15.0 / 16.0, abs=1e-10)
        assert g.big_l[1] == pytest.approx(-15.0 / 16.0, abs=1e-10)

    def test_closed_loop_is_stable(self):
        # A (I - l H) must contract for the error recursion to work
        for a1, a2 in ((1.2, -1.2), (2.0, -2.0), (3.0, -1.5), (1.2, -3.0)):
            g = gain_set(a1, a2, 1.0)
            m = np.diag([a1, a2]) @ (np.eye(2) - np.outer([g.l1, g.l2], [1.0, 1.0]))
            assert max(abs(np.linalg.eigvals(m))) < 1.0

    def test_inconsistent_big_l_rejected(self):
        g = gain_set(2.0, -2.0, 1.0)
        from macfb import GainSet

        with pytest.raises(InvalidParameterError):
            GainSet(
                a1=g.a1, a2=g.a2, l1=g.l1, l2=g.l2,
                big_l=(1.0, 1.0), q_ss=g.q_ss, rho=g.rho, sigma_z2=g.sigma_z2,
            )


class TestTrajectory:
    def test_converges_toward_fixed_point(self):
        traj = riccati_trajectory(2.0, -2.0, 1.0, steps=40)
        target = riccati_fixed_point(2.0, -2.0, 1.0)
        assert traj[0].max_abs_diff(target) > traj[-1].max_abs_diff(target)
        assert traj[-1].max_abs_diff(target) < 1e-12


class TestCovariance2:
    def test_rejects_negative_diagonal(self):
        with pytest.raises(InvalidParameterError):
            Covariance2(-1.0, 1.0, 0.0)

    def test_rejects_impossible_cross_term(self):
        with pytest.raises(InvalidParameterError):
            Covariance2(1.0, 1.0, 1.5)

    def test_matrix_round_trip(self):
        q = Covariance2(2.0, 3.0, -1.0)
        m = q.as_matrix()
        assert m[0, 1] == m[1, 0] == -1.0
        assert q.rho == pytest.approx(-1.0 / math.sqrt(6.0))
