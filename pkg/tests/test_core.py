"""Norm machinery, majorants, and empirical smoothness checks."""

import math

import numpy as np
import pytest

from greedy_opt import (
    Majorant,
    NormTag,
    NumericFailure,
    dual_norm,
    empirical_modulus,
    finite_difference_gradient_check,
    lp_norm,
    majorant_domination_witness,
    pairing,
    quadratic_objective,
    smoothness_gap_check,
)
from greedy_opt.core import sample_ball, unit_direction
from greedy_opt.objectives import Objective, logistic_objective, with_majorant


class TestNormTag:
    def test_rejects_l1_and_linf(self):
        for p in (1.0, 0.5, math.inf, float("nan")):
            with pytest.raises(ValueError):
                NormTag(p)

    def test_dual_exponent(self):
        # p' = p/(p-1); conjugate pairs must invert each other
        for p in (1.2, 1.5, 2.0, 3.0, 7.5):
            tag = NormTag(p)
            assert abs(1.0 / p + 1.0 / tag.dual_p - 1.0) <= 1e-15


class TestDualNorm:
    def test_pythagorean(self):
        assert dual_norm(np.array([3.0, 4.0])) == 5.0

    def test_zero_vector(self):
        for p in (1.5, 2.0, 4.0):
            assert dual_norm(np.zeros(3), NormTag(p)) == 0.0

    def test_sqrt5(self):
        np.testing.assert_allclose(dual_norm(np.array([1.0, 2.0])),
                                   math.sqrt(5.0), rtol=1e-15)

    def test_general_p_against_direct_formula(self):
        rng = np.random.default_rng(0)
        for p in (1.25, 1.5, 3.0):
            tag = NormTag(p)
            pd = p / (p - 1.0)
            for _ in range(20):
                v = rng.standard_normal(6)
                direct = float(np.sum(np.abs(v) ** pd) ** (1.0 / pd))
                np.testing.assert_allclose(dual_norm(v, tag), direct,
                                           rtol=1e-14)

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            dual_norm(np.array([1.0, float("nan")]))

    def test_hoelder_inequality(self):
        """<v, w> <= dual_norm(v) * ||w|| with 1e-12 relative slack."""
        rng = np.random.default_rng(1)
        for p in (1.2, 1.5, 2.0, 3.0, 6.0):
            tag = NormTag(p)
            for _ in range(200):
                v = rng.standard_normal(8)
                w = rng.standard_normal(8)
                bound = dual_norm(v, tag) * lp_norm(w, tag)
                assert pairing(v, w) <= bound * (1.0 + 1e-12)


class TestMajorant:
    def test_power_validation(self):
        with pytest.raises(ValueError):
            Majorant.power(-1.0, 2.0)
        with pytest.raises(ValueError):
            Majorant.power(1.0, 2.5)
        with pytest.raises(ValueError):
            Majorant.power(1.0, 1.0)

    def test_power_evaluation(self):
        mu = Majorant.power(0.5, 2.0)
        assert mu(0.0) == 0.0
        assert mu(2.0) == 2.0
        assert mu.slope(2.0) == 1.0

    def test_slope_monotone_on_log_grid(self):
        # mu(u)/u = gamma u^(q-1) must be nondecreasing
        for gamma, q in ((0.5, 2.0), (2.0, 1.5), (1.0, 1.01)):
            mu = Majorant.power(gamma, q)
            slopes = [mu.slope(u) for u in np.geomspace(1e-6, 10.0, 40)]
            assert all(a <= b + 1e-18 for a, b in zip(slopes, slopes[1:]))

    def test_tabulated(self):
        mu = Majorant.tabulated(lambda u: u * u, domain_bound=5.0)
        assert not mu.is_power
        assert mu(2.0) == 4.0


class TestBallSampling:
    def test_samples_stay_inside(self):
        rng = np.random.default_rng(2)
        for p in (1.3, 2.0, 4.0):
            tag = NormTag(p)
            for _ in range(200):
                x = sample_ball(rng, 5, radius=3.0, norm=tag)
                assert lp_norm(x, tag) <= 3.0 * (1.0 + 1e-12)

    def test_directions_are_unit(self):
        rng = np.random.default_rng(3)
        for p in (1.5, 2.0, 3.0):
            tag = NormTag(p)
            for _ in range(100):
                y = unit_direction(rng, 4, tag)
                np.testing.assert_allclose(lp_norm(y, tag), 1.0, rtol=1e-12)


class TestEmpiricalModulus:
    def test_quadratic_identity(self):
        """E = (s/2)||x - t||^2 has second difference exactly s u^2 ||y||^2."""
        E = quadratic_objective([1.0, 2.0], scale=1.0)
        for u in (0.1, 0.5, 1.3):
            got = empirical_modulus(E, 2.0, u, samples=50, seed=4)
            np.testing.assert_allclose(got, 0.5 * u * u, rtol=1e-11)

    def test_linear_objective_vanishes(self):
        a = np.array([2.0, -1.0, 0.5])
        E = Objective(3, lambda x: float(np.dot(a, x)), lambda x: a,
                      Majorant.power(1.0, 2.0), region_radius=5.0)
        assert empirical_modulus(E, 2.0, 0.7, samples=50, seed=5) <= 1e-12

    def test_zero_scale(self):
        E = quadratic_objective([1.0, 2.0])
        assert empirical_modulus(E, 1.0, 0.0, samples=10, seed=6) == 0.0

    def test_deterministic_given_seed(self):
        E = quadratic_objective([0.3, -0.7, 1.1])
        a = empirical_modulus(E, 1.5, 0.4, samples=30, seed=7)
        b = empirical_modulus(E, 1.5, 0.4, samples=30, seed=7)
        assert a == b

    def test_overflow_signals(self):
        E = Objective(1, lambda x: math.exp(float(x[0]) * 1e6) if x[0] > 0 else 1e308 * 1e10,
                      lambda x: x, Majorant.power(1.0, 2.0), region_radius=2.0)
        with pytest.raises(NumericFailure):
            empirical_modulus(E, 1.0, 1.0, samples=20, seed=8)

    def test_dominated_by_declared_majorant(self):
        """rho_hat <= mu(u) for every shipped power majorant (10^3 samples)."""
        E = quadratic_objective(np.array([0.5, -1.0, 0.25]), scale=2.0)
        for u in (0.05, 0.3, 1.0):
            got = empirical_modulus(E, E.region_radius, u, samples=1000, seed=9)
            assert got <= E.majorant(u) + 1e-9


class TestSmoothnessGapCheck:
    def test_worked_quadratic_case(self):
        # E = ||x-(1,2)||^2/2 at x=0, y=e2, u=1: gap = 1 - 2.5 + 2 = 0.5,
        # bounds [0, 2*mu(1)] = [0, 1]
        E = quadratic_objective([1.0, 2.0])
        x = np.zeros(2)
        y = np.array([0.0, 1.0])
        gap = E(x + y) - E(x) - pairing(E.gradient(x), y)
        np.testing.assert_allclose(gap, 0.5, rtol=1e-15)
        assert smoothness_gap_check(E, x, y, 1.0) is True

    def test_zero_u(self):
        E = quadratic_objective([1.0, 2.0])
        assert smoothness_gap_check(E, np.zeros(2), np.array([1.0, 0.0]),
                                    0.0) is True

    def test_strict_convexity_fails_zero_majorant(self):
        E = quadratic_objective([1.0, 2.0])
        zero = Majorant.tabulated(lambda u: 0.0, domain_bound=10.0)
        assert smoothness_gap_check(E, np.zeros(2), np.array([0.0, 1.0]), 1.0,
                                    majorant=zero) is False

    def test_out_of_region_is_not_applicable(self):
        E = quadratic_objective([1.0, 2.0])
        far = np.array([100.0, 100.0])
        assert smoothness_gap_check(E, far, np.array([1.0, 0.0]), 0.5) is None

    def test_zero_direction_rejected(self):
        E = quadratic_objective([1.0, 2.0])
        with pytest.raises(ValueError):
            smoothness_gap_check(E, np.zeros(2), np.zeros(2), 1.0)

    def test_sweep_all_shipped_instances(self):
        from greedy_opt.instances import (logistic_20x5, p_power_instance,
                                          quadratic_geometric)
        rng = np.random.default_rng(10)
        for E in (quadratic_objective([1.0, 2.0]), quadratic_geometric(16),
                  logistic_20x5(), p_power_instance()):
            for _ in range(100):
                x = sample_ball(rng, E.dim, radius=E.region_radius)
                y = unit_direction(rng, E.dim)
                u = float(rng.uniform(0.0, 2.0))
                assert smoothness_gap_check(E, x, y, u) is not False


class TestGradientCheck:
    def test_quadratic_gradient_exact(self):
        E = quadratic_objective([1.0, 2.0])
        assert finite_difference_gradient_check(E, np.array([1.0, 2.0]),
                                                h=1e-5, tol=1e-8)

    def test_logistic_gradient(self):
        design = np.array([[1.0, 0.5], [-0.3, 1.2], [0.8, -0.7], [0.1, 0.9]])
        labels = np.array([1.0, -1.0, 1.0, -1.0])
        E = logistic_objective(design, labels)
        assert finite_difference_gradient_check(E, np.zeros(2), h=1e-5,
                                                tol=1e-6)

    def test_corrupted_gradient_detected(self):
        E = quadratic_objective([1.0, 2.0])
        bad = Objective(2, E._value, lambda x: E._gradient(x) + 1e-3,
                        E.majorant, E.region_radius)
        assert not finite_difference_gradient_check(bad, np.array([0.5, 0.5]))


class TestDominationWitness:
    def test_clean_majorant_has_no_violations(self):
        E = quadratic_objective([1.0, 2.0])
        assert majorant_domination_witness(E, samples=60, seed=11).ok

    def test_halved_gamma_is_caught(self):
        E = quadratic_objective([1.0, 2.0])
        bad = with_majorant(E, Majorant.power(E.majorant.gamma / 2.0, 2.0))
        witness = majorant_domination_witness(bad, samples=60, seed=11)
        assert not witness.ok
        assert len(witness.violations) > 0
