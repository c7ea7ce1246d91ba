import math
from unittest import TestCase

import numpy as np

from l0reg.exceptions import ArgumentError, PreconditionError, UnsupportedModelError
from l0reg.lambda_rules import (LambdaInterval, Rule, coupled_lambda_for_max_sparsity,
                                coupled_lambda_interval_for_level, lambda_for_max_sparsity,
                                lambda_interval_for_level, lambda_interval_level_one,
                                lambda_preserving_global_min)
from l0reg.models import BlackBox, CoupledQuadratic, Quadratic, RegularizedObjective, SpikedCone
from l0reg.solver import global_minimize_f
from l0reg.transform import build_transform, identity_transform

I2 = identity_transform(2)


def random_transform(rng, d):
    if rng.random() < 0.5:
        return identity_transform(d)
    while True:
        matrix = rng.standard_normal((d, d))
        if np.linalg.cond(matrix) < 1e3:
            return build_transform(matrix)


def sparse_instance(rng, d, level):
    """Quadratique dont les données proviennent d'un vecteur de niveau donné, plus un bruit faible."""
    A = rng.standard_normal((d + 2, d))
    x = np.zeros(d)
    x[rng.choice(d, size=level, replace=False)] = rng.uniform(1, 3, size=level) * rng.choice([-1, 1], size=level)
    return Quadratic(A, A @ x + 0.05 * rng.standard_normal(d + 2))


class LambdaIntervalTest(TestCase):

    def test_sample_includes_endpoints(self):
        interval = LambdaInterval(lo=1.0, hi=2.0, feasible=True, target_level=1, rule=Rule.LEVEL)
        values = interval.sample(5)
        self.assertEqual(len(values), 5)
        self.assertAlmostEqual(values[0], 1.0)
        self.assertEqual(values[-1], 2.0)
        self.assertGreater(values[0], 1.0)

    def test_sample_unbounded(self):
        interval = LambdaInterval(lo=0.0, hi=math.inf, feasible=True, target_level=0, rule=Rule.MAX_SPARSITY)
        values = interval.sample(3, span=2.0)
        self.assertAlmostEqual(values[-1], 2.0)
        self.assertTrue(interval.contains(100.0))

    def test_sample_empty(self):
        interval = LambdaInterval(lo=1.0, hi=0.5, feasible=False, target_level=1, rule=Rule.LEVEL)
        self.assertFalse(interval.contains(0.75))
        with self.assertRaises(PreconditionError):
            interval.sample()

    def test_degenerate_interval(self):
        interval = LambdaInterval(lo=0.5, hi=0.5, feasible=True, target_level=1, rule=Rule.LEVEL)
        self.assertEqual(interval.guarded_lo, 0.5)
        self.assertTrue(interval.contains(0.5))

    def test_condition(self):
        interval = LambdaInterval(lo=0.1, hi=0.9, feasible=True, target_level=1, rule=Rule.LEVEL_ONE)
        self.assertEqual(interval.condition, 'g(x′) − g(x*) ≤ λ ≤ g(x₀) − g(x′)')
        for rule in Rule:
            self.assertIn('λ', LambdaInterval(lo=0.0, hi=1.0, feasible=True, target_level=1, rule=rule).condition)
        self.assertEqual(lambda_for_max_sparsity(SpikedCone(), I2).condition, 'λ ≥ g(x₀) − g(x*)')


class MaxSparsityTest(TestCase):

    def test_spiked_cone(self):
        interval = lambda_for_max_sparsity(SpikedCone(), I2)
        self.assertEqual(interval.lo, 1.0)
        self.assertEqual(interval.hi, math.inf)
        self.assertTrue(interval.feasible)
        self.assertEqual(interval.witnesses['g_star'].value, -1.0)
        self.assertEqual(interval.witnesses['g_0'].value, 0.0)

    def test_quadratic(self):
        interval = lambda_for_max_sparsity(Quadratic(np.eye(2), [3.0, 4.0]), I2)
        self.assertAlmostEqual(interval.lo, 25.0)

    def test_sparse_global_minimizer(self):
        interval = lambda_for_max_sparsity(Quadratic(np.eye(2), [0.0, 0.0]), I2)
        self.assertEqual(interval.lo, 0.0)

    def test_soundness(self):
        rng = np.random.default_rng(20)
        for _ in range(100):
            d = int(rng.integers(2, 7))
            transform = random_transform(rng, d)
            model = Quadratic(rng.standard_normal((d + 1, d)), rng.standard_normal(d + 1))
            interval = lambda_for_max_sparsity(model, transform)
            g_zero = interval.witnesses['g_0'].value
            g_star = interval.witnesses['g_star'].value
            for lam in (interval.guarded_lo, interval.lo + 1.0):
                report = global_minimize_f(RegularizedObjective(model, transform, lam))
                self.assertEqual(report.achieved_level, 0)
                self.assertAlmostEqual(report.value_f, g_zero, delta=1e-8)
                self.assertGreaterEqual(report.value_f - g_star, -1e-8)
                self.assertLessEqual(report.value_f - g_star, lam + 1e-8)


class LevelIntervalTest(TestCase):

    def test_spiked_cone_level_one(self):
        interval = lambda_interval_level_one(SpikedCone(), I2)
        self.assertAlmostEqual(interval.lo, 0.1)
        self.assertAlmostEqual(interval.hi, 0.9)
        self.assertTrue(interval.feasible)
        self.assertTrue(interval.diagnostics['midpoint'])
        self.assertEqual(interval.rule, Rule.LEVEL_ONE)

    def test_quadratic_level_one(self):
        interval = lambda_interval_level_one(Quadratic(np.eye(2), [4.0, 1.0]), I2)
        self.assertAlmostEqual(interval.lo, 1.0)
        self.assertAlmostEqual(interval.hi, 16.0)
        self.assertTrue(interval.feasible)
        np.testing.assert_allclose(interval.witnesses['g_prime'].point, [4.0, 0.0])

    def test_full_level(self):
        interval = lambda_interval_for_level(SpikedCone(), I2, 2)
        self.assertEqual(interval.lo, 0.0)
        self.assertTrue(interval.feasible)
        self.assertGreaterEqual(interval.hi, 0.0)

    def test_level_zero_redirect(self):
        with self.assertRaises(ArgumentError):
            lambda_interval_for_level(SpikedCone(), I2, 0)

    def test_infeasible_is_a_result(self):
        # g* = 0, g′ = 2, g₀ = 3
        interval = lambda_interval_level_one(Quadratic(np.eye(3), [1.0, 1.0, 1.0]), identity_transform(3))
        self.assertFalse(interval.feasible)
        self.assertGreater(interval.lo, interval.hi)
        self.assertFalse(interval.diagnostics['midpoint'])

    def test_soundness(self):
        rng = np.random.default_rng(21)
        for level in (1, 2):
            checked, broken = 0, 0
            for _ in range(1000):
                if checked == 100:
                    break
                d = int(rng.integers(level + 1, 6))
                model = sparse_instance(rng, d, level)
                transform = identity_transform(d)
                interval = lambda_interval_for_level(model, transform, level)
                self.assertEqual(interval.feasible, interval.diagnostics['interval_ordered'])
                if not interval.feasible:
                    continue
                checked += 1
                g_prime = interval.witnesses['g_prime'].value
                objective = RegularizedObjective(model, transform)
                prime_level = objective.level_of(interval.witnesses['g_prime'].point)
                samples = interval.sample(5)
                for k, lam in enumerate(samples):
                    report = global_minimize_f(objective.with_lambda(lam))
                    self.assertLessEqual(report.achieved_level, level)
                    self.assertAlmostEqual(report.value_f, g_prime + lam * prime_level, delta=1e-8)
                    if 0 < k < len(samples) - 1:
                        self.assertAlmostEqual(report.value_g, g_prime, delta=1e-8)
                lam = interval.hi + 0.1 * (interval.hi - interval.lo + 1)
                report = global_minimize_f(objective.with_lambda(lam))
                if abs(report.value_g - g_prime) > 1e-8:
                    broken += 1
            self.assertEqual(checked, 100)
            self.assertGreater(broken, 0)

    def test_weighted_average_equivalence(self):
        rng = np.random.default_rng(22)
        for _ in range(100):
            d = int(rng.integers(2, 5))
            model = Quadratic(rng.standard_normal((d + 1, d)), rng.standard_normal(d + 1))
            interval = lambda_interval_for_level(model, identity_transform(d), int(rng.integers(1, d + 1)))
            self.assertEqual(interval.feasible, interval.diagnostics['interval_ordered'])
            self.assertEqual(interval.feasible, all(interval.diagnostics['weighted_average'].values()))
            self.assertGreaterEqual(interval.lo, 0.0)


class PreserveTest(TestCase):

    def test_sparse_global_minimizer(self):
        interval = lambda_preserving_global_min(Quadratic(np.eye(2), [0.0, 0.0]), I2)
        self.assertEqual((interval.lo, interval.hi), (0.0, math.inf))

    def test_quadratic(self):
        model = Quadratic(np.eye(2), [4.0, 1.0])
        interval = lambda_preserving_global_min(model, I2)
        self.assertEqual(interval.lo, 0.0)
        self.assertAlmostEqual(interval.hi, 1.0)
        self.assertFalse(interval.conservative)
        report = global_minimize_f(RegularizedObjective(model, lam=interval.hi + 0.5))
        self.assertLess(report.achieved_level, 2)

    def test_soundness(self):
        rng = np.random.default_rng(23)
        for _ in range(50):
            d = int(rng.integers(2, 5))
            model = Quadratic(rng.standard_normal((d + 1, d)), rng.standard_normal(d + 1))
            interval = lambda_preserving_global_min(model, identity_transform(d))
            g_star = interval.witnesses['g_star'].value
            for lam in interval.sample(5):
                report = global_minimize_f(RegularizedObjective(model, lam=lam))
                self.assertAlmostEqual(report.value_f, g_star + lam * interval.target_level, delta=1e-8)

    def test_unattained_level_is_conservative(self):
        def evaluator(x):
            return float((x[0] * x[1] - 1.0) ** 2)

        def restricted_minimizer(pattern):
            return np.ones(2) if len(pattern) == 2 else np.zeros(2)

        interval = lambda_preserving_global_min(BlackBox(evaluator, 2, restricted_minimizer), I2)
        self.assertTrue(interval.conservative)
        self.assertEqual(interval.target_level, 2)
        self.assertAlmostEqual(interval.hi, 0.5)


class CoupledRulesTest(TestCase):

    def test_trivial(self):
        model = CoupledQuadratic(np.eye(2), np.zeros(2), 1.0, np.eye(2))
        interval = coupled_lambda_for_max_sparsity(model)
        self.assertAlmostEqual(interval.lo, 0.0)
        self.assertTrue(interval.notes)

    def test_closed_form_threshold(self):
        # g* = −1 en x = y = (1, 0) ; pour x = 0, min 2‖y‖² − 2y₁ = −0,5
        model = CoupledQuadratic(np.eye(2), [-2.0, 0.0], 1.0, np.eye(2))
        interval = coupled_lambda_for_max_sparsity(model)
        self.assertAlmostEqual(interval.lo, 0.5)
        report = global_minimize_f(RegularizedObjective(model, lam=interval.lo + 1.0))
        np.testing.assert_array_equal(report.minimizer.x, [0.0, 0.0])

    def test_full_level(self):
        model = CoupledQuadratic(np.eye(2), [-2.0, 1.0], 1.0, np.eye(2))
        interval = coupled_lambda_interval_for_level(model, 2)
        self.assertEqual(interval.lo, 0.0)
        self.assertTrue(interval.feasible)

    def test_requires_coupled_model(self):
        with self.assertRaises(UnsupportedModelError):
            coupled_lambda_for_max_sparsity(SpikedCone())

    def test_level_one_soundness(self):
        rng = np.random.default_rng(24)
        feasible = 0
        for _ in range(100):
            B = rng.standard_normal((2, 2))
            D = np.array([[1.0, 0.0], [0.0, 0.1], [0.0, 0.1]]) + 0.01 * rng.standard_normal((3, 2))
            model = CoupledQuadratic(B.T @ B + 0.1 * np.eye(2), [-4.0, 0.0] + 0.1 * rng.standard_normal(2),
                                     1.0, D)
            interval = coupled_lambda_interval_for_level(model, 1)
            g_star, g_prime = interval.witnesses['g_star'].value, interval.witnesses['g_prime'].value
            self.assertLessEqual(g_star, g_prime + 1e-10)
            self.assertLessEqual(g_prime, interval.witnesses['g_0'].value + 1e-10)
            self.assertEqual(interval.feasible, interval.diagnostics['coupled_midpoint'])
            if not interval.feasible:
                continue
            feasible += 1
            lam = (interval.lo + interval.hi) / 2
            report = global_minimize_f(RegularizedObjective(model, lam=lam))
            self.assertLessEqual(report.achieved_level, 1)
            self.assertAlmostEqual(report.value_g, g_prime, delta=1e-8)
        self.assertGreater(feasible, 0)
