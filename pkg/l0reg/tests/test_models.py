from unittest import TestCase

import numpy as np

from l0reg.exceptions import (ArgumentError, DimensionError, EvaluatorError, InputError, SolverError,
                              UnsupportedModelError)
from l0reg.models import (BlackBox, CoupledCappedL1, CoupledQuadratic, Pair, Quadratic, RegularizedObjective,
                          SpikedCone, eval_f, eval_g, global_min_g, solve_quadratic_form)
from l0reg.sparsity import l0_norm
from l0reg.transform import build_transform


class SpikedConeTest(TestCase):

    def setUp(self):
        self.model = SpikedCone()

    def test_values(self):
        self.assertEqual(eval_g(self.model, [1.0, 1.0]), -1.0)
        self.assertEqual(eval_g(self.model, [0.0, 0.0]), 0.0)
        self.assertEqual(eval_g(self.model, [0.0, 1.0]), -0.9)

    def test_regularized_values(self):
        objective = RegularizedObjective(self.model, lam=1.0)
        self.assertEqual(eval_f(objective, [0.0, 0.0]), 0.0)
        self.assertEqual(eval_f(objective, [1.0, 1.0]), 1.0)
        self.assertAlmostEqual(eval_f(objective, [0.0, 1.0]), 0.1)

    def test_global_minimum(self):
        point, value = global_min_g(self.model)
        np.testing.assert_array_equal(point, [1.0, 1.0])
        self.assertEqual(value, -1.0)

    def test_spike_is_isolated(self):
        self.assertAlmostEqual(self.model.cone_value(np.array([0.0, 1.0])), 1.0 / np.sqrt(2.0) - 1.0)
        self.assertAlmostEqual(self.model.cone_value(np.array([0.0, 1.0])), -0.2929, places=4)
        self.assertEqual(eval_g(self.model, [0.0, 1.0]), -0.9)
        self.assertAlmostEqual(eval_g(self.model, [1e-9, 1.0]), 1.0 / np.sqrt(2.0) - 1.0, places=6)

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionError):
            eval_g(self.model, [1.0, 2.0, 3.0])


class QuadraticTest(TestCase):

    def test_interpolation(self):
        point, value = global_min_g(Quadratic(np.eye(2), [3.0, 4.0]))
        np.testing.assert_allclose(point, [3.0, 4.0])
        self.assertAlmostEqual(value, 0.0)

    def test_lambda_zero_is_g(self):
        rng = np.random.default_rng(8)
        model = Quadratic(rng.standard_normal((4, 3)), rng.standard_normal(4))
        objective = RegularizedObjective(model)
        for _ in range(50):
            x = rng.standard_normal(3)
            self.assertEqual(eval_f(objective, x), eval_g(model, x))

    def test_shape_checks(self):
        with self.assertRaises(DimensionError):
            Quadratic(np.eye(2), [1.0, 2.0, 3.0])
        with self.assertRaises(InputError):
            Quadratic([[np.nan, 0.0]], [1.0])

    def test_negative_lambda(self):
        with self.assertRaises(ArgumentError):
            RegularizedObjective(Quadratic(np.eye(2), [1.0, 1.0]), lam=-1.0)

    def test_transform_dimension(self):
        with self.assertRaises(DimensionError):
            RegularizedObjective(Quadratic(np.eye(2), [1.0, 1.0]), build_transform(np.eye(3)))


class ObjectivePropertiesTest(TestCase):

    def setUp(self):
        self.rng = np.random.default_rng(9)
        self.model = Quadratic(self.rng.standard_normal((5, 4)), self.rng.standard_normal(5))

    def sparse_point(self):
        x = self.rng.standard_normal(4)
        x[self.rng.random(4) < 0.4] = 0.0
        return x

    def test_lambda_monotone(self):
        transform = build_transform(self.rng.standard_normal((3, 4)))
        for _ in range(200):
            x = self.sparse_point()
            lo, hi = np.sort(self.rng.uniform(0.0, 5.0, size=2))
            for t in (None, transform):
                below = eval_f(RegularizedObjective(self.model, t, lo), x)
                above = eval_f(RegularizedObjective(self.model, t, hi), x)
                self.assertLessEqual(below, above)

    def test_regularization_counts_level(self):
        objective = RegularizedObjective(self.model, lam=0.7)
        for _ in range(1000):
            x = self.sparse_point()
            self.assertAlmostEqual(eval_f(objective, x) - eval_g(self.model, x), 0.7 * l0_norm(x), delta=1e-9)

    def test_regularization_counts_level_of_image(self):
        transform = build_transform(self.rng.standard_normal((3, 4)))
        objective = RegularizedObjective(self.model, transform, 0.7)
        for _ in range(200):
            y = self.rng.standard_normal(3)
            y[self.rng.random(3) < 0.4] = 0.0
            x = transform.preimage(y)
            self.assertAlmostEqual(eval_f(objective, x) - eval_g(self.model, x), 0.7 * l0_norm(y), delta=1e-9)

    def test_quadratic_convexity(self):
        for _ in range(200):
            x, y = self.rng.standard_normal(4) * 3, self.rng.standard_normal(4) * 3
            t = self.rng.random()
            mixed = eval_g(self.model, t * x + (1 - t) * y)
            chord = t * eval_g(self.model, x) + (1 - t) * eval_g(self.model, y)
            self.assertLessEqual(mixed, chord + 1e-9 * (1.0 + abs(chord)))


class CoupledQuadraticTest(TestCase):

    def test_trivial_minimum(self):
        model = CoupledQuadratic(np.eye(2), np.zeros(2), 1.0, np.eye(2))
        point, value = global_min_g(model)
        np.testing.assert_allclose(point.x, [0.0, 0.0], atol=1e-12)
        np.testing.assert_allclose(point.y, [0.0, 0.0], atol=1e-12)
        self.assertAlmostEqual(value, 0.0)

    def test_minimum_against_grid(self):
        model = CoupledQuadratic(np.eye(1), [-2.0], 1.0, np.eye(1))
        point, value = global_min_g(model)
        grid = np.linspace(-3, 3, 601)
        best = min(model.value(Pair(np.array([a]), np.array([b]))) for a in grid[::6] for b in grid[::6])
        self.assertLessEqual(value, best + 1e-12)
        # y* = 1, x* = Dy* = 1
        np.testing.assert_allclose(point.flat(), [1.0, 1.0], atol=1e-10)

    def test_value(self):
        model = CoupledQuadratic(np.eye(2), [1.0, 0.0], 2.0, np.eye(2))
        pair = Pair(np.array([1.0, 0.0]), np.array([0.0, 1.0]))
        # φ(y) = 1, μ‖x − y‖² = 2·2
        self.assertAlmostEqual(model.value(pair), 5.0)

    def test_requires_pair(self):
        model = CoupledQuadratic(np.eye(2), np.zeros(2), 1.0, np.eye(2))
        with self.assertRaises(DimensionError):
            model.value(np.zeros(4))

    def test_invalid_parameters(self):
        with self.assertRaises(ArgumentError):
            CoupledQuadratic(np.eye(2), np.zeros(2), 0.0, np.eye(2))
        with self.assertRaises(InputError):
            CoupledQuadratic(-np.eye(2), np.zeros(2), 1.0, np.eye(2))
        with self.assertRaises(DimensionError):
            CoupledQuadratic(np.eye(2), np.zeros(2), 1.0, np.eye(3))

    def test_level_of_uses_x(self):
        model = CoupledQuadratic(np.eye(2), np.zeros(2), 1.0, np.eye(3, 2))
        objective = RegularizedObjective(model, lam=0.5)
        pair = Pair(np.array([1.0, 0.0, 2.0]), np.array([5.0, 5.0]))
        self.assertEqual(objective.level_of(pair), 2)
        self.assertAlmostEqual(eval_f(objective, pair), model.value(pair) + 1.0)


class CoupledCappedL1Test(TestCase):

    def test_value(self):
        model = CoupledCappedL1(np.eye(1), [0.0], 3.0, [[2.0]])
        pair = Pair(np.array([1.0]), np.array([1.0]))
        self.assertAlmostEqual(model.value(pair), 1.0 + 3.0 * 1.0)

    def test_no_closed_form(self):
        model = CoupledCappedL1(np.eye(1), [0.0], 1.0, [[1.0]])
        with self.assertRaises(UnsupportedModelError):
            global_min_g(model)


class BlackBoxTest(TestCase):

    def test_evaluator(self):
        model = BlackBox(lambda x: float(np.sum(x ** 2)), 2)
        self.assertEqual(eval_g(model, [1.0, 2.0]), 5.0)
        with self.assertRaises(UnsupportedModelError):
            global_min_g(model)

    def test_non_finite_value(self):
        model = BlackBox(lambda x: np.inf, 2)
        with self.assertRaises(EvaluatorError):
            eval_g(model, [1.0, 2.0])

    def test_restricted_minimizer(self):
        model = BlackBox(lambda x: float(np.sum((x - 1) ** 2)), 2,
                         restricted_minimizer=lambda pattern: pattern.mask().astype(float))
        point, value = global_min_g(model)
        np.testing.assert_array_equal(point, [1.0, 1.0])
        self.assertEqual(value, 0.0)


class QuadraticFormTest(TestCase):

    def test_restricted_solve(self):
        H = np.diag([1.0, 2.0])
        h = np.array([-2.0, -4.0])
        z, residual = solve_quadratic_form(H, h, np.eye(2)[:, [0]])
        np.testing.assert_allclose(z, [1.0, 0.0])
        self.assertLessEqual(residual, 1e-12)

    def test_empty_basis(self):
        z, residual = solve_quadratic_form(np.eye(2), np.ones(2), np.zeros((2, 0)))
        np.testing.assert_array_equal(z, [0.0, 0.0])
        self.assertEqual(residual, 0.0)

    def test_unbounded(self):
        with self.assertRaises(SolverError):
            solve_quadratic_form(np.diag([1.0, 0.0]), np.array([0.0, 1.0]), np.eye(2))
