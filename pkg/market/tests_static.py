import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings as hypothesis_settings

from .choice import Instance, check_bms_feasible, sales_to_distribution
from .exceptions import InvalidParameter, SizeLimitExceeded
from .static import (
    example_randomization_instance,
    make_gap_instance,
    reduced_revenue,
    sensitivity_instance,
    solve_bms,
    solve_bms_bruteforce,
    solve_bms_deterministic,
    solve_bms_support_lp,
    value_of_randomization,
)
from .tests_choice import instances


class SensitivityExampleTests(SimpleTestCase):
    def test_tight_balance_moves_threshold_to_heavy_products(self):
        solution = solve_bms(sensitivity_instance(alpha=1 / 3))
        self.assertEqual(solution.support, (1, 2))
        self.assertAlmostEqual(solution.revenue, 4 / 5)
        self.assertAlmostEqual(solution.threshold_v, 1.0)

    def test_equal_sales_offers_every_product(self):
        eps = 1 / 500
        solution = solve_bms(sensitivity_instance(eps=eps, alpha=1.0))
        self.assertEqual(solution.support, (0, 1, 2))
        self.assertAlmostEqual(solution.threshold_v, eps)
        np.testing.assert_allclose(solution.xs.x, np.full(3, eps / (1 + 3 * eps)))

    def test_reduced_revenue_matches_optimum(self):
        inst = sensitivity_instance(alpha=1 / 3)
        self.assertAlmostEqual(reduced_revenue(inst, 1.0), 4 / 5)

    def test_eps_must_stay_small(self):
        with self.assertRaises(InvalidParameter):
            sensitivity_instance(eps=0.01)


class StaticSolverTests(SimpleTestCase):
    def test_single_product(self):
        inst = Instance(r=[3.0], v=[0.5], alpha=0.7)
        solution = solve_bms(inst)
        self.assertEqual(solution.support, (0,))
        self.assertAlmostEqual(solution.revenue, 1.0)

    def test_randomizing_example_reaches_known_optimum(self):
        n, alpha = 4, 0.5
        inst, optimum = example_randomization_instance(n, alpha)
        solution = solve_bms(inst)
        self.assertAlmostEqual(solution.revenue, n / (n + alpha))
        np.testing.assert_allclose(solution.xs.x, optimum.x, rtol=1e-9)
        self.assertEqual(len(sales_to_distribution(inst, solution.xs).entries), n)

    def test_deterministic_assortment_is_balanced(self):
        inst = Instance(r=[9.0, 5.0, 4.0, 1.0], v=[0.1, 0.4, 0.5, 2.0], alpha=0.6)
        solution = solve_bms_deterministic(inst)
        weights = inst.v[list(solution.assortment)]
        self.assertLessEqual(weights.max() * inst.alpha, weights.min() * (1 + 1e-12))
        self.assertLessEqual(solution.revenue, solve_bms(inst).revenue + 1e-12)

    def test_support_formulations_agree(self):
        inst = Instance(r=[9.0, 5.0, 4.0], v=[0.1, 0.4, 0.5], alpha=0.6)
        auxiliary = solve_bms_support_lp(inst, (0, 1, 2))
        pairwise = solve_bms_support_lp(inst, (0, 1, 2), formulation="pairwise")
        self.assertAlmostEqual(auxiliary.revenue(inst), pairwise.revenue(inst))

    def test_bruteforce_size_guard(self):
        inst = Instance(r=np.ones(5), v=np.ones(5), alpha=0.5)
        with self.assertRaises(SizeLimitExceeded):
            solve_bms_bruteforce(inst, n_max=4)

    @hypothesis_settings(max_examples=30, deadline=None)
    @given(instances())
    def test_closed_form_matches_support_enumeration(self, inst):
        solution = solve_bms(inst)
        exhaustive = solve_bms_bruteforce(inst)
        self.assertEqual(check_bms_feasible(inst, solution.xs), [])
        self.assertAlmostEqual(solution.revenue, exhaustive.revenue, delta=1e-7 * max(1.0, exhaustive.revenue))

    @hypothesis_settings(max_examples=30, deadline=None)
    @given(instances())
    def test_randomization_never_hurts(self, inst):
        gap = value_of_randomization(inst)
        self.assertTrue(gap.within_upper_bound, gap)


class RandomizationGapTests(SimpleTestCase):
    def test_single_product_has_no_gap(self):
        gap = value_of_randomization(make_gap_instance(1, 0.5))
        self.assertAlmostEqual(gap.ratio, 1.0)

    def test_gap_instances_stay_between_bounds(self):
        for n in (2, 4, 8):
            for alpha in (0.5, 0.9, 1 - 1 / n + 1e-3):
                with self.subTest(n=n, alpha=alpha):
                    gap = value_of_randomization(make_gap_instance(n, alpha))
                    self.assertTrue(gap.reaches_lower_bound, gap)
                    self.assertTrue(gap.within_upper_bound, gap)

    def test_gap_instance_validates_inputs(self):
        with self.assertRaises(InvalidParameter):
            make_gap_instance(0, 0.5)
        with self.assertRaises(InvalidParameter):
            make_gap_instance(3, 1.5)
