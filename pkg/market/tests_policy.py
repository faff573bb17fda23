import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings as hypothesis_settings, strategies as st
from scipy import stats

from .exceptions import BalancingInvariantViolation, InvalidParameter
from .policy import (
    CappedSalesCurve,
    PolicyKind,
    bisection_budget,
    build_heuristic_spec,
    build_policy,
    capped_mean_sales,
    check_cumulative_balancing,
    heuristic_resolve,
    policy_step,
    resolve_schedule,
)
from .tests_upper_bound import small_instance
from .upper_bound import solve_upper_bound_exact


class CappedSalesTests(SimpleTestCase):
    def test_matches_truncated_binomial_mean(self):
        T, p, c = 30, 0.2, 5
        k = np.arange(T + 1)
        expected = float(np.minimum(k, c) @ stats.binom.pmf(k, T, p))
        self.assertAlmostEqual(capped_mean_sales(T, p, c), expected, places=12)

    def test_edge_values(self):
        self.assertEqual(capped_mean_sales(10, 0.3, 0), 0.0)
        self.assertEqual(capped_mean_sales(10, 0.0, 4), 0.0)
        self.assertAlmostEqual(capped_mean_sales(10, 0.3, 10), 3.0)
        self.assertAlmostEqual(capped_mean_sales(10, 1.0, 4), 4.0)

    def test_rejects_probability_outside_unit_interval(self):
        with self.assertRaises(InvalidParameter):
            capped_mean_sales(10, 1.2, 3)

    def test_curve_is_monotone_in_p(self):
        curve = CappedSalesCurve(50)
        values = curve.many(np.linspace(0.0, 1.0, 11), [7] * 11)
        self.assertTrue(np.all(np.diff(values) >= 0))

    def test_worked_value(self):
        self.assertAlmostEqual(capped_mean_sales(5, 0.5, 2), 57 / 32, places=12)

    @hypothesis_settings(max_examples=80, deadline=None)
    @given(
        st.integers(min_value=1, max_value=200),
        st.floats(min_value=0.0, max_value=1.0),
        st.floats(min_value=0.0, max_value=1.0),
        st.integers(min_value=0, max_value=60),
    )
    def test_monotone_and_lipschitz_in_p(self, T, p, q, c):
        low, high = sorted((p, q))
        g_low, g_high = capped_mean_sales(T, low, c), capped_mean_sales(T, high, c)
        self.assertGreaterEqual(g_high, g_low - 1e-9)
        self.assertLessEqual(g_high - g_low, T * (high - low) + 1e-9)

    @hypothesis_settings(max_examples=80, deadline=None)
    @given(
        st.integers(min_value=1, max_value=200),
        st.floats(min_value=0.0, max_value=1.0),
        st.integers(min_value=0, max_value=60),
    )
    def test_one_more_unit_adds_at_most_one_sale(self, T, p, c):
        step = capped_mean_sales(T, p, c + 1) - capped_mean_sales(T, p, c)
        self.assertGreaterEqual(step, -1e-9)
        self.assertLessEqual(step, 1.0 + 1e-9)


class FixedTargetPolicyTests(SimpleTestCase):
    def test_calibrated_targets_balance_expected_sales(self):
        for seed in (1, 2, 3):
            with self.subTest(seed=seed):
                dyn = small_instance(seed, alpha=0.5, T=200)
                upper_bound = solve_upper_bound_exact(dyn)
                spec = build_policy(dyn, eps=0.1, upper_bound=upper_bound, eps2=1e-3)
                self.assertIs(spec.kind, PolicyKind.FIXED_TARGET)
                support = list(spec.support)
                expected = spec.expected_sales[support]
                self.assertGreaterEqual(expected.min(), spec.g_min * (1 - 1e-9))
                self.assertLessEqual(expected.max(), spec.g_min / dyn.alpha * (1 + 1e-9))
                self.assertTrue(np.all(spec.targets <= upper_bound.xs.x + 1e-15))
                budget = bisection_budget(dyn, 1e-3)
                self.assertTrue(all(count <= budget for count in spec.bisection_iterations.values()))

    def test_default_upper_bound_is_fptas(self):
        dyn = small_instance(2, alpha=0.75, T=100)
        spec = build_policy(dyn, eps=0.4)
        self.assertGreater(spec.upper_bound, 0.0)
        self.assertAlmostEqual(spec.eps2, 0.2)

    def test_eps2_cannot_exceed_one_minus_alpha(self):
        with self.assertRaises(InvalidParameter):
            build_policy(small_instance(1, alpha=0.75), eps=0.2, eps2=0.3)

    def test_equal_sales_policy_caps_at_smallest_inventory(self):
        dyn = small_instance(3, alpha=1.0, T=150)
        spec = build_policy(dyn)
        self.assertIs(spec.kind, PolicyKind.CAPPED)
        support = list(spec.support)
        self.assertEqual(spec.cap, int(dyn.c[support].min()))
        np.testing.assert_allclose(spec.expected_sales[support], spec.expected_sales[support][0])

    def test_policy_step_hides_sold_out_products(self):
        dyn = small_instance(1)
        spec = build_policy(dyn, upper_bound=solve_upper_bound_exact(dyn))
        remaining = dyn.c.copy()
        remaining[list(spec.support)[0]] = 0
        p = policy_step(spec, remaining, np.zeros(dyn.n), 1)
        self.assertEqual(p[list(spec.support)[0]], 0.0)


class ResolvingHeuristicTests(SimpleTestCase):
    def test_schedule(self):
        self.assertEqual(resolve_schedule(PolicyKind.HEURISTIC_1, 100), frozenset(range(10, 101, 10)))
        self.assertEqual(resolve_schedule(PolicyKind.HEURISTIC_2, 100), frozenset())

    def test_first_resolve_matches_upper_bound(self):
        dyn = small_instance(2, alpha=0.5)
        upper_bound = solve_upper_bound_exact(dyn)
        targets = heuristic_resolve(dyn, upper_bound.support, np.zeros(dyn.n), np.zeros(dyn.n), 1)
        self.assertAlmostEqual(dyn.T * float(dyn.r @ targets), upper_bound.objective,
                               delta=1e-7 * upper_bound.objective)

    def test_heuristic_spec_needs_resolving_kind(self):
        dyn = small_instance(2)
        with self.assertRaises(InvalidParameter):
            build_heuristic_spec(dyn, PolicyKind.FIXED_TARGET, solve_upper_bound_exact(dyn))

    def test_cumulative_balancing_check(self):
        history = np.array([[4.0, 1.0, 0.0]])
        check_cumulative_balancing(history, (0, 1), 0.25, t=3)
        with self.assertRaises(BalancingInvariantViolation):
            check_cumulative_balancing(history, (0, 1), 0.5, t=3)
