import itertools

import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings as hypothesis_settings, strategies as st

from .choice import DynamicInstance, Instance, SalesVector
from .exceptions import InvalidParameter, SizeLimitExceeded
from .generator import GenConfig, generate
from .static import solve_bms
from .tests_choice import instances
from .upper_bound import (
    MckpClass,
    MckpInstance,
    check_upper_bound_feasible,
    solve_mckp,
    solve_upper_bound,
    solve_upper_bound_alpha1,
    solve_upper_bound_exact,
    solve_upper_bound_fptas,
)


def small_instance(seed, alpha=0.5, n=5, T=100):
    return generate(GenConfig(T=T, P0=0.3, gamma=0.8, alpha=alpha, seed=seed, n=n))


def brute_mckp(mckp):
    best = 0.0
    options = [[None] + list(range(cls.values.size)) for cls in mckp.classes]
    for choices in itertools.product(*options):
        picked = [(cls, c) for cls, c in zip(mckp.classes, choices) if c is not None]
        weight = sum(cls.weights[c] for cls, c in picked)
        if weight <= mckp.capacity:
            best = max(best, sum(cls.values[c] for cls, c in picked))
    return best


class KnapsackTests(SimpleTestCase):
    def test_picks_at_most_one_item_per_class(self):
        mckp = MckpInstance(
            classes=(
                MckpClass(label=0, values=np.array([3.0, 5.0]), weights=np.array([0.2, 0.6])),
                MckpClass(label=1, values=np.array([4.0]), weights=np.array([0.5])),
            ),
            capacity=0.8,
        )
        selection = solve_mckp(mckp, 0.01)
        self.assertEqual(selection.choices, (0, 0))
        self.assertAlmostEqual(selection.value, 7.0)
        self.assertAlmostEqual(selection.weight, 0.7)

    def test_eps_range(self):
        with self.assertRaises(InvalidParameter):
            solve_mckp(MckpInstance(classes=(), capacity=1.0), 1.0)

    @hypothesis_settings(max_examples=40, deadline=None)
    @given(st.data())
    def test_value_within_eps_of_optimum(self, data):
        classes = []
        for label in range(data.draw(st.integers(min_value=1, max_value=3))):
            size = data.draw(st.integers(min_value=1, max_value=3))
            values = data.draw(st.lists(st.floats(min_value=0.1, max_value=10.0), min_size=size, max_size=size))
            weights = data.draw(st.lists(st.floats(min_value=0.05, max_value=1.0), min_size=size, max_size=size))
            classes.append(MckpClass(label=label, values=np.array(values), weights=np.array(weights)))
        mckp = MckpInstance(classes=tuple(classes), capacity=data.draw(st.floats(min_value=0.1, max_value=1.5)))
        eps = 0.1
        selection = solve_mckp(mckp, eps)
        self.assertLessEqual(selection.weight, mckp.capacity * (1 + 1e-9))
        self.assertGreaterEqual(selection.value, (1 - eps) * brute_mckp(mckp) - 1e-9)


class UpperBoundTests(SimpleTestCase):
    def test_fptas_is_feasible_and_close_to_exact(self):
        eps = 0.2
        for seed in (1, 2, 3):
            with self.subTest(seed=seed):
                dyn = small_instance(seed)
                exact = solve_upper_bound_exact(dyn)
                fptas = solve_upper_bound_fptas(dyn, eps)
                self.assertEqual(check_upper_bound_feasible(dyn, exact.xs), [])
                self.assertEqual(check_upper_bound_feasible(dyn, fptas.xs), [])
                self.assertLessEqual(fptas.objective, exact.objective * (1 + 1e-9))
                self.assertGreaterEqual(fptas.objective, (1 - eps) * exact.objective)
                self.assertIn("live_pairs", fptas.stats)

    def test_equal_sales_solver_matches_exact(self):
        for seed in (4, 5):
            with self.subTest(seed=seed):
                dyn = small_instance(seed, alpha=1.0)
                exact = solve_upper_bound_exact(dyn)
                equal = solve_upper_bound_alpha1(dyn)
                self.assertAlmostEqual(equal.objective, exact.objective, delta=1e-7 * exact.objective)
                x = equal.xs.x[list(equal.support)]
                np.testing.assert_allclose(x, x[0])

    def test_equal_sales_solver_requires_alpha_one(self):
        with self.assertRaises(InvalidParameter):
            solve_upper_bound_alpha1(small_instance(1, alpha=0.5))

    def test_dispatch(self):
        self.assertEqual(solve_upper_bound(small_instance(1)).method, "exact")
        self.assertEqual(solve_upper_bound(small_instance(1, alpha=1.0), n_max=3).method, "alpha1")
        self.assertEqual(solve_upper_bound(small_instance(1), n_max=3, eps=0.2).method, "fptas")
        with self.assertRaises(InvalidParameter):
            solve_upper_bound(small_instance(1), method="simplex")

    def test_exact_size_guard(self):
        with self.assertRaises(SizeLimitExceeded):
            solve_upper_bound_exact(small_instance(1, n=6), n_max=5)

    def test_fptas_eps_range(self):
        with self.assertRaises(InvalidParameter):
            solve_upper_bound_fptas(small_instance(1), 0.5)

    def test_inventory_violation_is_reported(self):
        dyn = DynamicInstance(base=Instance(r=[1.0, 1.0], v=[1.0, 1.0], alpha=0.5), T=10, c=[1, 5])
        violations = check_upper_bound_feasible(dyn, SalesVector(x0=0.4, x=[0.3, 0.3]))
        self.assertEqual([(v.constraint, v.index) for v in violations], [("inventory", 0)])


class UpperBoundPropertyTests(SimpleTestCase):
    @hypothesis_settings(max_examples=15, deadline=None)
    @given(
        st.integers(min_value=0, max_value=10_000),
        st.integers(min_value=2, max_value=6),
        st.sampled_from([0.25, 0.5, 0.75]),
    )
    def test_fptas_guarantee_at_default_eps(self, seed, n, alpha):
        eps = 0.05
        dyn = small_instance(seed, alpha=alpha, n=n)
        exact = solve_upper_bound_exact(dyn)
        fptas = solve_upper_bound_fptas(dyn, eps)
        self.assertEqual(check_upper_bound_feasible(dyn, fptas.xs), [])
        self.assertLessEqual(fptas.objective, exact.objective * (1 + 1e-9))
        self.assertGreaterEqual(fptas.objective, (1 - eps) * exact.objective * (1 - 1e-9))

    @hypothesis_settings(max_examples=30, deadline=None)
    @given(instances(max_n=5), st.integers(min_value=1, max_value=50))
    def test_ample_inventory_gives_static_optimum(self, inst, T):
        dyn = DynamicInstance(base=inst, T=T, c=[T] * inst.n)
        expected = T * solve_bms(inst).revenue
        exact = solve_upper_bound_exact(dyn)
        self.assertAlmostEqual(exact.objective, expected, delta=1e-7 * expected)

    @hypothesis_settings(max_examples=20, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000), st.integers(min_value=1, max_value=6))
    def test_equal_sales_solver_agrees_with_exact(self, seed, n):
        dyn = small_instance(seed, alpha=1.0, n=n)
        exact = solve_upper_bound_exact(dyn)
        equal = solve_upper_bound_alpha1(dyn)
        self.assertEqual(check_upper_bound_feasible(dyn, equal.xs), [])
        self.assertAlmostEqual(equal.objective, exact.objective, delta=1e-7 * max(1.0, exact.objective))
