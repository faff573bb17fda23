import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings as hypothesis_settings, strategies as st

from .choice import (
    NO_PURCHASE,
    AssortmentDistribution,
    DynamicInstance,
    Instance,
    SalesVector,
    check_bms_feasible,
    choice_prob,
    choice_probabilities,
    expected_revenue,
    revenue_ordered_optimum,
    sales_to_distribution,
)
from .exceptions import InfeasibleSalesVector, InvalidInstance, ProductIndexError
from .static import solve_bms


@st.composite
def instances(draw, max_n=5):
    n = draw(st.integers(min_value=1, max_value=max_n))
    r = draw(st.lists(st.floats(min_value=0.5, max_value=10.0), min_size=n, max_size=n))
    v = draw(st.lists(st.floats(min_value=0.05, max_value=3.0), min_size=n, max_size=n))
    alpha = draw(st.floats(min_value=0.1, max_value=1.0))
    return Instance(r=r, v=v, alpha=alpha)


class InstanceTests(SimpleTestCase):
    def test_instance_arrays_are_read_only(self):
        inst = Instance(r=[1.0, 2.0], v=[0.5, 0.5], alpha=0.5)
        with self.assertRaises(ValueError):
            inst.r[0] = 3.0

    def test_instance_rejects_nonpositive_weight(self):
        with self.assertRaises(InvalidInstance):
            Instance(r=[1.0, 2.0], v=[0.5, 0.0], alpha=0.5)

    def test_instance_rejects_alpha_outside_range(self):
        with self.assertRaises(InvalidInstance):
            Instance(r=[1.0], v=[1.0], alpha=0.0)

    def test_dynamic_instance_requires_integral_inventory(self):
        base = Instance(r=[1.0, 2.0], v=[0.5, 0.5], alpha=0.5)
        with self.assertRaises(InvalidInstance):
            DynamicInstance(base=base, T=10, c=[1.5, 2])
        with self.assertRaises(InvalidInstance):
            DynamicInstance(base=base, T=10, c=[0, 2])

    def test_with_alpha_keeps_products(self):
        dyn = DynamicInstance(base=Instance(r=[1.0, 2.0], v=[0.5, 0.5], alpha=0.5), T=10, c=[3, 4])
        other = dyn.with_alpha(1.0)
        self.assertEqual(other.alpha, 1.0)
        np.testing.assert_array_equal(other.c, dyn.c)
        self.assertEqual(other.c_min, 3)


class ChoiceProbabilityTests(SimpleTestCase):
    def setUp(self):
        self.inst = Instance(r=[1.0, 2.0, 4.0], v=[1.0, 1.0, 2.0], alpha=0.5)

    def test_probabilities_of_offered_products(self):
        np.testing.assert_allclose(choice_probabilities(self.inst, [0, 1]), [1 / 3, 1 / 3, 0.0])

    def test_no_purchase_probability(self):
        self.assertAlmostEqual(choice_prob(self.inst, [0, 1], NO_PURCHASE), 1 / 3)
        self.assertEqual(choice_prob(self.inst, [0, 1], 2), 0.0)
        self.assertEqual(choice_prob(self.inst, [], NO_PURCHASE), 1.0)

    def test_expected_revenue(self):
        self.assertAlmostEqual(expected_revenue(self.inst, [0, 1, 2]), (1 + 2 + 8) / 5)
        self.assertEqual(expected_revenue(self.inst, []), 0.0)

    def test_unknown_product_raises(self):
        with self.assertRaises(ProductIndexError):
            choice_probabilities(self.inst, [0, 3])
        with self.assertRaises(ProductIndexError):
            choice_prob(self.inst, [0], 5)

    def test_revenue_ordered_optimum_prefers_top_revenues(self):
        assortment, revenue = revenue_ordered_optimum(self.inst.r, self.inst.v)
        self.assertEqual(assortment, (2,))
        self.assertAlmostEqual(revenue, 8 / 3)
        assortment, revenue = revenue_ordered_optimum(self.inst.r, self.inst.v, allowed=[0, 1])
        self.assertEqual(assortment, (1,))
        self.assertAlmostEqual(revenue, 1.0)

    @hypothesis_settings(max_examples=40, deadline=None)
    @given(instances())
    def test_probabilities_sum_to_one(self, inst):
        S = range(inst.n)
        total = choice_probabilities(inst, S).sum() + choice_prob(inst, S, NO_PURCHASE)
        self.assertAlmostEqual(total, 1.0, places=12)


class FeasibilityTests(SimpleTestCase):
    def setUp(self):
        self.inst = Instance(r=[1.0, 2.0], v=[1.0, 1.0], alpha=0.5)

    def test_balanced_sales_vector_is_feasible(self):
        xs = SalesVector.from_weights([1.0, 1.0])
        self.assertEqual(check_bms_feasible(self.inst, xs), [])

    def test_unbalanced_sales_vector_reports_balancing(self):
        xs = SalesVector(x0=0.5, x=[0.4, 0.1])
        constraints = {violation.constraint for violation in check_bms_feasible(self.inst, xs)}
        self.assertEqual(constraints, {"balancing"})

    def test_invalid_mnl_sales_reports_validity(self):
        xs = SalesVector(x0=0.2, x=[0.4, 0.4])
        constraints = {violation.constraint for violation in check_bms_feasible(self.inst, xs)}
        self.assertIn("mnl_validity", constraints)

    def test_distribution_rejects_invalid_sales(self):
        with self.assertRaises(InfeasibleSalesVector):
            sales_to_distribution(self.inst, SalesVector(x0=0.2, x=[0.4, 0.4]))


class DistributionTests(SimpleTestCase):
    def test_distribution_must_be_nested(self):
        with self.assertRaises(InvalidInstance):
            AssortmentDistribution(entries=(((0,), 0.5), ((1,), 0.5)))

    def test_sales_of_a_single_assortment(self):
        inst = Instance(r=[1.0, 2.0, 3.0], v=[1.0, 2.0, 0.5], alpha=0.2)
        xs = SalesVector.from_weights([1.0, 2.0, 0.0])
        distribution = sales_to_distribution(inst, xs)
        self.assertEqual(distribution.assortments, [(0, 1)])

    @hypothesis_settings(max_examples=30, deadline=None)
    @given(instances())
    def test_distribution_reproduces_optimal_sales(self, inst):
        solution = solve_bms(inst)
        distribution = sales_to_distribution(inst, solution.xs)
        probabilities = [probability for _, probability in distribution.entries]
        self.assertAlmostEqual(sum(probabilities), 1.0, places=9)
        self.assertLessEqual(len(distribution.entries), inst.n + 1)
        np.testing.assert_allclose(
            distribution.purchase_probabilities(inst), solution.xs.x, rtol=1e-7, atol=1e-10
        )

    @hypothesis_settings(max_examples=60, deadline=None)
    @given(st.data())
    def test_distribution_reproduces_any_valid_sales(self, data):
        inst = data.draw(instances(max_n=6))
        fill = data.draw(st.lists(
            st.one_of(st.just(0.0), st.floats(min_value=0.0, max_value=1.0)),
            min_size=inst.n, max_size=inst.n,
        ))
        xs = SalesVector.from_weights(np.asarray(fill) * inst.v)
        distribution = sales_to_distribution(inst, xs)
        np.testing.assert_allclose(distribution.purchase_probabilities(inst), xs.x, rtol=0, atol=1e-9)
