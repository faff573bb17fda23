import numpy as np
from django.test import SimpleTestCase

from .exceptions import InvalidParameter
from .policy import PolicyKind, build_heuristic_spec, build_policy
from .simulation import audit_balancing, replicate_uniforms, simulate
from .tests_upper_bound import small_instance
from .upper_bound import solve_upper_bound_exact


class RandomStreamTests(SimpleTestCase):
    def test_replicate_streams_are_independent_of_batching(self):
        both = replicate_uniforms(11, [0, 1], 25)
        alone = replicate_uniforms(11, [1], 25)
        self.assertEqual(both.shape, (2, 25, 2))
        np.testing.assert_array_equal(both[1], alone[0])


class SimulationTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.dyn = small_instance(1, alpha=0.5, T=120)
        cls.upper_bound = solve_upper_bound_exact(cls.dyn)
        cls.spec = build_policy(cls.dyn, upper_bound=cls.upper_bound, eps2=1e-3)

    def test_same_seed_same_report(self):
        first = simulate(self.dyn, self.spec, 60, seed=5, threads=1)
        second = simulate(self.dyn, self.spec, 60, seed=5, threads=3)
        self.assertEqual(first.mean_revenue, second.mean_revenue)
        np.testing.assert_array_equal(first.mean_sales, second.mean_sales)

    def test_sales_never_exceed_inventory(self):
        report = simulate(self.dyn, self.spec, 80, seed=2, keep_trajectories=True)
        self.assertEqual(report.trajectories.shape, (80, self.dyn.n))
        self.assertTrue(np.all(report.trajectories <= self.dyn.c))

    def test_revenue_stays_under_upper_bound(self):
        report = simulate(self.dyn, self.spec, 200, seed=3)
        self.assertTrue(report.upper_bound_audit)
        self.assertLessEqual(report.normalized_revenue, 1.0 + 3 * report.normalized_se + 1e-9)

    def test_sampling_modes_agree_in_mean(self):
        direct = simulate(self.dyn, self.spec, 300, seed=8, mode="direct")
        faithful = simulate(self.dyn, self.spec, 300, seed=8, mode="faithful")
        spread = np.hypot(direct.revenue_se, faithful.revenue_se)
        self.assertLessEqual(abs(direct.mean_revenue - faithful.mean_revenue), 5 * spread + 1e-9)

    def test_unknown_mode(self):
        with self.assertRaises(InvalidParameter):
            simulate(self.dyn, self.spec, 10, seed=0, mode="exact")

    def test_resolving_heuristics(self):
        for kind in (PolicyKind.HEURISTIC_1, PolicyKind.HEURISTIC_2):
            with self.subTest(kind=kind):
                spec = build_heuristic_spec(self.dyn, kind, self.upper_bound)
                report = simulate(self.dyn, spec, 30, seed=4, keep_trajectories=True)
                self.assertEqual(report.policy, kind.value)
                self.assertTrue(np.all(report.trajectories <= self.dyn.c))
                if kind is PolicyKind.HEURISTIC_1:
                    self.assertGreaterEqual(report.mean_resolves, 10)

    def test_balancing_audit_reports_margin(self):
        report = simulate(self.dyn, self.spec, 100, seed=9)
        audit = audit_balancing(report, self.dyn.alpha)
        self.assertAlmostEqual(audit.margin, report.minmax_ratio - (self.dyn.alpha - audit.tol))


class SalesFidelityTests(SimpleTestCase):
    def test_mean_sales_match_capped_binomial_expectation(self):
        dyn = small_instance(2, alpha=0.5, n=4, T=50)
        spec = build_policy(dyn, upper_bound=solve_upper_bound_exact(dyn), eps2=1e-3)
        replicates = 2000
        report = simulate(dyn, spec, replicates, seed=17)
        se = np.sqrt(report.sales_variance / replicates)
        np.testing.assert_array_less(np.abs(report.mean_sales - spec.expected_sales), 3 * se + 1e-9)


class CappedPolicySimulationTests(SimpleTestCase):
    def test_offered_sales_stop_at_cap(self):
        dyn = small_instance(3, alpha=1.0, T=150)
        spec = build_policy(dyn)
        report = simulate(dyn, spec, 50, seed=1, keep_trajectories=True)
        support = list(spec.support)
        self.assertTrue(np.all(report.trajectories[:, support] <= spec.cap))
        self.assertEqual(report.policy, PolicyKind.CAPPED.value)
