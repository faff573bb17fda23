import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings as hypothesis_settings, strategies as st
from scipy.optimize import linprog

from .exceptions import DimensionMismatch
from .lp import LinearProgram, LPStatus, Sense, SimplexSolver, lp_solve


class SimplexTests(SimpleTestCase):
    def test_textbook_maximum(self):
        lp = LinearProgram.from_rows(
            [3.0, 5.0],
            [([1.0, 0.0], Sense.LE, 4.0), ([0.0, 2.0], Sense.LE, 12.0), ([3.0, 2.0], Sense.LE, 18.0)],
        )
        result = lp_solve(lp)
        self.assertIs(result.status, LPStatus.OPTIMAL)
        self.assertAlmostEqual(result.objective, 36.0)
        np.testing.assert_allclose(result.x, [2.0, 6.0], atol=1e-9)
        self.assertLess(lp.residual(result.x), 1e-9)

    def test_infeasible_program(self):
        lp = LinearProgram.from_rows([1.0], [([1.0], Sense.GE, 2.0), ([1.0], Sense.LE, 1.0)])
        self.assertIs(lp_solve(lp).status, LPStatus.INFEASIBLE)

    def test_unbounded_program(self):
        lp = LinearProgram.from_rows([1.0, 0.0], [([1.0, -1.0], Sense.LE, 1.0)])
        self.assertIs(lp_solve(lp).status, LPStatus.UNBOUNDED)

    def test_redundant_equalities(self):
        lp = LinearProgram.from_rows(
            [1.0, 0.0], [([1.0, 1.0], Sense.EQ, 1.0), ([2.0, 2.0], Sense.EQ, 2.0)],
        )
        result = lp_solve(lp)
        self.assertIs(result.status, LPStatus.OPTIMAL)
        self.assertAlmostEqual(result.objective, 1.0)

    def test_free_variable_and_upper_bounds(self):
        lp = LinearProgram.from_rows(
            [-1.0, 1.0],
            [([1.0, 0.0], Sense.GE, -3.0)],
            lower=np.array([-np.inf, 0.0]),
            upper=np.array([np.inf, 2.0]),
        )
        result = lp_solve(lp)
        self.assertIs(result.status, LPStatus.OPTIMAL)
        np.testing.assert_allclose(result.x, [-3.0, 2.0], atol=1e-9)

    def test_crossed_bounds_are_infeasible(self):
        lp = LinearProgram.from_rows([1.0], [], lower=np.array([2.0]), upper=np.array([1.0]))
        self.assertIs(lp_solve(lp).status, LPStatus.INFEASIBLE)

    def test_shape_mismatch(self):
        with self.assertRaises(DimensionMismatch):
            LinearProgram(
                c=np.ones(2), A=np.ones((1, 3)), senses=(Sense.LE,), b=np.ones(1),
                lower=np.zeros(2), upper=np.full(2, np.inf),
            )

    def test_iteration_cap_reports_numerical_failure(self):
        lp = LinearProgram.from_rows(
            [3.0, 5.0],
            [([1.0, 0.0], Sense.LE, 4.0), ([0.0, 2.0], Sense.LE, 12.0), ([3.0, 2.0], Sense.LE, 18.0)],
        )
        self.assertIs(SimplexSolver(max_iterations=1).solve(lp).status, LPStatus.NUMERICAL_FAILURE)

    @hypothesis_settings(max_examples=40, deadline=None)
    @given(st.data())
    def test_matches_scipy_on_bounded_programs(self, data):
        m = data.draw(st.integers(min_value=1, max_value=5))
        n = data.draw(st.integers(min_value=1, max_value=5))
        entries = st.floats(min_value=0.1, max_value=5.0)
        A = np.array(data.draw(st.lists(entries, min_size=m * n, max_size=m * n))).reshape(m, n)
        b = np.array(data.draw(st.lists(entries, min_size=m, max_size=m)))
        c = np.array(data.draw(st.lists(st.floats(min_value=-2.0, max_value=5.0), min_size=n, max_size=n)))
        lp = LinearProgram.from_rows(c, [(row, Sense.LE, rhs) for row, rhs in zip(A, b)])
        ours = lp_solve(lp)
        reference = linprog(-c, A_ub=A, b_ub=b, bounds=[(0, None)] * n, method="highs")
        self.assertIs(ours.status, LPStatus.OPTIMAL)
        self.assertEqual(reference.status, 0)
        self.assertAlmostEqual(ours.objective, -reference.fun, delta=1e-7 * max(1.0, abs(reference.fun)))
        self.assertLess(lp.residual(ours.x), 1e-8)
