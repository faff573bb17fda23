import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings as hypothesis_settings, strategies as st

from .choice import Instance, check_bms_feasible
from .constrained import (
    AllAssortments,
    CategoryCover,
    ConstraintOracle,
    MaxCardinality,
    MinCardinality,
    OracleResult,
    family_from_json,
    oracle_bruteforce,
    oracle_unconstrained,
    solve_bms_constrained,
)
from .exceptions import MalformedInput, OracleFailure, SizeLimitExceeded
from .static import solve_bms, solve_bms_bruteforce
from .tests_choice import instances


class BrokenOracle(ConstraintOracle):
    def solve(self, allowed, r, w):
        raise RuntimeError("solver crashed")


class OutsideOracle(ConstraintOracle):
    def solve(self, allowed, r, w):
        return OracleResult(assortment=tuple(allowed) + (len(r),), revenue=1.0)


class FamilyParsingTests(SimpleTestCase):
    def test_parses_each_family(self):
        self.assertIsInstance(family_from_json("all"), AllAssortments)
        self.assertEqual(family_from_json({"max_card": 2}), MaxCardinality(2))
        self.assertEqual(family_from_json({"min_card": 1}), MinCardinality(1))
        family = family_from_json({"categories": [{"ids": [0, 1], "min_count": 1}]}, n=3)
        self.assertIsInstance(family, CategoryCover)
        self.assertTrue(family((1, 2)))
        self.assertFalse(family((2,)))

    def test_to_json_round_trips(self):
        for data in ("all", {"max_card": 3}, {"categories": [{"ids": [0, 2], "min_count": 1}]}):
            with self.subTest(data=data):
                self.assertEqual(family_from_json(data).to_json(), data)

    def test_rejects_unknown_family(self):
        with self.assertRaises(MalformedInput):
            family_from_json({"budget": 4})
        with self.assertRaises(MalformedInput):
            family_from_json({"max_card": -1})


class OracleTests(SimpleTestCase):
    def test_bruteforce_oracle_respects_predicate(self):
        r = np.array([5.0, 4.0, 1.0])
        w = np.array([1.0, 1.0, 1.0])
        result = oracle_bruteforce(MaxCardinality(1)).solve((0, 1, 2), r, w)
        self.assertEqual(result.assortment, (0,))
        self.assertAlmostEqual(result.revenue, 2.5)

    def test_bruteforce_oracle_reports_infeasible(self):
        result = oracle_bruteforce(MinCardinality(4)).solve((0, 1, 2), np.ones(3), np.ones(3))
        self.assertFalse(result.feasible)

    def test_bruteforce_oracle_size_guard(self):
        with self.assertRaises(SizeLimitExceeded):
            oracle_bruteforce(MaxCardinality(1), n_max=2).solve((0, 1, 2), np.ones(3), np.ones(3))


class ConstrainedSolverTests(SimpleTestCase):
    def setUp(self):
        self.inst = Instance(r=[9.0, 5.0, 4.0, 1.0], v=[0.1, 0.4, 0.5, 2.0], alpha=0.6)

    @hypothesis_settings(max_examples=25, deadline=None)
    @given(instances())
    def test_unconstrained_oracle_recovers_static_optimum(self, inst):
        solution = solve_bms_constrained(inst, oracle_unconstrained())
        self.assertTrue(solution.feasible)
        self.assertEqual(check_bms_feasible(inst, solution.xs), [])
        expected = solve_bms(inst).revenue
        self.assertAlmostEqual(solution.revenue, expected, delta=1e-9 * max(1.0, expected))

    @hypothesis_settings(max_examples=20, deadline=None)
    @given(instances(max_n=4))
    def test_cardinality_matches_support_enumeration(self, inst):
        family = MaxCardinality(2)
        solution = solve_bms_constrained(inst, family.oracle(), predicate=family)
        exhaustive = solve_bms_bruteforce(inst, predicate=family)
        self.assertLessEqual(len(solution.support), 2)
        self.assertAlmostEqual(solution.revenue, exhaustive.revenue, delta=1e-7 * max(1.0, exhaustive.revenue))

    @hypothesis_settings(max_examples=40, deadline=None)
    @given(st.data())
    def test_lower_bounded_families_match_support_enumeration(self, data):
        inst = data.draw(instances(max_n=5))
        if data.draw(st.booleans()):
            family = MinCardinality(data.draw(st.integers(min_value=1, max_value=inst.n)))
        else:
            ids = data.draw(st.lists(st.integers(min_value=0, max_value=inst.n - 1), min_size=1, unique=True))
            min_count = data.draw(st.integers(min_value=1, max_value=len(ids)))
            family = CategoryCover(categories=((frozenset(ids), min_count),))
        solution = solve_bms_constrained(inst, family.oracle(), predicate=family)
        exhaustive = solve_bms_bruteforce(inst, predicate=family)
        self.assertTrue(solution.feasible)
        self.assertTrue(family(solution.support))
        self.assertAlmostEqual(solution.revenue, exhaustive.revenue, delta=1e-7 * max(1.0, exhaustive.revenue))

    def test_threads_do_not_change_the_answer(self):
        family = MaxCardinality(2)
        serial = solve_bms_constrained(self.inst, family.oracle(), predicate=family, threads=1)
        parallel = solve_bms_constrained(self.inst, family.oracle(), predicate=family, threads=3)
        self.assertEqual(serial.support, parallel.support)
        self.assertEqual(serial.revenue, parallel.revenue)

    def test_empty_family_is_infeasible(self):
        family = MinCardinality(5)
        solution = solve_bms_constrained(self.inst, family.oracle(), predicate=family)
        self.assertFalse(solution.feasible)
        self.assertEqual(solution.support, ())
        self.assertEqual(solution.revenue, 0.0)

    def test_oracle_exceptions_are_wrapped(self):
        with self.assertRaises(OracleFailure) as caught:
            solve_bms_constrained(self.inst, BrokenOracle())
        self.assertIn("r_hat", caught.exception.context)

    def test_oracle_must_stay_inside_allowed_set(self):
        with self.assertRaises(OracleFailure):
            solve_bms_constrained(self.inst, OutsideOracle())
