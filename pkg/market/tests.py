from django.core.exceptions import ValidationError
from django.test import SimpleTestCase, TestCase
from rest_framework import serializers

from .choice import DynamicInstance
from .constrained import MaxCardinality
from .exceptions import InfeasibleConstraintFamily, get_exception_class
from .experiments import ExperimentConfig
from .models import ExperimentCell, ExperimentRun
from .policy import PolicyKind
from .serializers import (
    ConstraintFamilyField,
    DynamicInstanceSerializer,
    ExperimentConfigSerializer,
    GenConfigSerializer,
    InstanceSerializer,
    PolicySpecSerializer,
)


class ExperimentCellValidationTests(TestCase):
    def setUp(self):
        self.run = ExperimentRun.objects.create(label="desk", seed=7)

    def test_cell_rejects_p0_outside_unit_interval(self):
        cell = ExperimentCell(run=self.run, T=200, P0=1.2, gamma=0.8, alpha=0.5)
        with self.assertRaises(ValidationError):
            cell.clean()

    def test_cell_rejects_zero_alpha(self):
        cell = ExperimentCell(run=self.run, T=200, P0=0.1, gamma=0.8, alpha=0.0)
        with self.assertRaises(ValidationError):
            cell.clean()

    def test_cells_follow_grid_order(self):
        ExperimentCell.objects.create(run=self.run, T=400, P0=0.1, gamma=0.6, alpha=0.5)
        ExperimentCell.objects.create(run=self.run, T=200, P0=0.3, gamma=0.6, alpha=0.5)
        self.assertEqual([cell.T for cell in self.run.cells.all()], [200, 400])


class InstanceSerializerValidationTests(SimpleTestCase):
    def test_instance_serializer_requires_matching_lengths(self):
        serializer = InstanceSerializer(data={"r": [1.0, 2.0], "v": [1.0], "alpha": 0.5})
        self.assertFalse(serializer.is_valid())
        self.assertIn("v", serializer.errors)

    def test_instance_serializer_rejects_nonpositive_revenue(self):
        serializer = InstanceSerializer(data={"r": [0.0, 2.0], "v": [1.0, 1.0], "alpha": 0.5})
        self.assertFalse(serializer.is_valid())
        self.assertIn("r", serializer.errors)

    def test_instance_serializer_rejects_alpha_above_one(self):
        serializer = InstanceSerializer(data={"r": [1.0], "v": [1.0], "alpha": 1.5})
        self.assertFalse(serializer.is_valid())
        self.assertIn("alpha", serializer.errors)

    def test_alpha_override_builds_instance(self):
        serializer = InstanceSerializer(data={"r": [1.0, 2.0], "v": [1.0, 0.5], "alpha": 0.5})
        self.assertTrue(serializer.is_valid(), serializer.errors)
        inst = serializer.to_instance(alpha=0.25)
        self.assertEqual(inst.alpha, 0.25)
        self.assertEqual(inst.n, 2)

    def test_dynamic_instance_round_trip(self):
        data = {"r": [3.0, 1.0], "v": [0.4, 0.9], "alpha": 0.5, "T": 100, "c": [20, 35]}
        serializer = DynamicInstanceSerializer(data=data)
        self.assertTrue(serializer.is_valid(), serializer.errors)
        dyn = serializer.to_instance()
        self.assertIsInstance(dyn, DynamicInstance)
        rendered = DynamicInstanceSerializer(dyn).data
        self.assertEqual(rendered["c"], [20, 35])
        self.assertEqual(rendered["T"], 100)

    def test_dynamic_instance_requires_inventory_per_product(self):
        serializer = DynamicInstanceSerializer(
            data={"r": [3.0, 1.0], "v": [0.4, 0.9], "alpha": 0.5, "T": 100, "c": [20]}
        )
        self.assertFalse(serializer.is_valid())
        self.assertIn("c", serializer.errors)


class ConfigSerializerTests(SimpleTestCase):
    def test_gen_config_collects_field_errors(self):
        serializer = GenConfigSerializer(data={"T": 100, "P0": 1.0, "gamma": -1, "alpha": 0.5})
        self.assertFalse(serializer.is_valid())
        self.assertIn("P0", serializer.errors)
        self.assertIn("gamma", serializer.errors)

    def test_experiment_config_defaults_and_overrides(self):
        serializer = ExperimentConfigSerializer(data={"T": [100], "alpha": [0.5]})
        self.assertTrue(serializer.is_valid(), serializer.errors)
        config = serializer.to_config(replicates=30, seed=None)
        self.assertEqual(config.T, (100,))
        self.assertEqual(config.replicates, 30)
        self.assertEqual(config.seed, ExperimentConfig().seed)
        self.assertEqual(config.cell_count, 1 * 2 * 2 * 1)

    def test_experiment_config_paper_scale(self):
        serializer = ExperimentConfigSerializer(data={})
        self.assertTrue(serializer.is_valid(), serializer.errors)
        config = serializer.to_config(paper_scale=True)
        self.assertEqual(config.n, 40)
        self.assertEqual(config.T, (2000, 4000, 8000, 16000))

    def test_experiment_config_rejects_bad_alpha(self):
        serializer = ExperimentConfigSerializer(data={"alpha": [0.5, 1.5]})
        self.assertFalse(serializer.is_valid())
        self.assertIn("alpha", serializer.errors)


class ConstraintFamilyFieldTests(SimpleTestCase):
    def test_parses_cardinality_family(self):
        family = ConstraintFamilyField(n=4).run_validation({"max_card": 2})
        self.assertEqual(family, MaxCardinality(2))
        self.assertTrue(family((0, 3)))
        self.assertFalse(family((0, 1, 3)))

    def test_rejects_unknown_category_product(self):
        field = ConstraintFamilyField(n=3)
        with self.assertRaises(serializers.ValidationError):
            field.run_validation({"categories": [{"ids": [0, 5], "min_count": 1}]})


class PolicySpecSerializerTests(SimpleTestCase):
    def test_policy_spec_round_trip_keeps_iterations(self):
        data = {
            "kind": "fixed-target",
            "targets": [0.1, 0.0, 0.2],
            "support": [0, 2],
            "upper_bound": 12.5,
            "g_min": 3.0,
            "expected_sales": [3.0, 0.0, 4.0],
            "eps2": 0.001,
            "bisection_iterations": {"2": 11},
        }
        serializer = PolicySpecSerializer(data=data)
        self.assertTrue(serializer.is_valid(), serializer.errors)
        spec = serializer.to_spec()
        self.assertIs(spec.kind, PolicyKind.FIXED_TARGET)
        self.assertEqual(spec.support, (0, 2))
        self.assertEqual(spec.bisection_iterations, {2: 11})
        rendered = PolicySpecSerializer(spec).data
        self.assertEqual(rendered["kind"], "fixed-target")
        self.assertEqual(rendered["bisection_iterations"], {"2": 11})

    def test_capped_policy_needs_cap(self):
        serializer = PolicySpecSerializer(
            data={"kind": "capped", "targets": [0.1], "support": [0], "upper_bound": 1.0}
        )
        self.assertFalse(serializer.is_valid())
        self.assertIn("cap", serializer.errors)


class ExceptionRegistryTests(SimpleTestCase):
    def test_codes_map_to_classes_and_exit_codes(self):
        self.assertIs(get_exception_class("infeasible_family"), InfeasibleConstraintFamily)
        self.assertEqual(InfeasibleConstraintFamily.exit_code, 3)
        self.assertEqual(get_exception_class("bound_violation").exit_code, 4)
        self.assertEqual(get_exception_class("malformed_input").exit_code, 2)
        self.assertIsNone(get_exception_class("no_such_code"))

    def test_context_is_rendered(self):
        error = InfeasibleConstraintFamily("No feasible assortment.", family={"min_card": 3})
        self.assertEqual(str(error), "No feasible assortment. (family={'min_card': 3})")
        self.assertEqual(error.context, {"family": {"min_card": 3}})
