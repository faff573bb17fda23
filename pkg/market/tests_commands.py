import json
import tempfile
from io import StringIO
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase

from .models import ExperimentRun
from .static import sensitivity_instance


class CommandTestMixin:
    def setUp(self):
        super().setUp()
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()
        super().tearDown()

    def write(self, name, data):
        path = self.tmp / name
        path.write_text(data if isinstance(data, str) else json.dumps(data), encoding="utf-8")
        return str(path)

    def call(self, *args, **kwargs):
        out = StringIO()
        call_command(*args, stdout=out, stderr=StringIO(), **kwargs)
        return json.loads(out.getvalue())

    def sensitivity_file(self):
        inst = sensitivity_instance(alpha=1.0)
        return self.write("sensitivity.json", {"r": inst.r.tolist(), "v": inst.v.tolist(), "alpha": 1.0})


class SolveStaticCommandTests(CommandTestMixin, SimpleTestCase):
    def test_alpha_override_reproduces_sensitivity_example(self):
        data = self.call("solve_static", self.sensitivity_file(), "--alpha", str(1 / 3))
        self.assertEqual(data["support"], [1, 2])
        self.assertAlmostEqual(data["revenue"], 0.8)

    def test_emit_distribution(self):
        data = self.call("solve_static", self.sensitivity_file(), "--emit-distribution")
        probabilities = [entry["probability"] for entry in data["distribution"]["entries"]]
        self.assertAlmostEqual(sum(probabilities), 1.0)

    def test_deterministic_and_brute(self):
        path = self.sensitivity_file()
        deterministic = self.call("solve_static", path, "--deterministic")
        brute = self.call("solve_static", path, "--brute")
        self.assertTrue(brute["agrees"])
        self.assertLessEqual(deterministic["revenue"], brute["revenue"] + 1e-12)

    def test_single_product(self):
        path = self.write("one.json", {"r": [2.0], "v": [1.0], "alpha": 0.5})
        self.assertEqual(self.call("solve_static", path)["support"], [0])

    def test_malformed_json_exits_with_two(self):
        path = self.write("broken.json", "{not json")
        with self.assertRaises(CommandError) as caught:
            self.call("solve_static", path)
        self.assertEqual(caught.exception.returncode, 2)

    def test_schema_errors_exit_with_two(self):
        path = self.write("bad.json", {"r": [1.0, 2.0], "v": [1.0], "alpha": 0.5})
        with self.assertRaises(CommandError) as caught:
            self.call("solve_static", path)
        self.assertEqual(caught.exception.returncode, 2)


class SolveConstrainedCommandTests(CommandTestMixin, SimpleTestCase):
    def test_cardinality_family_with_cross_check(self):
        path = self.write("inst.json", {"r": [9.0, 5.0, 4.0, 1.0], "v": [0.1, 0.4, 0.5, 2.0], "alpha": 0.6})
        data = self.call("solve_constrained", path, "--constraint", '{"max_card": 2}', "--brute")
        self.assertLessEqual(len(data["support"]), 2)
        self.assertTrue(data["agrees"])
        self.assertEqual(data["constraint"], {"max_card": 2})

    def test_infeasible_family_exits_with_three(self):
        path = self.write("inst.json", {"r": [1.0, 2.0], "v": [1.0, 1.0], "alpha": 0.5})
        with self.assertRaises(CommandError) as caught:
            self.call("solve_constrained", path, "--constraint", '{"min_card": 3}')
        self.assertEqual(caught.exception.returncode, 3)

    def test_unknown_family_exits_with_two(self):
        path = self.write("inst.json", {"r": [1.0, 2.0], "v": [1.0, 1.0], "alpha": 0.5})
        with self.assertRaises(CommandError) as caught:
            self.call("solve_constrained", path, "--constraint", '{"budget": 3}')
        self.assertEqual(caught.exception.returncode, 2)


class GapCommandTests(CommandTestMixin, SimpleTestCase):
    def test_ratio_reaches_lower_bound(self):
        data = self.call("gap", "--n", "6", "--alpha", "0.9")
        self.assertAlmostEqual(data["lower_bound"], 3.0)
        self.assertGreaterEqual(data["ratio"], 3.0 * (1 - 1e-9))

    def test_alpha_sweep(self):
        data = self.call("gap", "--n", "4", "--alpha", "0.5", "0.8", "1.0")
        self.assertEqual(len(data), 3)
        self.assertTrue(all(row["within_upper_bound"] for row in data))


class DynamicPipelineCommandTests(CommandTestMixin, SimpleTestCase):
    def generate(self):
        path = str(self.tmp / "dyn.json")
        call_command(
            "gen_instance", "--n", "5", "--T", "80", "--p0", "0.3", "--gamma", "0.8", "--alpha", "0.5",
            "--seed", "4", "-o", path, stdout=StringIO(),
        )
        return path

    def test_generate_bound_policy_simulate(self):
        instance = self.generate()
        dyn = json.loads(Path(instance).read_text())
        self.assertEqual(len(dyn["c"]), 5)

        bound = self.call("upper_bound", instance, "--exact")
        self.assertEqual(bound["method"], "exact")
        self.assertEqual(bound["violations"], [])

        policy_path = str(self.tmp / "policy.json")
        call_command("build_policy", instance, "--method", "exact", "-o", policy_path, stdout=StringIO())
        policy = json.loads(Path(policy_path).read_text())
        self.assertEqual(policy["kind"], "fixed-target")

        report = self.call("simulate", instance, "--policy", policy_path, "--replicates", "40", "--seed", "1")
        self.assertEqual(report["replicates"], 40)
        self.assertIn("balancing_audit", report)
        self.assertAlmostEqual(report["upper_bound"], bound["objective"])

    def test_fptas_statistics(self):
        data = self.call("upper_bound", self.generate(), "--eps", "0.2")
        self.assertEqual(data["method"], "fptas")
        self.assertIn("grid0", data["stats"])

    def test_heuristic_simulation(self):
        report = self.call("simulate", self.generate(), "--kind", "heuristic-2", "--replicates", "20")
        self.assertEqual(report["policy"], "heuristic-2")

    def test_generator_rejects_bad_p0(self):
        with self.assertRaises(CommandError) as caught:
            call_command("gen_instance", "--T", "80", "--p0", "1.5", "--gamma", "0.8", "--alpha", "0.5",
                         stdout=StringIO())
        self.assertEqual(caught.exception.returncode, 2)


class ExperimentCommandTests(CommandTestMixin, TestCase):
    def config(self):
        return self.write("grid.json", {
            "n": 4, "T": [60], "P0": [0.3], "gamma": [0.8], "alpha": [0.5], "replicates": 20, "seed": 2,
        })

    def test_writes_tables(self):
        out_dir = self.tmp / "results"
        summary = self.call("experiment", self.config(), "-o", str(out_dir))
        self.assertEqual(summary, {
            "cells": 1, "failed": 0,
            "revenue_csv": str(out_dir / "revenue.csv"), "ratio_csv": str(out_dir / "ratios.csv"),
        })
        self.assertTrue((out_dir / "revenue.csv").exists())

    def test_record_stores_run(self):
        summary = self.call("experiment", self.config(), "-o", str(self.tmp / "results"), "--record",
                            "--label", "ci")
        run = ExperimentRun.objects.get(pk=summary["run_id"])
        self.assertEqual(run.label, "ci")
        self.assertEqual(run.cells.count(), 1)

    def test_invalid_grid_exits_with_two(self):
        path = self.write("grid.json", {"P0": [1.5]})
        with self.assertRaises(CommandError) as caught:
            self.call("experiment", path, "-o", str(self.tmp / "results"))
        self.assertEqual(caught.exception.returncode, 2)
