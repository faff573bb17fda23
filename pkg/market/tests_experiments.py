import tempfile
from pathlib import Path
from unittest import mock

import pandas as pd
from django.test import SimpleTestCase, TestCase, tag

from .audit import record_experiment
from .choice import DynamicInstance
from .experiments import POLICIES, ExperimentConfig, run_experiment
from .generator import GenConfig, generate
from .models import ExperimentRun
from .policy import build_policy
from .simulation import simulate
from .upper_bound import solve_upper_bound_exact


def tiny_config(**overrides):
    values = dict(n=4, T=(60,), P0=(0.3,), gamma=(0.8,), alpha=(0.5,), replicates=20, seed=3)
    values.update(overrides)
    return ExperimentConfig(**values)


class ExperimentPipelineTests(SimpleTestCase):
    def test_single_cell_produces_one_row_and_summary(self):
        result = run_experiment(tiny_config())
        self.assertEqual(result.failures, [])
        table = result.revenue_table()
        self.assertEqual(len(table), 2)
        self.assertEqual(table.iloc[-1]["params"], "average")
        cell = result.cells[0]
        self.assertEqual(cell.method, "exact")
        self.assertGreaterEqual(cell.K, 1)
        for name in POLICIES:
            self.assertIn(name, cell.reports)

    def test_rerun_gives_identical_tables(self):
        config = tiny_config(alpha=(0.25, 0.75))
        first, second = run_experiment(config), run_experiment(config, threads=2)
        pd.testing.assert_frame_equal(first.revenue_table(), second.revenue_table())
        pd.testing.assert_frame_equal(first.ratio_table(), second.ratio_table())

    def test_failed_cells_are_isolated(self):
        config = tiny_config(alpha=(0.25, 0.5))
        with mock.patch("market.experiments.run_cell", side_effect=RuntimeError("boom")):
            result = run_experiment(config)
        self.assertEqual(len(result.failures), 2)
        self.assertIn("boom", result.failures[0].error)
        table = result.revenue_table()
        self.assertTrue(table["pol"].isna().all())

    def test_tables_written_as_csv(self):
        result = run_experiment(tiny_config())
        with tempfile.TemporaryDirectory() as directory:
            revenue_path, ratio_path = result.write_tables(Path(directory) / "out")
            revenue = pd.read_csv(revenue_path)
            ratios = pd.read_csv(ratio_path)
        self.assertEqual(list(revenue.columns[:3]), ["params", "T", "P0"])
        self.assertIn("pol_audit", ratios.columns)

    def test_default_grid_offers_many_products(self):
        config = ExperimentConfig()
        self.assertEqual(config.n, 40)
        self.assertEqual(config.T, (500, 1000, 2000))
        self.assertEqual(config.cell_count, 3 * 2 * 2 * 3)

    def test_paper_scale(self):
        config = ExperimentConfig.paper_scale(replicates=10)
        self.assertEqual(config.n, 40)
        self.assertEqual(config.replicates, 10)
        self.assertEqual(config.cell_count, 4 * 2 * 2 * 3)


@tag("slow")
class PolicyComparisonTests(SimpleTestCase):
    def test_calibrated_policy_beats_resolving_heuristics(self):
        config = ExperimentConfig(
            n=40, T=(2000,), P0=(0.3,), gamma=(0.6,), alpha=(0.25, 0.75), replicates=40, seed=11,
        )
        result = run_experiment(config, threads=2)
        self.assertEqual(result.failures, [])
        for cell in result.cells:
            with self.subTest(params=cell.params):
                self.assertGreater(cell.K, 5)
                pol = cell.reports["pol"].normalized_revenue
                self.assertGreaterEqual(pol, cell.reports["hr1"].normalized_revenue)
                self.assertGreaterEqual(pol, cell.reports["hr2"].normalized_revenue)

    def test_calibrated_policy_improves_with_scale(self):
        small = generate(GenConfig(n=6, T=200, P0=0.3, gamma=0.8, alpha=0.5, seed=5))
        revenues = []
        for factor in (1, 8):
            dyn = DynamicInstance(base=small.base, T=small.T * factor, c=small.c * factor)
            upper_bound = solve_upper_bound_exact(dyn)
            spec = build_policy(dyn, upper_bound=upper_bound, eps2=1e-3)
            report = simulate(dyn, spec, 200, seed=6, upper_bound=upper_bound.objective)
            revenues.append(report.normalized_revenue)
        self.assertGreaterEqual(revenues[1], revenues[0] - 0.01)


class ExperimentRecordTests(TestCase):
    def test_record_experiment_persists_cells(self):
        result = run_experiment(tiny_config())
        run = record_experiment(result, label="smoke")
        self.assertEqual(ExperimentRun.objects.count(), 1)
        self.assertEqual(run.label, "smoke")
        self.assertEqual(run.status, ExperimentRun.Status.COMPLETED)
        cell = run.cells.get()
        self.assertEqual(cell.T, 60)
        self.assertIsNotNone(cell.pol_revenue)
        self.assertEqual(cell.metadata["method"], "exact")

    def test_record_marks_failed_runs(self):
        with mock.patch("market.experiments.run_cell", side_effect=RuntimeError("boom")):
            result = run_experiment(tiny_config())
        run = record_experiment(result)
        self.assertEqual(run.status, ExperimentRun.Status.FAILED)
        self.assertEqual(run.failed_cells, 1)
