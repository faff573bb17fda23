import logging

from market.audit import record_experiment
from market.exceptions import ExperimentCellFailure
from market.experiments import run_experiment
from market.serializers import ExperimentConfigSerializer
from market.simulation import MODES

from ._base import MarketCommand, load_json, validated

logger = logging.getLogger(__name__)


class Command(MarketCommand):
    help = "Run the experiment grid and write the revenue and balance tables as CSV."

    def add_arguments(self, parser):
        parser.add_argument("config", nargs="?", help="Grid JSON ({n, T, P0, gamma, alpha, replicates, seed, ...}).")
        parser.add_argument("-o", "--output-dir", default="results", help="Directory for revenue.csv and ratios.csv.")
        parser.add_argument("--paper-scale", action="store_true", help="n=40, T up to 16000, 400 replicates.")
        parser.add_argument("--threads", type=int, help="Cells run in parallel (falls back to FAIR_ASSORT_THREADS).")
        parser.add_argument("--replicates", type=int)
        parser.add_argument("--seed", type=int)
        parser.add_argument("--eps", type=float)
        parser.add_argument("--mode", choices=MODES)
        parser.add_argument("--label", help="Run label stored with --record.")
        parser.add_argument("--record", action="store_true", help="Persist the run in the result store.")
        parser.add_argument("--quiet", action="store_true", help="Suppress the summary on stdout.")

    def run(self, *args, **options):
        data = load_json(options["config"]) if options["config"] else {}
        overrides = {name: options[name] for name in ("replicates", "seed", "eps", "mode", "label")}
        config = validated(ExperimentConfigSerializer, data).to_config(
            paper_scale=options["paper_scale"], **overrides
        )
        if options["paper_scale"]:
            logger.warning("Full-scale grid: %d cells at n=%d, T up to %d; expect a long run.",
                           config.cell_count, config.n, max(config.T))
        result = run_experiment(config, threads=options["threads"])
        revenue_path, ratio_path = result.write_tables(options["output_dir"])
        summary = {
            "cells": len(result.cells),
            "failed": len(result.failures),
            "revenue_csv": str(revenue_path),
            "ratio_csv": str(ratio_path),
        }
        if options["record"]:
            summary["run_id"] = record_experiment(result).pk
        self.emit(summary, {"quiet": options["quiet"]})
        if result.failures:
            raise ExperimentCellFailure(
                f"{len(result.failures)} of {len(result.cells)} cells failed.",
                cells=[cell.params for cell in result.failures],
            )
