"""
Experiment grid: one generated instance per (T, P0, gamma), replayed for
every alpha, with the calibrated policy and both resolving heuristics
simulated on shared random streams. Results come back as pandas tables.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
from django.conf import settings

from .exceptions import InvalidParameter, MarketError
from .generator import GenConfig, generate
from .policy import PolicyKind, build_heuristic_spec, build_policy
from .simulation import SimulationReport, audit_balancing, simulate
from .upper_bound import ALPHA_ONE, solve_upper_bound

logger = logging.getLogger(__name__)

POLICIES = ("pol", "hr1", "hr2")


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 40
    T: tuple[int, ...] = (500, 1000, 2000)
    P0: tuple[float, ...] = (0.1, 0.3)
    gamma: tuple[float, ...] = (0.6, 0.8)
    alpha: tuple[float, ...] = (0.25, 0.5, 0.75)
    replicates: int = 200
    seed: int = 0
    eps: float = 0.05
    eps2: float = 1e-3
    mode: str = "direct"
    label: str = ""

    def __post_init__(self) -> None:
        for name in ("T", "P0", "gamma", "alpha"):
            values = tuple(getattr(self, name))
            if not values:
                raise InvalidParameter(f"{name} needs at least one value.")
            object.__setattr__(self, name, values)
        if self.replicates < 1:
            raise InvalidParameter("replicates must be positive.", replicates=self.replicates)

    @classmethod
    def paper_scale(cls, **overrides) -> "ExperimentConfig":
        values = dict(n=40, T=(2000, 4000, 8000, 16000), replicates=400)
        values.update(overrides)
        return cls(**values)

    @property
    def cell_count(self) -> int:
        return len(self.T) * len(self.P0) * len(self.gamma) * len(self.alpha)


@dataclass
class CellResult:
    T: int
    P0: float
    gamma: float
    alpha: float
    c_bar: int | None = None
    K: int | None = None
    upper_bound: float | None = None
    method: str | None = None
    reports: dict[str, SimulationReport] = field(default_factory=dict)
    audits: dict[str, bool] = field(default_factory=dict)
    error: str | None = None

    @property
    def params(self) -> str:
        return f"({self.T},{self.P0:g},{self.gamma:g},{self.alpha:g})"

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    cells: list[CellResult]

    @property
    def failures(self) -> list[CellResult]:
        return [cell for cell in self.cells if cell.failed]

    def revenue_table(self) -> pd.DataFrame:
        rows = []
        for cell in self.cells:
            row = {
                "params": cell.params, "T": cell.T, "P0": cell.P0, "gamma": cell.gamma, "alpha": cell.alpha,
                "c_bar": cell.c_bar, "K": cell.K, "upper_bound": cell.upper_bound,
            }
            for name in POLICIES:
                report = cell.reports.get(name)
                row[name] = report.normalized_revenue if report else np.nan
            row["error"] = cell.error or ""
            rows.append(row)
        return _with_summary(pd.DataFrame(rows))

    def ratio_table(self) -> pd.DataFrame:
        rows = []
        for cell in self.cells:
            row = {"params": cell.params, "T": cell.T, "P0": cell.P0, "gamma": cell.gamma, "alpha": cell.alpha}
            for name in POLICIES:
                report = cell.reports.get(name)
                row[name] = report.minmax_ratio if report else np.nan
            for name in POLICIES:
                row[f"{name}_audit"] = cell.audits.get(name)
            rows.append(row)
        return _with_summary(pd.DataFrame(rows))

    def write_tables(self, directory) -> tuple[Path, Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        revenue_path = directory / "revenue.csv"
        ratio_path = directory / "ratios.csv"
        self.revenue_table().to_csv(revenue_path, index=False)
        self.ratio_table().to_csv(ratio_path, index=False)
        return revenue_path, ratio_path


def _with_summary(table: pd.DataFrame) -> pd.DataFrame:
    """Append a row of column averages (failed cells are skipped)."""
    numeric = [name for name in POLICIES if name in table]
    summary = {column: np.nan for column in table.columns}
    summary.update(table[numeric].astype(float).mean(skipna=True).to_dict())
    summary["params"] = "average"
    return pd.concat([table, pd.DataFrame([summary])], ignore_index=True)


def _derived_seed(*key) -> int:
    return int(np.random.SeedSequence([int(k) for k in key]).generate_state(1)[0])


def run_cell(dyn, P0: float, gamma: float, alpha: float, config: ExperimentConfig, seed: int) -> CellResult:
    dyn = dyn.with_alpha(alpha)
    cell = CellResult(T=dyn.T, P0=P0, gamma=gamma, alpha=alpha)
    upper_bound = solve_upper_bound(dyn, eps=config.eps)
    support = upper_bound.support
    cell.upper_bound = upper_bound.objective
    cell.method = upper_bound.method
    cell.K = len(support)
    cell.c_bar = int(dyn.c[list(support)].min()) if support else None

    eps2 = None if abs(alpha - 1.0) <= ALPHA_ONE else min(config.eps2, 1.0 - alpha)
    specs = {
        "pol": build_policy(dyn, eps=config.eps, upper_bound=upper_bound, eps2=eps2),
        "hr1": build_heuristic_spec(dyn, PolicyKind.HEURISTIC_1, upper_bound),
        "hr2": build_heuristic_spec(dyn, PolicyKind.HEURISTIC_2, upper_bound),
    }
    for name, spec in specs.items():
        report = simulate(dyn, spec, config.replicates, seed, mode=config.mode, threads=1,
                          upper_bound=upper_bound.objective)
        cell.reports[name] = report
        cell.audits[name] = audit_balancing(report, alpha).passed and bool(report.upper_bound_audit)
    return cell


def run_experiment(config: ExperimentConfig, threads: int | None = None) -> ExperimentResult:
    threads = threads or getattr(settings, "FAIR_ASSORT_THREADS", 1)
    instances = {}
    jobs = []
    for ti, T in enumerate(config.T):
        for pi, P0 in enumerate(config.P0):
            for gi, gamma in enumerate(config.gamma):
                try:
                    instances[(T, P0, gamma)] = generate(GenConfig(
                        n=config.n, T=T, P0=P0, gamma=gamma, alpha=config.alpha[0],
                        seed=_derived_seed(config.seed, ti, pi, gi),
                    ))
                except MarketError as exc:
                    instances[(T, P0, gamma)] = exc
                for ai, alpha in enumerate(config.alpha):
                    jobs.append((T, P0, gamma, alpha, _derived_seed(config.seed, ti, pi, gi, ai + 1)))

    def run(job) -> CellResult:
        T, P0, gamma, alpha, seed = job
        try:
            dyn = instances[(T, P0, gamma)]
            if isinstance(dyn, Exception):
                raise dyn
            return run_cell(dyn, P0, gamma, alpha, config, seed)
        except Exception as exc:
            logger.warning("Cell (%s, %s, %s, %s) failed: %s", T, P0, gamma, alpha, exc)
            return CellResult(T=T, P0=P0, gamma=gamma, alpha=alpha, error=f"{type(exc).__name__}: {exc}")

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            cells = list(pool.map(run, jobs))
    else:
        cells = [run(job) for job in jobs]
    logger.debug("Experiment finished: %d cells, %d failed", len(cells), sum(cell.failed for cell in cells))
    return ExperimentResult(config=config, cells=cells)
