"""
Monte-Carlo evaluation of dynamic policies.

Replicates advance together period by period as rows of numpy arrays. Every
replicate owns a Philox stream keyed by (seed, replicate index), drawn up
front, so results do not depend on chunking or on the thread count, and
different policies run on a shared seed see the same uniforms.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from django.conf import settings

from .choice import DynamicInstance, nested_chain_masses
from .exceptions import InvalidParameter, InventoryViolation
from .lp import SimplexSolver
from .policy import (
    PolicySpec,
    check_cumulative_balancing,
    heuristic_resolve,
    policy_step,
    resolve_schedule,
)

logger = logging.getLogger(__name__)

MODES = ("direct", "faithful")


@dataclass(frozen=True)
class SimulationReport:
    policy: str
    mode: str
    replicates: int
    seed: int
    mean_revenue: float
    revenue_se: float
    mean_sales: np.ndarray
    sales_variance: np.ndarray
    minmax_ratio: float | None
    ratio_se: float
    upper_bound: float | None
    normalized_revenue: float | None
    normalized_se: float | None
    upper_bound_audit: bool | None
    mean_resolves: float = 0.0
    trajectories: np.ndarray | None = None


@dataclass(frozen=True)
class BalancingAudit:
    passed: bool
    margin: float
    tol: float


def replicate_uniforms(seed: int, replicates, T: int) -> np.ndarray:
    """Uniforms of shape (len(replicates), T, 2), one Philox stream per replicate."""
    return np.stack([
        np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(int(rep),)))).random((T, 2))
        for rep in replicates
    ])


def _draw_direct(p: np.ndarray, u: np.ndarray) -> np.ndarray:
    n = p.shape[1]
    picked = (u[:, 0, None] >= np.cumsum(p, axis=1)).sum(axis=1)
    return np.where(picked < n, picked, -1)


def _draw_faithful(p: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Sample a nested assortment realizing p, then an MNL choice from it."""
    n = p.shape[1]
    x0 = 1.0 - p.sum(axis=1)
    order, masses = nested_chain_masses(x0, p, v)
    cumulative = np.cumsum(np.clip(masses, 0.0, None), axis=1)
    cumulative /= cumulative[:, -1:]
    size = np.minimum((u[:, 0, None] >= cumulative).sum(axis=1), n)
    offered = np.arange(n)[None, :] < size[:, None]
    weights = np.where(offered, v[order], 0.0)
    shares = np.cumsum(weights, axis=1) / (1.0 + weights.sum(axis=1))[:, None]
    position = (u[:, 1, None] >= shares).sum(axis=1)
    product = np.take_along_axis(order, np.minimum(position, n - 1)[:, None], axis=1)[:, 0]
    return np.where(position < size, product, -1)


def _run_chunk(dyn: DynamicInstance, spec: PolicySpec, replicates, seed: int, mode: str):
    uniforms = replicate_uniforms(seed, replicates, dyn.T)
    rows = len(replicates)
    remaining = np.tile(dyn.c, (rows, 1)).astype(np.int64)
    sales = np.zeros((rows, dyn.n), dtype=np.int64)
    revenue = np.zeros(rows)
    resolves = np.zeros(rows, dtype=np.int64)

    resolving = spec.kind.resolving
    if resolving:
        targets = np.tile(spec.targets, (rows, 1))
        history = np.zeros((rows, dyn.n))
        schedule = resolve_schedule(spec.kind, dyn.T)
        stocked_out = np.zeros(rows, dtype=bool)
        solver = SimplexSolver()

    for t in range(1, dyn.T + 1):
        if resolving:
            if t > 1:
                due = range(rows) if t in schedule else np.flatnonzero(stocked_out)
                for row in due:
                    targets[row] = heuristic_resolve(dyn, spec.support, history[row], sales[row], t, solver)
                    resolves[row] += 1
            history += targets
            check_cumulative_balancing(history, spec.support, dyn.alpha, t)
            p = policy_step(spec, remaining, sales, t, targets)
        else:
            p = policy_step(spec, remaining, sales, t)

        if mode == "direct":
            choice = _draw_direct(p, uniforms[:, t - 1])
        else:
            choice = _draw_faithful(p, uniforms[:, t - 1], dyn.v)
        buyers = np.flatnonzero(choice >= 0)
        products = choice[buyers]
        if np.any(remaining[buyers, products] <= 0):
            raise InventoryViolation(t=t, products=sorted(set(products[remaining[buyers, products] <= 0].tolist())))
        remaining[buyers, products] -= 1
        sales[buyers, products] += 1
        revenue[buyers] += dyn.r[products]
        if resolving:
            stocked_out[:] = False
            stocked_out[buyers] = remaining[buyers, products] == 0
    return revenue, sales, resolves


def _minmax(sales: np.ndarray):
    """Ratio of the smallest to the largest nonzero mean sales, with a delta-method SE."""
    means = sales.mean(axis=0)
    offered = np.flatnonzero(means > 0)
    if offered.size == 0:
        return None, 0.0
    low = offered[np.argmin(means[offered])]
    high = offered[np.argmax(means[offered])]
    ratio = float(means[low] / means[high])
    replicates = sales.shape[0]
    if replicates < 2 or low == high:
        return ratio, 0.0
    covariance = np.cov(sales[:, [low, high]].T.astype(float))
    gradient = np.array([1.0 / means[high], -means[low] / means[high] ** 2])
    return ratio, float(np.sqrt(max(gradient @ covariance @ gradient, 0.0) / replicates))


def simulate(
    dyn: DynamicInstance,
    spec: PolicySpec,
    replicates: int,
    seed: int,
    mode: str = "direct",
    threads: int | None = None,
    upper_bound: float | None = None,
    keep_trajectories: bool = False,
) -> SimulationReport:
    if int(replicates) != replicates or replicates < 1:
        raise InvalidParameter("replicates must be a positive integer.", replicates=replicates)
    if mode not in MODES:
        raise InvalidParameter("Unknown sampling mode.", mode=mode)
    if spec.n != dyn.n:
        raise InvalidParameter("Policy and instance disagree on the number of products.", policy=spec.n, n=dyn.n)
    threads = threads or getattr(settings, "FAIR_ASSORT_THREADS", 1)
    chunks = [chunk for chunk in np.array_split(np.arange(replicates), max(1, threads)) if chunk.size]
    if len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(pool.map(lambda chunk: _run_chunk(dyn, spec, chunk, seed, mode), chunks))
    else:
        parts = [_run_chunk(dyn, spec, chunks[0], seed, mode)]
    revenue = np.concatenate([part[0] for part in parts])
    sales = np.concatenate([part[1] for part in parts])
    resolves = np.concatenate([part[2] for part in parts])

    mean_revenue = float(revenue.mean())
    revenue_se = float(revenue.std(ddof=1) / np.sqrt(replicates)) if replicates > 1 else 0.0
    ratio, ratio_se = _minmax(sales)
    bound = spec.upper_bound if upper_bound is None else upper_bound
    normalized = normalized_se = audit = None
    if bound is not None and bound > 0:
        normalized = mean_revenue / bound
        normalized_se = revenue_se / bound
        audit = mean_revenue <= bound + 3.0 * revenue_se + 1e-9 * bound
        if not audit:
            logger.warning("Mean revenue %.6g exceeds the upper bound %.6g", mean_revenue, bound)
    logger.debug("Simulated %s over %d replicates (%s mode)", spec.kind.value, replicates, mode)
    return SimulationReport(
        policy=spec.kind.value,
        mode=mode,
        replicates=int(replicates),
        seed=int(seed),
        mean_revenue=mean_revenue,
        revenue_se=revenue_se,
        mean_sales=sales.mean(axis=0),
        sales_variance=sales.var(axis=0, ddof=1) if replicates > 1 else np.zeros(dyn.n),
        minmax_ratio=ratio,
        ratio_se=ratio_se,
        upper_bound=bound,
        normalized_revenue=normalized,
        normalized_se=normalized_se,
        upper_bound_audit=audit,
        mean_resolves=float(resolves.mean()),
        trajectories=sales if keep_trajectories else None,
    )


def audit_balancing(report: SimulationReport, alpha: float, tol: float | None = None) -> BalancingAudit:
    if tol is None:
        tol = 3.0 * report.ratio_se
    if report.minmax_ratio is None:
        return BalancingAudit(passed=True, margin=float("inf"), tol=tol)
    margin = report.minmax_ratio - (alpha - tol)
    return BalancingAudit(passed=margin >= -1e-12, margin=margin, tol=tol)
