"""
Exact solvers for the static balanced market-share problem.

``solve_bms`` enumerates revenue/weight threshold pairs: an optimal solution
offers every product whose revenue clears the optimal revenue and whose
preference weight clears a threshold, with weights capped at
``threshold / alpha``. ``solve_bms_deterministic`` is the single-assortment
variant. The remaining helpers build the instances used to study the value of
randomization and give an exhaustive LP oracle for cross-checks.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np
from django.conf import settings

from .choice import Instance, SalesVector, revenue_ordered_optimum
from .exceptions import InvalidParameter, SizeLimitExceeded
from .lp import LinearProgram, Sense, SimplexSolver

logger = logging.getLogger(__name__)

REVENUE_TIE = 1e-12


def _revenue_slack(revenue: float) -> float:
    return 1e-9 * max(1.0, abs(revenue))


@dataclass(frozen=True)
class StaticSolution:
    xs: SalesVector
    revenue: float
    threshold_r: float
    threshold_v: float
    support: tuple[int, ...]

    @property
    def weights(self) -> np.ndarray:
        return self.xs.x / self.xs.x0


@dataclass(frozen=True)
class DeterministicSolution:
    assortment: tuple[int, ...]
    revenue: float


@dataclass(frozen=True)
class SupportSolution:
    """Best sales vector found by support enumeration."""

    xs: SalesVector
    revenue: float
    support: tuple[int, ...]


@dataclass(frozen=True)
class RandomizationGap:
    revenue: float
    revenue_det: float
    ratio: float
    lower_bound: float
    upper_bound: float

    @property
    def within_upper_bound(self) -> bool:
        return 1.0 - 1e-9 <= self.ratio <= self.upper_bound * (1 + 1e-9)

    @property
    def reaches_lower_bound(self) -> bool:
        return self.ratio >= self.lower_bound * (1 - 1e-9)


def capped_weights(inst: Instance, r_hat: float, v_hat: float) -> np.ndarray:
    """w_i = min(v_i, v_hat / alpha) for products clearing both thresholds, else 0."""
    mask = (inst.r >= r_hat) & (inst.v >= v_hat)
    return np.where(mask, np.minimum(inst.v, v_hat / inst.alpha), 0.0)


def better_candidate(candidate, incumbent) -> bool:
    """Higher revenue wins; ties go to the smaller, then lexicographically smaller, support."""
    if incumbent is None:
        return True
    revenue, support = candidate
    best_revenue, best_support = incumbent
    if revenue > best_revenue + REVENUE_TIE * max(1.0, best_revenue):
        return True
    if revenue < best_revenue - REVENUE_TIE * max(1.0, best_revenue):
        return False
    return (len(support), support) < (len(best_support), best_support)


def solve_bms(inst: Instance) -> StaticSolution:
    r, v = inst.r, inst.v
    r_hats = np.unique(r)
    best = None
    best_v_hat = None
    for v_hat in np.unique(v):
        capped = np.where(v >= v_hat, np.minimum(v, v_hat / inst.alpha), 0.0)
        weights = np.where(r[None, :] >= r_hats[:, None], capped[None, :], 0.0)
        revenues = weights @ r / (1.0 + weights.sum(axis=1))
        for row in np.flatnonzero(weights.sum(axis=1) > 0):
            candidate = (float(revenues[row]), tuple(np.flatnonzero(weights[row]).tolist()))
            if better_candidate(candidate, best):
                best, best_v_hat = candidate, float(v_hat)
    logger.debug("solve_bms scanned %d x %d threshold pairs", r_hats.size, np.unique(v).size)

    revenue = best[0]
    # Rebuild the support in its canonical threshold shape.
    threshold_r = float(r[r >= revenue - _revenue_slack(revenue)].min())
    w = capped_weights(inst, threshold_r, best_v_hat)
    xs = SalesVector.from_weights(w)
    return StaticSolution(
        xs=xs,
        revenue=xs.revenue(inst),
        threshold_r=threshold_r,
        threshold_v=best_v_hat,
        support=xs.support,
    )


def reduced_revenue(inst: Instance, v_hat: float) -> float:
    """Revenue of offering every product with v_i >= v_hat under capped weights."""
    w = np.where(inst.v >= v_hat, np.minimum(inst.v, v_hat / inst.alpha), 0.0)
    return float(w @ inst.r / (1.0 + w.sum()))


def solve_bms_deterministic(inst: Instance) -> DeterministicSolution:
    best = None
    for v_low in np.unique(inst.v):
        allowed = np.flatnonzero((inst.v >= v_low) & (inst.v <= v_low / inst.alpha * (1 + 1e-12)))
        assortment, revenue = revenue_ordered_optimum(inst.r, inst.v, allowed)
        if assortment and better_candidate((revenue, assortment), best):
            best = (revenue, assortment)
    if best is None:
        return DeterministicSolution(assortment=(), revenue=0.0)
    return DeterministicSolution(assortment=best[1], revenue=best[0])


def make_gap_instance(n: int, alpha: float) -> Instance:
    """Instance on which randomization beats any single assortment by the proven factor."""
    if int(n) != n or n < 1:
        raise InvalidParameter("n must be a positive integer.", n=n)
    if not 0.0 < alpha <= 1.0:
        raise InvalidParameter("alpha must lie in (0, 1].", alpha=alpha)
    n = int(n)
    i = np.arange(1, n + 1)
    if n == 1:
        # (1 - 1/n)^i vanishes for a single product.
        v = np.array([1.0 - 2.0 / math.e])
    elif alpha > 1.0 - 1.0 / n:
        eps = (1.0 - 2.0 / math.e) / n
        v = (1.0 - 1.0 / n) ** i * eps
    else:
        eps = (math.sqrt(2.0 - 2.0 / math.e) - 1.0) / n
        v = (alpha * (1.0 - eps)) ** i * eps
    return Instance(r=1.0 / v, v=v, alpha=alpha)


def sensitivity_instance(eps: float = 1 / 500, alpha: float = 1.0) -> Instance:
    """Three products whose weight threshold moves up as alpha tightens from 1 to 1/3."""
    if not 0.0 < eps < 1 / 270:
        raise InvalidParameter("eps must lie in (0, 1/270).", eps=eps)
    return Instance(r=[7.0 / (9.0 * eps), 1.0, 1.0], v=[eps, 1.0, 3.0], alpha=alpha)


def example_randomization_instance(n: int, alpha: float) -> tuple[Instance, SalesVector]:
    """Instance whose unique optimum randomizes over n nested assortments, with that optimum."""
    if int(n) != n or n < 2:
        raise InvalidParameter("n must be an integer of at least 2.", n=n)
    if not 0.0 < alpha <= 1.0:
        raise InvalidParameter("alpha must lie in (0, 1].", alpha=alpha)
    n = int(n)
    v = 1.0 + np.arange(1, n + 1) * alpha / n**2
    v[0] = alpha
    x = np.full(n, 1.0 / (n + alpha))
    x[0] = alpha / (n + alpha)
    return Instance(r=np.ones(n), v=v, alpha=alpha), SalesVector(x0=1.0 / (n + alpha), x=x)


def value_of_randomization(inst: Instance) -> RandomizationGap:
    randomized = solve_bms(inst)
    deterministic = solve_bms_deterministic(inst)
    n, alpha = inst.n, inst.alpha
    spread = 1.0 - alpha
    lower = min(1.0 / (2.0 * spread), n / 2.0) if spread > 0 else n / 2.0
    upper = min(2.0 / spread, float(n)) if spread > 0 else float(n)
    return RandomizationGap(
        revenue=randomized.revenue,
        revenue_det=deterministic.revenue,
        ratio=randomized.revenue / deterministic.revenue,
        lower_bound=lower,
        upper_bound=upper,
    )


def support_lp(inst: Instance, support: Iterable[int], caps=None, formulation: str = "auxiliary") -> LinearProgram:
    """LP over sales vectors supported on ``support`` with the balancing rows linearized.

    Variables are x over the support, then x0, then (auxiliary formulation
    only) z, the largest purchase probability, with alpha * z <= x_i <= z.
    The pairwise formulation states alpha * x_j <= x_i for every ordered pair.
    ``caps`` bounds each x_i from above (inventory per period).
    """
    if formulation not in ("auxiliary", "pairwise"):
        raise InvalidParameter("Unknown formulation.", formulation=formulation)
    support = list(support)
    k = len(support)
    auxiliary = formulation == "auxiliary"
    width = k + 2 if auxiliary else k + 1
    rows = []
    total = np.zeros(width)
    total[: k + 1] = 1.0
    rows.append((total, Sense.EQ, 1.0))
    for position, i in enumerate(support):
        validity = np.zeros(width)
        validity[position] = 1.0
        validity[k] = -inst.v[i]
        rows.append((validity, Sense.LE, 0.0))
        if auxiliary:
            below_max = np.zeros(width)
            below_max[position] = 1.0
            below_max[-1] = -1.0
            rows.append((below_max, Sense.LE, 0.0))
            above_floor = np.zeros(width)
            above_floor[position] = -1.0
            above_floor[-1] = inst.alpha
            rows.append((above_floor, Sense.LE, 0.0))
            continue
        for other in range(k):
            if other == position:
                continue
            pair = np.zeros(width)
            pair[position] = -1.0
            pair[other] = inst.alpha
            rows.append((pair, Sense.LE, 0.0))
    objective = np.zeros(width)
    objective[:k] = inst.r[support]
    upper = np.full(width, np.inf)
    if caps is not None:
        upper[:k] = np.asarray(caps, dtype=float)[support]
    return LinearProgram.from_rows(objective, rows, upper=upper)


def solve_bms_support_lp(
    inst: Instance,
    support,
    solver: SimplexSolver | None = None,
    caps=None,
    formulation: str = "auxiliary",
) -> SalesVector | None:
    support = sorted(support)
    if not support:
        return SalesVector.empty(inst.n)
    result = (solver or SimplexSolver()).solve(support_lp(inst, support, caps=caps, formulation=formulation))
    if not result.is_optimal:
        return None
    x = np.zeros(inst.n)
    x[support] = np.clip(result.x[: len(support)], 0.0, None)
    return SalesVector(x0=result.x[len(support)], x=x)


def solve_bms_bruteforce(
    inst: Instance,
    predicate: Callable[[tuple[int, ...]], bool] | None = None,
    n_max: int | None = None,
) -> SupportSolution | None:
    """Best balanced sales vector over supports accepted by ``predicate``.

    Returns None when no support (the empty one included) is accepted.
    """
    n_max = n_max or getattr(settings, "FAIR_ASSORT_BRUTEFORCE_MAX_N", 16)
    if inst.n > n_max:
        raise SizeLimitExceeded(n=inst.n, n_max=n_max)
    solver = SimplexSolver()
    best = None
    if predicate is None or predicate(()):
        best = SupportSolution(xs=SalesVector.empty(inst.n), revenue=0.0, support=())
    for size in range(1, inst.n + 1):
        for support in itertools.combinations(range(inst.n), size):
            if predicate is not None and not predicate(support):
                continue
            # Unbalanced MNL revenue on the support bounds the balanced one.
            _, bound = revenue_ordered_optimum(inst.r, inst.v, support)
            if best is not None and bound <= best.revenue + _revenue_slack(best.revenue):
                continue
            xs = solve_bms_support_lp(inst, support, solver)
            if xs is None or xs.support != support:
                continue
            revenue = xs.revenue(inst)
            if best is None or revenue > best.revenue + REVENUE_TIE * max(1.0, best.revenue):
                best = SupportSolution(xs=xs, revenue=revenue, support=support)
    return best
