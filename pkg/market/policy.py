"""
Dynamic policies built from an upper-bound solution.

A fixed-target policy keeps each product's purchase probability constant
until it sells out. For alpha < 1 the targets are shrunk by bisection so that
expected capped sales stay within a factor alpha of each other; at alpha = 1
the equal targets are kept and realized sales are capped at the smallest
offered inventory instead. The resolving heuristics re-solve a
history-aware LP during the horizon.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import stats

from .choice import DynamicInstance, frozen_array
from .exceptions import (
    BalancingInvariantViolation,
    BisectionLimitExceeded,
    InvalidParameter,
    ResolveInfeasible,
)
from .lp import LinearProgram, Sense, SimplexSolver
from .upper_bound import (
    ALPHA_ONE,
    UpperBoundSolution,
    solve_upper_bound_alpha1,
    solve_upper_bound_fptas,
)

logger = logging.getLogger(__name__)


def capped_mean_sales(T: int, p: float, c: int) -> float:
    """E[min(Binomial(T, p), c)], summed as P(Y >= 1) + ... + P(Y >= c)."""
    if int(T) != T or T < 1:
        raise InvalidParameter("T must be a positive integer.", T=T)
    if not 0.0 <= p <= 1.0:
        raise InvalidParameter("p must lie in [0, 1].", p=p)
    if int(c) != c or c < 0:
        raise InvalidParameter("c must be a nonnegative integer.", c=c)
    T, c = int(T), int(c)
    if p == 0.0 or c == 0:
        return 0.0
    if c >= T:
        return T * p
    return math.fsum(stats.binom.sf(np.arange(c), T, p))


class CappedSalesCurve:
    """Memoized G(p, c) for one horizon."""

    def __init__(self, T: int):
        self.T = int(T)
        self._cache: dict[tuple[float, int], float] = {}

    def __call__(self, p: float, c: int) -> float:
        key = (float(p), int(c))
        if key not in self._cache:
            self._cache[key] = capped_mean_sales(self.T, *key)
        return self._cache[key]

    def many(self, p, c) -> np.ndarray:
        return np.array([self(pi, ci) for pi, ci in zip(p, c)])


class PolicyKind(str, Enum):
    FIXED_TARGET = "fixed-target"
    CAPPED = "capped"
    HEURISTIC_1 = "heuristic-1"
    HEURISTIC_2 = "heuristic-2"

    @property
    def resolving(self) -> bool:
        return self in (PolicyKind.HEURISTIC_1, PolicyKind.HEURISTIC_2)


@dataclass(frozen=True)
class PolicySpec:
    kind: PolicyKind
    targets: np.ndarray
    support: tuple[int, ...]
    upper_bound: float
    cap: int | None = None
    g_min: float | None = None
    expected_sales: np.ndarray | None = None
    eps2: float | None = None
    bisection_iterations: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", PolicyKind(self.kind))
        object.__setattr__(self, "targets", frozen_array(self.targets))
        if self.expected_sales is not None:
            object.__setattr__(self, "expected_sales", frozen_array(self.expected_sales))

    @property
    def n(self) -> int:
        return int(self.targets.size)


def bisection_budget(dyn: DynamicInstance, eps2: float) -> int:
    v = dyn.v
    return math.ceil(
        math.log2(dyn.T)
        + math.log2(1.0 / eps2)
        + math.log2((1.0 + dyn.n * v.max()) / (dyn.alpha * v.min()))
        + 2
    )


def _calibrate(curve: CappedSalesCurve, x_tilde: float, c: int, ceiling: float, eps2: float, budget: int):
    """Left end of a bisection on [0, x_tilde] toward G in [(1 - eps2) * ceiling, ceiling]."""
    low, high = 0.0, x_tilde
    floor = (1.0 - eps2) * ceiling
    for iteration in range(1, budget + 1):
        middle = 0.5 * (low + high)
        if curve(middle, c) > ceiling:
            high = middle
        else:
            low = middle
        if curve(low, c) >= floor:
            return low, iteration
    raise BisectionLimitExceeded(budget=budget, x_tilde=x_tilde, c=c, expected=curve(low, c), floor=floor)


def build_policy(
    dyn: DynamicInstance,
    eps: float = 0.1,
    upper_bound: UpperBoundSolution | None = None,
    eps2: float | None = None,
) -> PolicySpec:
    if not 0.0 < eps < 1.0:
        raise InvalidParameter("eps must lie in (0, 1).", eps=eps)
    curve = CappedSalesCurve(dyn.T)

    if abs(dyn.alpha - 1.0) <= ALPHA_ONE:
        solution = upper_bound or solve_upper_bound_alpha1(dyn)
        support = solution.support
        cap = int(dyn.c[list(support)].min()) if support else None
        targets = np.asarray(solution.xs.x)
        expected = np.zeros(dyn.n)
        for i in support:
            expected[i] = curve(targets[i], cap)
        return PolicySpec(
            kind=PolicyKind.CAPPED,
            targets=targets,
            support=support,
            upper_bound=solution.objective,
            cap=cap,
            g_min=float(expected[list(support)].min()) if support else None,
            expected_sales=expected,
        )

    if eps2 is None:
        eps2 = min(eps / 2.0, 1.0 - dyn.alpha)
    if not 0.0 < eps2 <= 1.0 - dyn.alpha:
        raise InvalidParameter("eps2 must lie in (0, 1 - alpha].", eps2=eps2, alpha=dyn.alpha)
    solution = upper_bound or solve_upper_bound_fptas(dyn, eps / 2.0)
    x_tilde = np.asarray(solution.xs.x)
    support = solution.support
    targets = x_tilde.copy()
    expected = np.zeros(dyn.n)
    iterations = {}
    g_min = None
    if support:
        for i in support:
            expected[i] = curve(x_tilde[i], dyn.c[i])
        g_min = float(expected[list(support)].min())
        ceiling = g_min / dyn.alpha
        budget = bisection_budget(dyn, eps2)
        for i in support:
            if expected[i] <= ceiling:
                continue
            targets[i], iterations[i] = _calibrate(curve, x_tilde[i], int(dyn.c[i]), ceiling, eps2, budget)
            expected[i] = curve(targets[i], dyn.c[i])
        logger.debug("Calibrated %d of %d targets (budget %d)", len(iterations), len(support), budget)
    return PolicySpec(
        kind=PolicyKind.FIXED_TARGET,
        targets=targets,
        support=support,
        upper_bound=solution.objective,
        g_min=g_min,
        expected_sales=expected,
        eps2=eps2,
        bisection_iterations=iterations,
    )


def build_heuristic_spec(dyn: DynamicInstance, kind: PolicyKind, upper_bound: UpperBoundSolution) -> PolicySpec:
    kind = PolicyKind(kind)
    if not kind.resolving:
        raise InvalidParameter("Not a resolving heuristic.", kind=kind.value)
    return PolicySpec(
        kind=kind,
        targets=upper_bound.xs.x,
        support=upper_bound.support,
        upper_bound=upper_bound.objective,
    )


def policy_step(spec: PolicySpec, remaining: np.ndarray, sales: np.ndarray, t: int, targets=None) -> np.ndarray:
    """Purchase probabilities for period t; rows of 2-D inputs are independent trajectories.

    Resolving heuristics pass their current ``targets`` (one row per trajectory).
    """
    available = remaining > 0
    if spec.kind is PolicyKind.CAPPED:
        available &= sales < spec.cap
    current = spec.targets if targets is None else targets
    return np.where(available, current, 0.0)


def resolve_schedule(kind: PolicyKind, T: int) -> frozenset[int]:
    """Periods with a planned resolve; stock-out resolves come on top."""
    if PolicyKind(kind) is not PolicyKind.HEURISTIC_1:
        return frozenset()
    step = math.ceil(math.sqrt(T))
    return frozenset(range(step, T + 1, step))


def heuristic_resolve(
    dyn: DynamicInstance,
    support,
    history: np.ndarray,
    sales: np.ndarray,
    t: int,
    solver: SimplexSolver | None = None,
) -> np.ndarray:
    """Targets for periods t..T given past targets ``history`` (summed) and realized ``sales``.

    Maximizes revenue subject to MNL validity, remaining inventory spread over
    the rest of the horizon and alpha-balance of the planned cumulative
    targets over the support. Variables are x over the support, x0 and z, an
    upper envelope of the planned cumulative targets.
    """
    support = list(support)
    k = len(support)
    targets = np.zeros(dyn.n)
    if not k:
        return targets
    remaining_periods = dyn.T - t + 1
    width = k + 2
    rows = []
    total = np.zeros(width)
    total[: k + 1] = 1.0
    rows.append((total, Sense.EQ, 1.0))
    for position, i in enumerate(support):
        validity = np.zeros(width)
        validity[position] = 1.0
        validity[k] = -dyn.v[i]
        rows.append((validity, Sense.LE, 0.0))
        floor = np.zeros(width)
        floor[position] = -remaining_periods
        floor[-1] = dyn.alpha
        rows.append((floor, Sense.LE, history[i]))
        envelope = np.zeros(width)
        envelope[position] = remaining_periods
        envelope[-1] = -1.0
        rows.append((envelope, Sense.LE, -history[i]))
    objective = np.zeros(width)
    objective[:k] = dyn.r[support]
    upper = np.full(width, np.inf)
    upper[:k] = np.maximum(dyn.c[support] - sales[support], 0) / remaining_periods
    result = (solver or SimplexSolver()).solve(LinearProgram.from_rows(objective, rows, upper=upper))
    if not result.is_optimal:
        raise ResolveInfeasible(t=t, status=result.status.value)
    targets[support] = np.clip(result.x[:k], 0.0, None)
    return targets


def check_cumulative_balancing(history: np.ndarray, support, alpha: float, t: int, tol: float = 1e-9) -> None:
    """Raise if summed targets over the support lose their alpha balance (rows are trajectories)."""
    if not support:
        return
    block = np.atleast_2d(history)[:, list(support)]
    top = block.max(axis=1)
    short = alpha * top - block.min(axis=1) > tol * np.maximum(1.0, top)
    if short.any():
        row = int(np.flatnonzero(short)[0])
        raise BalancingInvariantViolation(t=t, trajectory=row)
