"""
Solvers for the inventory-aware upper bound on dynamic revenue.

The bound maximizes ``T * sum(r_i * x_i)`` over balanced MNL sales vectors
whose per-period sales also respect ``x_i <= c_i / T``. Three routes are
provided: a grid-and-knapsack FPTAS, an exact enumeration for alpha = 1 and a
support-enumeration LP oracle for small instances.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from django.conf import settings

from .choice import DynamicInstance, SalesVector, Violation, check_bms_feasible, feasibility_tol
from .exceptions import InvalidParameter, SizeLimitExceeded
from .lp import SimplexSolver
from .static import solve_bms_support_lp

logger = logging.getLogger(__name__)

ALPHA_ONE = 1e-12


@dataclass(frozen=True)
class UpperBoundSolution:
    xs: SalesVector
    objective: float
    epsilon: float
    method: str
    stats: dict = field(default_factory=dict)

    @property
    def support(self) -> tuple[int, ...]:
        return self.xs.support


@dataclass(frozen=True)
class MckpClass:
    label: int
    values: np.ndarray
    weights: np.ndarray


@dataclass(frozen=True)
class MckpInstance:
    classes: tuple[MckpClass, ...]
    capacity: float


@dataclass(frozen=True)
class MckpSelection:
    """Chosen item per class (None for no item)."""

    choices: tuple[int | None, ...]
    value: float
    weight: float


def check_upper_bound_feasible(dyn: DynamicInstance, xs: SalesVector, tol: float | None = None) -> list[Violation]:
    tol = feasibility_tol(tol)
    violations = check_bms_feasible(dyn.base, xs, tol=tol)
    caps = dyn.c / dyn.T
    excess = xs.x - caps
    for i in np.flatnonzero(excess > tol * np.maximum(1.0, caps)):
        violations.append(Violation("inventory", int(i), float(excess[i])))
    return violations


def _solution(dyn: DynamicInstance, x: np.ndarray, epsilon: float, method: str, **stats) -> UpperBoundSolution:
    x = np.clip(np.asarray(x, dtype=float), 0.0, None)
    xs = SalesVector(x0=1.0 - x.sum(), x=x)
    return UpperBoundSolution(
        xs=xs, objective=dyn.T * xs.revenue(dyn.base), epsilon=epsilon, method=method, stats=stats,
    )


def _prune_dominated(weights, scaled):
    """Keep items that are lighter than every item of equal or larger scaled value."""
    order = np.lexsort((-scaled, weights))
    kept = []
    best_scaled = -1
    for item in order:
        if scaled[item] > best_scaled:
            kept.append(item)
            best_scaled = scaled[item]
    return np.array(kept, dtype=np.int64)


def solve_mckp(mckp: MckpInstance, eps: float) -> MckpSelection:
    """Multiple-choice knapsack by value scaling: at most one item per class.

    Values are rounded down to multiples of eps * max_value / m and a DP over
    total scaled value keeps the lightest selection, so the result is within a
    factor (1 - eps) of the optimum.
    """
    if not 0.0 < eps < 1.0:
        raise InvalidParameter("eps must lie in (0, 1).", eps=eps)
    capacity = mckp.capacity
    slack = 1e-12 * max(1.0, capacity)
    fitting = []
    for cls in mckp.classes:
        mask = (cls.weights <= capacity + slack) & (cls.values > 0)
        fitting.append(np.flatnonzero(mask))
    values = [cls.values[items] for cls, items in zip(mckp.classes, fitting) if items.size]
    if not values:
        return MckpSelection(choices=(None,) * len(mckp.classes), value=0.0, weight=0.0)
    m = len(values)
    unit = eps * max(v.max() for v in values) / m

    size = 1
    tables = []
    dp = np.zeros(1)
    for cls, items in zip(mckp.classes, fitting):
        if not items.size:
            tables.append(None)
            continue
        scaled = np.floor(cls.values[items] / unit).astype(np.int64)
        kept = items[_prune_dominated(cls.weights[items], scaled)]
        kept_scaled = np.floor(cls.values[kept] / unit).astype(np.int64)
        size_next = size + int(kept_scaled.max())
        grown = np.full(size_next, np.inf)
        grown[:size] = dp
        choice = np.full(size_next, -1, dtype=np.int64)
        for item, shift in zip(kept, kept_scaled):
            candidate = np.full(size_next, np.inf)
            candidate[shift:shift + size] = dp + cls.weights[item]
            better = candidate < grown
            grown[better] = candidate[better]
            choice[better] = item
        dp, size = grown, size_next
        tables.append(choice)

    reachable = np.flatnonzero(dp <= capacity + slack)
    target = int(reachable.max())
    choices = [None] * len(mckp.classes)
    for position in range(len(mckp.classes) - 1, -1, -1):
        table = tables[position]
        if table is None:
            continue
        item = int(table[target])
        if item >= 0:
            choices[position] = item
            target -= int(np.floor(mckp.classes[position].values[item] / unit))
    value = sum(mckp.classes[k].values[c] for k, c in enumerate(choices) if c is not None)
    weight = sum(mckp.classes[k].weights[c] for k, c in enumerate(choices) if c is not None)
    return MckpSelection(choices=tuple(choices), value=float(value), weight=float(weight))


def _geometric_grid(start: float, stop: float, ratio: float) -> np.ndarray:
    """start * ratio**l up to the first point at or past stop, last point clamped to stop."""
    if stop <= start:
        return np.array([min(start, stop)])
    steps = math.ceil(math.log(stop / start) / math.log(ratio))
    return np.minimum(start * ratio ** np.arange(steps + 1), stop)


def _grids(dyn: DynamicInstance, delta: float):
    n, v = dyn.n, dyn.v
    floor0 = 1.0 / (1.0 + n * v.max())
    L0 = math.ceil(math.log(1.0 / floor0) / math.log1p(delta))
    grid0 = np.unique(np.minimum(floor0 * (1 + delta) ** np.arange(L0 + 1), 1.0))
    y_min = min(dyn.c_min / dyn.T, v.min() / (1.0 + n * v.max()))
    Ly = math.ceil(math.log(1.0 / y_min) / math.log1p(delta))
    grid_y = np.unique(np.minimum(y_min * (1 + delta) ** (np.arange(Ly + 1) - 1.0), 1.0))
    return grid0, grid_y


def _fractional_bounds(r, uppers, capacities):
    """Greedy fractional-knapsack value for each row of ``uppers`` (items pre-sorted by r)."""
    filled = np.minimum(np.cumsum(uppers, axis=1), capacities[:, None])
    taken = np.diff(filled, axis=1, prepend=0.0)
    return taken @ r


def solve_upper_bound_fptas(dyn: DynamicInstance, eps: float) -> UpperBoundSolution:
    if not 0.0 < eps < 0.5:
        raise InvalidParameter("eps must lie in (0, 1/2).", eps=eps)
    alpha, T = dyn.alpha, dyn.T
    delta = (1.0 - eps) ** -0.25 - 1.0
    grid0, grid_y = _grids(dyn, delta)
    inventory = dyn.c / T

    x0s, ys = np.meshgrid(grid0, grid_y, indexing="ij")
    x0s, ys = x0s.ravel(), ys.ravel()
    caps = np.minimum(np.outer(x0s, dyn.v), inventory[None, :])
    eligible = alpha * ys[:, None] <= caps
    live = (ys <= caps.max(axis=1)) & (x0s + alpha * ys <= 1.0) & eligible.any(axis=1)
    x0s, ys, caps, eligible = x0s[live], ys[live], caps[live], eligible[live]
    uppers = np.where(eligible, np.minimum(caps, ys[:, None]), 0.0)

    by_revenue = np.lexsort((np.arange(dyn.n), -dyn.r))
    bounds = _fractional_bounds(dyn.r[by_revenue], uppers[:, by_revenue], 1.0 - x0s)
    visit = np.lexsort((np.arange(bounds.size), -bounds))

    best_value, best_x = 0.0, np.zeros(dyn.n)
    inner_eps = delta / (1.0 + delta)
    visited = 0
    for pair in visit:
        if bounds[pair] <= best_value * (1 + 1e-12):
            break
        visited += 1
        x0_bar, y_bar = x0s[pair], ys[pair]
        classes = []
        for i in np.flatnonzero(eligible[pair]):
            points = _geometric_grid(alpha * y_bar, uppers[pair, i], 1.0 + delta)
            classes.append(MckpClass(label=int(i), values=dyn.r[i] * points, weights=points))
        selection = solve_mckp(MckpInstance(classes=tuple(classes), capacity=1.0 - x0_bar), inner_eps)
        if selection.value > best_value:
            best_value = selection.value
            best_x = np.zeros(dyn.n)
            for cls, choice in zip(classes, selection.choices):
                if choice is not None:
                    best_x[cls.label] = cls.weights[choice]
    logger.debug(
        "FPTAS grid %d x %d, %d live pairs, %d knapsacks solved",
        grid0.size, grid_y.size, x0s.size, visited,
    )
    return _solution(
        dyn, best_x, eps, "fptas",
        grid0=int(grid0.size), grid_y=int(grid_y.size), live_pairs=int(x0s.size), knapsacks=visited,
    )


def solve_upper_bound_alpha1(dyn: DynamicInstance) -> UpperBoundSolution:
    if abs(dyn.alpha - 1.0) > ALPHA_ONE:
        raise InvalidParameter("The equal-sales solver requires alpha = 1.", alpha=dyn.alpha)
    n, T = dyn.n, dyn.T
    r, v, c = dyn.r, dyn.v, dyn.c
    levels = np.arange(1, n + 1)
    candidates = np.unique(np.concatenate([c / T, (v[:, None] / (1.0 + levels[None, :] * v[:, None])).ravel()]))
    by_revenue = np.lexsort((np.arange(n), -r))
    best_value, best_x = 0.0, np.zeros(n)
    for x_bar in candidates:
        for k in levels:
            if k * x_bar >= 1.0:
                break
            rel = 1 + 1e-12
            offered = (c * rel >= T * x_bar) & (v * rel >= x_bar / (1.0 - k * x_bar))
            if offered.sum() < k:
                continue
            chosen = [i for i in by_revenue if offered[i]][:k]
            value = x_bar * r[chosen].sum()
            if value > best_value * (1 + 1e-15):
                best_value = value
                best_x = np.zeros(n)
                best_x[chosen] = x_bar
    return _solution(dyn, best_x, 0.0, "alpha1", candidates=int(candidates.size))


def _support_bound(dyn: DynamicInstance, support, caps) -> float:
    """Fractional knapsack over x_i <= caps_i with total at most V / (1 + V)."""
    weight = dyn.v[list(support)].sum()
    remaining = weight / (1.0 + weight)
    value = 0.0
    for i in sorted(support, key=lambda j: -dyn.r[j]):
        take = min(caps[i], remaining)
        value += dyn.r[i] * take
        remaining -= take
        if remaining <= 0:
            break
    return value


def solve_upper_bound_exact(
    dyn: DynamicInstance, n_max: int | None = None, formulation: str = "auxiliary",
) -> UpperBoundSolution:
    n_max = n_max or getattr(settings, "FAIR_ASSORT_EXACT_MAX_N", 12)
    if dyn.n > n_max:
        raise SizeLimitExceeded(n=dyn.n, n_max=n_max)
    inventory = dyn.c / dyn.T
    caps = np.minimum(inventory, dyn.v / (1.0 + dyn.v))
    supports = [s for size in range(1, dyn.n + 1) for s in itertools.combinations(range(dyn.n), size)]
    bounds = np.array([_support_bound(dyn, s, caps) for s in supports])
    solver = SimplexSolver()
    best_value, best_x = 0.0, np.zeros(dyn.n)
    solved = 0
    for index in np.lexsort((np.arange(len(supports)), -bounds)):
        if bounds[index] <= best_value * (1 + 1e-12):
            break
        solved += 1
        xs = solve_bms_support_lp(dyn.base, supports[index], solver, caps=inventory, formulation=formulation)
        if xs is None:
            continue
        value = xs.revenue(dyn.base)
        if value > best_value * (1 + 1e-12):
            best_value, best_x = value, xs.x
    logger.debug("Exact upper bound solved %d of %d support LPs", solved, len(supports))
    return _solution(dyn, best_x, 0.0, "exact", supports=len(supports), lps=solved)


def solve_upper_bound(
    dyn: DynamicInstance, method: str = "auto", eps: float = 0.05, n_max: int | None = None,
) -> UpperBoundSolution:
    """Dispatch to the exact oracle for small n, the equal-sales solver at alpha = 1, else the FPTAS."""
    if method == "auto":
        limit = n_max or getattr(settings, "FAIR_ASSORT_EXACT_MAX_N", 12)
        if dyn.n <= limit:
            method = "exact"
        elif abs(dyn.alpha - 1.0) <= ALPHA_ONE:
            method = "alpha1"
        else:
            method = "fptas"
    if method == "exact":
        return solve_upper_bound_exact(dyn, n_max=n_max)
    if method == "alpha1":
        return solve_upper_bound_alpha1(dyn)
    if method == "fptas":
        return solve_upper_bound_fptas(dyn, eps)
    raise InvalidParameter("Unknown upper-bound method.", method=method)
