"""
Balanced market-share optimization when the offered set must belong to a
family of allowed assortments.

Each threshold pair (r_hat, v_hat) turns the problem into a constrained MNL
assortment problem over modified weights; any oracle for that problem with
approximation factor beta yields a beta-approximate balanced solution.
"""
import itertools
import logging
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
from django.conf import settings

from .choice import Instance, SalesVector, check_bms_feasible, revenue_ordered_optimum
from .exceptions import (
    BalancingInvariantViolation,
    MalformedInput,
    MarketError,
    OracleFailure,
    SizeLimitExceeded,
)
from .static import better_candidate

logger = logging.getLogger(__name__)

Predicate = Callable[[tuple[int, ...]], bool]


@dataclass(frozen=True)
class OracleResult:
    assortment: tuple[int, ...] | None
    revenue: float

    @property
    def feasible(self) -> bool:
        return self.assortment is not None

    @classmethod
    def infeasible(cls) -> "OracleResult":
        return cls(assortment=None, revenue=0.0)


class ConstraintOracle(ABC):
    """Approximate optimizer for MNL assortment problems over a constraint family."""

    beta: float = 1.0
    reentrant: bool = True

    @abstractmethod
    def solve(self, allowed: tuple[int, ...], r: np.ndarray, w: np.ndarray) -> OracleResult:
        """Best allowed assortment under weights w, or an infeasible result."""


class UnconstrainedOracle(ConstraintOracle):
    def solve(self, allowed, r, w):
        assortment, revenue = revenue_ordered_optimum(r, w, allowed)
        return OracleResult(assortment=assortment, revenue=revenue)


class BruteforceOracle(ConstraintOracle):
    def __init__(self, predicate: Predicate, n_max: int | None = None):
        self.predicate = predicate
        self.n_max = n_max or getattr(settings, "FAIR_ASSORT_BRUTEFORCE_MAX_N", 16)

    def solve(self, allowed, r, w):
        if len(r) > self.n_max:
            raise SizeLimitExceeded(n=len(r), n_max=self.n_max)
        best = None
        for size in range(len(allowed) + 1):
            for subset in itertools.combinations(allowed, size):
                if not self.predicate(subset):
                    continue
                index = list(subset)
                revenue = float(r[index] @ w[index] / (1.0 + w[index].sum())) if index else 0.0
                if best is None or revenue > best.revenue + 1e-12 * max(1.0, best.revenue):
                    best = OracleResult(assortment=subset, revenue=revenue)
        return best or OracleResult.infeasible()


def oracle_unconstrained() -> ConstraintOracle:
    return UnconstrainedOracle()


def oracle_bruteforce(predicate: Predicate, n_max: int | None = None) -> ConstraintOracle:
    return BruteforceOracle(predicate, n_max=n_max)


class ConstraintFamily(ABC):
    @abstractmethod
    def contains(self, assortment: tuple[int, ...]) -> bool: ...

    @abstractmethod
    def to_json(self): ...

    def oracle(self, n_max: int | None = None) -> ConstraintOracle:
        return oracle_bruteforce(self.contains, n_max=n_max)

    def __call__(self, assortment) -> bool:
        return self.contains(tuple(assortment))


class AllAssortments(ConstraintFamily):
    def contains(self, assortment):
        return True

    def to_json(self):
        return "all"

    def oracle(self, n_max=None):
        return oracle_unconstrained()


@dataclass(frozen=True)
class MaxCardinality(ConstraintFamily):
    k: int

    def contains(self, assortment):
        return len(assortment) <= self.k

    def to_json(self):
        return {"max_card": self.k}


@dataclass(frozen=True)
class MinCardinality(ConstraintFamily):
    k: int

    def contains(self, assortment):
        return len(assortment) >= self.k

    def to_json(self):
        return {"min_card": self.k}


@dataclass(frozen=True)
class CategoryCover(ConstraintFamily):
    """At least ``min_count`` products from each category."""

    categories: tuple[tuple[frozenset[int], int], ...]

    def contains(self, assortment):
        chosen = set(assortment)
        return all(len(chosen & ids) >= min_count for ids, min_count in self.categories)

    def to_json(self):
        return {
            "categories": [
                {"ids": sorted(ids), "min_count": min_count} for ids, min_count in self.categories
            ]
        }


def _nonnegative_int(value, field):
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise MalformedInput(f"{field} must be a nonnegative integer.", value=value)
    return value


def family_from_json(data, n: int | None = None) -> ConstraintFamily:
    """Parse "all", {"max_card": k}, {"min_card": k} or {"categories": [...]}."""
    if data == "all":
        return AllAssortments()
    if not isinstance(data, dict) or len(data) != 1:
        raise MalformedInput("Unrecognized constraint family.", family=data)
    (kind, value), = data.items()
    if kind == "max_card":
        return MaxCardinality(_nonnegative_int(value, kind))
    if kind == "min_card":
        return MinCardinality(_nonnegative_int(value, kind))
    if kind == "categories":
        if not isinstance(value, list):
            raise MalformedInput("categories must be a list.")
        categories = []
        for entry in value:
            if not isinstance(entry, dict) or set(entry) != {"ids", "min_count"}:
                raise MalformedInput("Each category needs ids and min_count.", category=entry)
            ids = frozenset(_nonnegative_int(i, "ids") for i in entry["ids"])
            if n is not None and any(i >= n for i in ids):
                raise MalformedInput("Category refers to an unknown product.", ids=sorted(ids), n=n)
            categories.append((ids, _nonnegative_int(entry["min_count"], "min_count")))
        return CategoryCover(tuple(categories))
    raise MalformedInput("Unrecognized constraint family.", family=data)


def oracle_for_family(family: ConstraintFamily, n_max: int | None = None) -> ConstraintOracle:
    return family.oracle(n_max=n_max)


@dataclass(frozen=True)
class ConstrainedSolution:
    xs: SalesVector
    revenue: float
    r_hat: float | None
    v_hat: float | None
    support: tuple[int, ...]
    feasible: bool
    oracle_calls: int = 0


@dataclass(frozen=True)
class _Candidate:
    r_hat: float
    v_hat: float
    allowed: tuple[int, ...]
    weights: np.ndarray

    @property
    def key(self):
        return self.allowed, self.weights[list(self.allowed)].tobytes()


def _candidates(inst: Instance) -> list[_Candidate]:
    r, v, alpha = inst.r, inst.v, inst.alpha
    v_hats = np.unique(np.concatenate([v, alpha * v]))
    candidates = []
    for v_hat in v_hats:
        allowed = tuple(np.flatnonzero(v >= v_hat * (1 - 1e-12)).tolist())
        if not allowed:
            continue
        for r_hat in np.unique(r):
            w = np.where(r < r_hat, v_hat, np.minimum(v, v_hat / alpha))
            w[np.setdiff1d(np.arange(inst.n), allowed)] = 0.0
            candidates.append(_Candidate(float(r_hat), float(v_hat), allowed, w))
    return candidates


def solve_bms_constrained(
    inst: Instance,
    oracle: ConstraintOracle,
    predicate: Predicate | None = None,
    threads: int | None = None,
) -> ConstrainedSolution:
    threads = threads or getattr(settings, "FAIR_ASSORT_THREADS", 1)
    candidates = _candidates(inst)
    unique = {}
    for candidate in candidates:
        unique.setdefault(candidate.key, candidate)
    logger.debug("solve_bms_constrained: %d candidates, %d oracle calls", len(candidates), len(unique))

    def call(candidate: _Candidate) -> OracleResult:
        try:
            return oracle.solve(candidate.allowed, inst.r, candidate.weights)
        except OracleFailure as exc:
            raise OracleFailure(exc.detail, r_hat=candidate.r_hat, v_hat=candidate.v_hat, **exc.context) from exc
        except MarketError:
            raise
        except Exception as exc:
            raise OracleFailure(str(exc), r_hat=candidate.r_hat, v_hat=candidate.v_hat) from exc

    keys = list(unique)
    if threads > 1 and oracle.reentrant:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = dict(zip(keys, pool.map(call, [unique[key] for key in keys])))
    else:
        results = {key: call(unique[key]) for key in keys}

    best = None
    best_candidate = None
    best_xs = SalesVector.empty(inst.n)
    for candidate in candidates:
        result = results[candidate.key]
        if not result.feasible:
            continue
        assortment = tuple(sorted(result.assortment))
        if not set(assortment) <= set(candidate.allowed):
            raise OracleFailure("Oracle offered a product outside the allowed set.",
                                r_hat=candidate.r_hat, v_hat=candidate.v_hat)
        if predicate is not None and not predicate(assortment):
            raise OracleFailure("Oracle returned an assortment outside the family.",
                                r_hat=candidate.r_hat, v_hat=candidate.v_hat)
        w = np.zeros(inst.n)
        w[list(assortment)] = candidate.weights[list(assortment)]
        xs = SalesVector.from_weights(w)
        violations = check_bms_feasible(inst, xs)
        if violations:
            raise BalancingInvariantViolation(
                "Candidate sales vector is infeasible.",
                r_hat=candidate.r_hat, v_hat=candidate.v_hat, violations=[v.constraint for v in violations],
            )
        scored = (xs.revenue(inst), assortment)
        if better_candidate(scored, best):
            best, best_candidate, best_xs = scored, candidate, xs

    if best is None:
        return ConstrainedSolution(
            xs=best_xs, revenue=0.0, r_hat=None, v_hat=None, support=(), feasible=False,
            oracle_calls=len(unique),
        )
    return ConstrainedSolution(
        xs=best_xs,
        revenue=best[0],
        r_hat=best_candidate.r_hat,
        v_hat=best_candidate.v_hat,
        support=best_xs.support,
        feasible=True,
        oracle_calls=len(unique),
    )
