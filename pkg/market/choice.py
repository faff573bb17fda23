"""
MNL choice model primitives: instance types, choice probabilities, feasibility
checks and the conversion from purchase probabilities to a nested
distribution over assortments.

All types are frozen; their arrays are marked read-only so instances can be
shared across threads.
"""
import logging
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from django.conf import settings

from .exceptions import InfeasibleSalesVector, InvalidInstance, ProductIndexError

logger = logging.getLogger(__name__)

NO_PURCHASE = -1
PRUNE_MASS = 1e-15


def feasibility_tol(tol: float | None = None) -> float:
    if tol is not None:
        return tol
    return getattr(settings, "FAIR_ASSORT_FEASIBILITY_TOL", 1e-9)


def frozen_array(values, dtype=float) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Instance:
    r: np.ndarray
    v: np.ndarray
    alpha: float

    def __post_init__(self) -> None:
        r = frozen_array(self.r)
        v = frozen_array(self.v)
        if r.ndim != 1 or v.ndim != 1 or r.shape != v.shape:
            raise InvalidInstance("r and v must be vectors of equal length.", r=r.shape, v=v.shape)
        if r.size < 1:
            raise InvalidInstance("An instance needs at least one product.")
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(v))):
            raise InvalidInstance("Revenues and weights must be finite.")
        if np.any(r <= 0):
            raise InvalidInstance("All revenues must be positive.", index=int(np.argmin(r)))
        if np.any(v <= 0):
            raise InvalidInstance("All preference weights must be positive.", index=int(np.argmin(v)))
        alpha = float(self.alpha)
        if not 0.0 < alpha <= 1.0:
            raise InvalidInstance("alpha must lie in (0, 1].", alpha=alpha)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "alpha", alpha)

    @property
    def n(self) -> int:
        return int(self.r.size)

    def with_alpha(self, alpha: float) -> "Instance":
        return Instance(r=self.r, v=self.v, alpha=alpha)


@dataclass(frozen=True)
class DynamicInstance:
    base: Instance
    T: int
    c: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.c)
        if c.shape != (self.base.n,):
            raise InvalidInstance("c must hold one inventory per product.", c=c.shape, n=self.base.n)
        if not np.all(np.equal(np.mod(c, 1), 0)):
            raise InvalidInstance("Inventories must be integers.")
        c = frozen_array(c, dtype=np.int64)
        if np.any(c < 1):
            raise InvalidInstance("Every inventory must be at least one unit.")
        if int(self.T) != self.T or int(self.T) < 1:
            raise InvalidInstance("T must be a positive integer.", T=self.T)
        object.__setattr__(self, "T", int(self.T))
        object.__setattr__(self, "c", c)

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def r(self) -> np.ndarray:
        return self.base.r

    @property
    def v(self) -> np.ndarray:
        return self.base.v

    @property
    def alpha(self) -> float:
        return self.base.alpha

    @property
    def c_min(self) -> int:
        return int(self.c.min())

    def with_alpha(self, alpha: float) -> "DynamicInstance":
        return DynamicInstance(base=self.base.with_alpha(alpha), T=self.T, c=self.c)


@dataclass(frozen=True)
class SalesVector:
    x0: float
    x: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "x0", float(self.x0))
        object.__setattr__(self, "x", frozen_array(self.x))

    @classmethod
    def from_weights(cls, w) -> "SalesVector":
        """Purchase probabilities induced by effective weights: x_i = w_i / (1 + sum w)."""
        w = np.asarray(w, dtype=float)
        denominator = 1.0 + w.sum()
        return cls(x0=1.0 / denominator, x=w / denominator)

    @classmethod
    def empty(cls, n: int) -> "SalesVector":
        return cls(x0=1.0, x=np.zeros(n))

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.x > 0))

    def revenue(self, inst: Instance) -> float:
        return float(np.dot(inst.r, self.x))


@dataclass(frozen=True)
class AssortmentDistribution:
    entries: tuple[tuple[tuple[int, ...], float], ...]

    def __post_init__(self) -> None:
        entries = tuple((tuple(sorted(int(i) for i in s)), float(p)) for s, p in self.entries)
        probabilities = np.array([p for _, p in entries])
        if np.any(probabilities < 0):
            raise InvalidInstance("Assortment probabilities must be nonnegative.")
        if entries and abs(probabilities.sum() - 1.0) > 1e-9:
            raise InvalidInstance("Assortment probabilities must sum to one.", total=probabilities.sum())
        chain = sorted(entries, key=lambda entry: len(entry[0]))
        for (smaller, _), (larger, _) in zip(chain, chain[1:]):
            if not set(smaller) < set(larger):
                raise InvalidInstance("Assortments must form a nested chain.")
        object.__setattr__(self, "entries", tuple(chain))

    @property
    def assortments(self) -> list[tuple[int, ...]]:
        return [s for s, _ in self.entries]

    def purchase_probabilities(self, inst: Instance) -> np.ndarray:
        x = np.zeros(inst.n)
        for assortment, probability in self.entries:
            x += probability * choice_probabilities(inst, assortment)
        return x


@dataclass(frozen=True)
class Violation:
    constraint: str
    index: int | None
    magnitude: float


def _check_indices(inst: Instance, S: Iterable[int]) -> np.ndarray:
    indices = np.fromiter((int(i) for i in S), dtype=np.int64)
    if indices.size and (indices.min() < 0 or indices.max() >= inst.n):
        raise ProductIndexError(n=inst.n, indices=sorted(set(indices.tolist())))
    return np.unique(indices)


def choice_probabilities(inst: Instance, S: Iterable[int]) -> np.ndarray:
    """Vector of phi(i, S) over all products (zero outside S)."""
    indices = _check_indices(inst, S)
    phi = np.zeros(inst.n)
    phi[indices] = inst.v[indices] / (1.0 + inst.v[indices].sum())
    return phi


def choice_prob(inst: Instance, S: Iterable[int], i: int) -> float:
    indices = _check_indices(inst, S)
    if i != NO_PURCHASE and not 0 <= i < inst.n:
        raise ProductIndexError(n=inst.n, index=i)
    denominator = 1.0 + inst.v[indices].sum()
    if i == NO_PURCHASE:
        return 1.0 / denominator
    if i not in indices:
        return 0.0
    return float(inst.v[i] / denominator)


def expected_revenue(inst: Instance, S: Iterable[int]) -> float:
    indices = _check_indices(inst, S)
    if indices.size == 0:
        return 0.0
    weights = inst.v[indices]
    return float(np.dot(inst.r[indices], weights) / (1.0 + weights.sum()))


def revenue_ordered_optimum(r, w, allowed=None) -> tuple[tuple[int, ...], float]:
    """Best revenue-ordered prefix of the allowed products under weights w.

    Exact for unconstrained MNL. Ties in revenue are scanned by product index
    and the shortest optimal prefix wins.
    """
    r = np.asarray(r, dtype=float)
    w = np.asarray(w, dtype=float)
    candidates = np.arange(r.size) if allowed is None else np.asarray(sorted(allowed), dtype=np.int64)
    if candidates.size == 0:
        return (), 0.0
    order = candidates[np.lexsort((candidates, -r[candidates]))]
    numerators = np.cumsum(r[order] * w[order])
    denominators = 1.0 + np.cumsum(w[order])
    revenues = numerators / denominators
    best = int(np.argmax(revenues))
    if revenues[best] <= 0:
        return (), 0.0
    return tuple(sorted(int(i) for i in order[: best + 1])), float(revenues[best])


def nested_chain_masses(x0, x, v) -> tuple[np.ndarray, np.ndarray]:
    """Masses of the nested chain that realizes purchase probabilities x.

    Works on a single vector or on a stack of vectors (leading axes). Products
    are ordered by x_i / v_i descending, ties by index; entry k of the returned
    masses belongs to the top-k prefix of that order (k = 0 is the empty set).
    """
    x = np.asarray(x, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    v = np.asarray(v, dtype=float)
    ratios = x / v
    order = np.argsort(-ratios, axis=-1, kind="stable")
    sorted_ratios = np.take_along_axis(ratios, order, axis=-1)
    sorted_weights = v[order]
    pad = np.zeros(x.shape[:-1] + (1,))
    heads = np.concatenate([x0[..., None], sorted_ratios], axis=-1)
    tails = np.concatenate([sorted_ratios, pad], axis=-1)
    scale = 1.0 + np.concatenate([pad, np.cumsum(sorted_weights, axis=-1)], axis=-1)
    return order, (heads - tails) * scale


def check_bms_feasible(inst: Instance, xs: SalesVector, tol: float | None = None, balancing: bool = True) -> list[Violation]:
    tol = feasibility_tol(tol)
    violations = []
    x = xs.x
    if x.shape != (inst.n,):
        raise InvalidInstance("Sales vector length does not match the instance.", x=x.shape, n=inst.n)
    total = xs.x0 + x.sum()
    if abs(total - 1.0) > tol:
        violations.append(Violation("sum_to_one", None, abs(total - 1.0)))
    if xs.x0 <= 0:
        violations.append(Violation("no_purchase_positive", None, -xs.x0))
    for i in np.flatnonzero(x < -tol):
        violations.append(Violation("nonnegative", int(i), float(-x[i])))
    caps = inst.v * xs.x0
    excess = x - caps
    for i in np.flatnonzero(excess > tol * np.maximum(1.0, caps)):
        violations.append(Violation("mnl_validity", int(i), float(excess[i])))
    if balancing and x.size:
        floor = inst.alpha * x.max()
        shortfall = floor - x
        offered = x > tol
        for i in np.flatnonzero(offered & (shortfall > tol * max(1.0, floor))):
            violations.append(Violation("balancing", int(i), float(shortfall[i])))
    return violations


def sales_to_distribution(inst: Instance, xs: SalesVector, tol: float | None = None) -> AssortmentDistribution:
    violations = check_bms_feasible(inst, xs, tol=tol, balancing=False)
    if violations:
        raise InfeasibleSalesVector(violations=[(v.constraint, v.index) for v in violations])
    x = np.clip(xs.x, 0.0, None)
    order, masses = nested_chain_masses(xs.x0, x, inst.v)
    masses = np.clip(masses, 0.0, None)
    keep = masses > PRUNE_MASS
    dropped = masses[~keep].sum()
    if dropped > 1e-12:
        logger.warning("Pruned %.3g probability mass from the nested chain", dropped)
    kept = masses[keep].sum()
    entries = [(tuple(order[:k].tolist()), masses[k] / kept) for k in np.flatnonzero(keep)]
    return AssortmentDistribution(entries=tuple(entries))
