"""
Dense two-phase simplex for the small linear programs the solvers build.

Problems are stated as ``max c @ x`` subject to rows tagged ``<=``, ``=`` or
``>=`` and per-variable bounds (possibly infinite). Pivoting follows Bland's
rule, so the method terminates on degenerate problems; an iteration cap
guards against numerical trouble.
"""
import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
from django.conf import settings

from .exceptions import DimensionMismatch

logger = logging.getLogger(__name__)


class Sense(str, Enum):
    LE = "<="
    EQ = "="
    GE = ">="


class LPStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    NUMERICAL_FAILURE = "numerical_failure"


@dataclass(frozen=True)
class LinearProgram:
    c: np.ndarray
    A: np.ndarray
    senses: tuple[Sense, ...]
    b: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.c, dtype=float)
        b = np.asarray(self.b, dtype=float)
        A = np.asarray(self.A, dtype=float).reshape(b.size, c.size) if b.size == 0 else np.asarray(self.A, dtype=float)
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        senses = tuple(Sense(s) for s in self.senses)
        if c.ndim != 1 or A.ndim != 2 or A.shape != (b.size, c.size):
            raise DimensionMismatch(c=c.shape, A=A.shape, b=b.shape)
        if len(senses) != b.size or lower.shape != c.shape or upper.shape != c.shape:
            raise DimensionMismatch(senses=len(senses), lower=lower.shape, upper=upper.shape)
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise DimensionMismatch("Objective, matrix and right-hand sides must be finite.")
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)) or np.any(lower == np.inf) or np.any(upper == -np.inf):
            raise DimensionMismatch("Variable bounds are malformed.")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "senses", senses)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def from_rows(cls, c, rows, lower=None, upper=None) -> "LinearProgram":
        """Build from ``(coefficients, sense, rhs)`` triples."""
        c = np.asarray(c, dtype=float)
        n = c.size
        A = np.array([np.asarray(coefficients, dtype=float) for coefficients, _, _ in rows]).reshape(len(rows), n)
        return cls(
            c=c,
            A=A,
            senses=tuple(sense for _, sense, _ in rows),
            b=np.array([rhs for _, _, rhs in rows], dtype=float),
            lower=np.zeros(n) if lower is None else lower,
            upper=np.full(n, np.inf) if upper is None else upper,
        )

    @property
    def n(self) -> int:
        return int(self.c.size)

    def residual(self, x: np.ndarray) -> float:
        """Largest absolute constraint or bound violation at x."""
        activity = self.A @ x - self.b
        worst = 0.0
        for value, sense in zip(activity, self.senses):
            if sense is Sense.LE:
                worst = max(worst, value)
            elif sense is Sense.GE:
                worst = max(worst, -value)
            else:
                worst = max(worst, abs(value))
        below = np.where(np.isfinite(self.lower), self.lower - x, 0.0)
        above = np.where(np.isfinite(self.upper), x - self.upper, 0.0)
        return float(max(worst, below.max(initial=0.0), above.max(initial=0.0)))


@dataclass(frozen=True)
class LPResult:
    status: LPStatus
    x: np.ndarray | None
    objective: float | None
    iterations: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status is LPStatus.OPTIMAL


class SimplexSolver:
    """Tableau simplex; one solve at a time per instance."""

    def __init__(self, tol=1e-9, infeasibility_tol=1e-8, max_iterations=None):
        self.tol = tol
        self.infeasibility_tol = infeasibility_tol
        self.max_iterations = max_iterations or getattr(settings, "FAIR_ASSORT_LP_MAX_ITERATIONS", 5000)
        self._tableau = None
        self._basis = None
        self.iterations = 0

    def solve(self, lp: LinearProgram) -> LPResult:
        if np.any(lp.lower > lp.upper):
            return LPResult(LPStatus.INFEASIBLE, None, None)
        D, offset, bound_rows = self._substitute(lp)
        nz = D.shape[1]
        A = lp.A @ D
        b = lp.b - lp.A @ offset
        senses = list(lp.senses)
        if bound_rows:
            extra = np.zeros((len(bound_rows), nz))
            for row, (column, bound) in enumerate(bound_rows):
                extra[row, column] = 1.0
            A = np.vstack([A, extra])
            b = np.concatenate([b, [bound for _, bound in bound_rows]])
            senses += [Sense.LE] * len(bound_rows)
        artificial = self._build_tableau(A, b, senses, nz)
        self.iterations = 0

        n_columns = self._tableau.shape[1] - 1
        phase_one = np.zeros(n_columns)
        phase_one[artificial] = 1.0
        status = self._iterate(phase_one, np.ones(n_columns, dtype=bool))
        if status is not LPStatus.OPTIMAL:
            return LPResult(LPStatus.NUMERICAL_FAILURE, None, None, self.iterations)
        infeasibility = float(phase_one[self._basis] @ self._tableau[:, -1])
        if infeasibility > self.infeasibility_tol:
            return LPResult(LPStatus.INFEASIBLE, None, None, self.iterations)
        self._drive_out_artificials(artificial)

        allowed = np.ones(n_columns, dtype=bool)
        allowed[artificial] = False
        phase_two = np.zeros(n_columns)
        phase_two[:nz] = -(lp.c @ D)
        status = self._iterate(phase_two, allowed)
        if status is not LPStatus.OPTIMAL:
            return LPResult(status, None, None, self.iterations)

        z = np.zeros(n_columns)
        z[self._basis] = self._tableau[:, -1]
        x = offset + D @ z[:nz]
        return LPResult(LPStatus.OPTIMAL, x, float(lp.c @ x), self.iterations)

    @staticmethod
    def _substitute(lp: LinearProgram):
        """Rewrite x = offset + D z with z >= 0; finite upper bounds become rows."""
        columns = []
        offset = np.zeros(lp.n)
        bound_rows = []
        for j, (low, high) in enumerate(zip(lp.lower, lp.upper)):
            if np.isfinite(low):
                offset[j] = low
                columns.append((j, 1.0))
                if np.isfinite(high):
                    bound_rows.append((len(columns) - 1, high - low))
            elif np.isfinite(high):
                offset[j] = high
                columns.append((j, -1.0))
            else:
                columns.append((j, 1.0))
                columns.append((j, -1.0))
        D = np.zeros((lp.n, len(columns)))
        for k, (j, sign) in enumerate(columns):
            D[j, k] = sign
        return D, offset, bound_rows

    def _build_tableau(self, A, b, senses, nz) -> list[int]:
        m = b.size
        flip = b < 0
        A = np.where(flip[:, None], -A, A)
        b = np.abs(b)
        senses = [
            {Sense.LE: Sense.GE, Sense.GE: Sense.LE}.get(sense, sense) if flipped else sense
            for sense, flipped in zip(senses, flip)
        ]
        n_slack = sum(sense is not Sense.EQ for sense in senses)
        n_artificial = sum(sense is not Sense.LE for sense in senses)
        tableau = np.zeros((m, nz + n_slack + n_artificial + 1))
        tableau[:, :nz] = A
        tableau[:, -1] = b
        basis = []
        artificial = []
        slack_column = nz
        artificial_column = nz + n_slack
        for row, sense in enumerate(senses):
            if sense is Sense.LE:
                tableau[row, slack_column] = 1.0
                basis.append(slack_column)
                slack_column += 1
                continue
            if sense is Sense.GE:
                tableau[row, slack_column] = -1.0
                slack_column += 1
            tableau[row, artificial_column] = 1.0
            basis.append(artificial_column)
            artificial.append(artificial_column)
            artificial_column += 1
        self._tableau = tableau
        self._basis = basis
        return artificial

    def _iterate(self, cost: np.ndarray, allowed: np.ndarray) -> LPStatus:
        tableau = self._tableau
        while self.iterations < self.max_iterations:
            reduced = cost - cost[self._basis] @ tableau[:, :-1]
            entering_candidates = np.flatnonzero((reduced < -self.tol) & allowed)
            if entering_candidates.size == 0:
                return LPStatus.OPTIMAL
            entering = int(entering_candidates[0])
            column = tableau[:, entering]
            positive = column > self.tol
            if not positive.any():
                return LPStatus.UNBOUNDED
            ratios = np.full(column.size, np.inf)
            ratios[positive] = tableau[positive, -1] / column[positive]
            best = ratios.min()
            ties = np.flatnonzero(ratios <= best + self.tol * max(1.0, abs(best)))
            leaving = int(ties[np.argmin(np.asarray(self._basis)[ties])])
            self._pivot(leaving, entering)
            self.iterations += 1
        logger.warning("Simplex stopped after %d iterations", self.iterations)
        return LPStatus.NUMERICAL_FAILURE

    def _pivot(self, row: int, column: int) -> None:
        tableau = self._tableau
        tableau[row] /= tableau[row, column]
        factors = tableau[:, column].copy()
        factors[row] = 0.0
        tableau -= np.outer(factors, tableau[row])
        rhs = tableau[:, -1]
        rhs[np.abs(rhs) < self.tol * 1e-3] = 0.0
        self._basis[row] = column

    def _drive_out_artificials(self, artificial: list[int]) -> None:
        artificial_set = set(artificial)
        row = 0
        while row < len(self._basis):
            if self._basis[row] not in artificial_set:
                row += 1
                continue
            candidates = [
                j for j in np.flatnonzero(np.abs(self._tableau[row, :-1]) > self.tol)
                if j not in artificial_set
            ]
            if candidates:
                self._pivot(row, int(candidates[0]))
                row += 1
            else:
                # Redundant equality: drop the row.
                self._tableau = np.delete(self._tableau, row, axis=0)
                del self._basis[row]


def lp_solve(lp: LinearProgram, solver: SimplexSolver | None = None) -> LPResult:
    return (solver or SimplexSolver()).solve(lp)
