"""
Dense two-phase primal simplex.

Solves  minimize c^T x  subject to  a_i^T x (<=, >=, ==) b_i,  l <= x <= u
for the few hundred variables an allocation LP has. Lower bounds are
shifted out, finite upper bounds become rows and the system is
equilibrated (alternating row/column max-norm scaling) before the
tableau is built. Entering columns follow Dantzig's rule and fall back to
Bland's rule after a streak of degenerate pivots, so the solver cannot
cycle. An optimal point is rechecked against the unscaled problem before
it is reported; a point that fails the recheck is reported as
NUMERICAL, never as INFEASIBLE.
"""
from dataclasses import dataclass, field
from enum import Enum
import logging

import numpy as np

from .exceptions import ParameterError

logger = logging.getLogger(__name__)


class Relation(str, Enum):
    LE = '<='
    GE = '>='
    EQ = '=='


class LpStatus(str, Enum):
    OPTIMAL = 'optimal'
    INFEASIBLE = 'infeasible'
    UNBOUNDED = 'unbounded'
    ITERATION_LIMIT = 'iteration_limit'
    # optimal basis whose point fails the unscaled recheck
    NUMERICAL = 'numerical'


@dataclass(frozen=True)
class SolverTolerances:
    feasibility: float = 1e-8
    optimality: float = 1e-9
    pivot: float = 1e-11
    max_iterations: int = 5000
    bland_after: int = 50
    scaling_passes: int = 10


@dataclass(frozen=True)
class Constraint:
    coefficients: np.ndarray
    relation: Relation
    bound: float
    name: str = ''


@dataclass
class LinearProgram:
    objective: np.ndarray
    constraints: list = field(default_factory=list)
    lower_bounds: np.ndarray | None = None
    upper_bounds: np.ndarray | None = None
    names: list | None = None

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float).ravel()
        n = self.objective.size
        self.lower_bounds = (
            np.zeros(n) if self.lower_bounds is None else np.asarray(self.lower_bounds, dtype=float).ravel()
        )
        self.upper_bounds = (
            np.full(n, np.inf) if self.upper_bounds is None else np.asarray(self.upper_bounds, dtype=float).ravel()
        )
        if self.lower_bounds.size != n or self.upper_bounds.size != n:
            raise ParameterError(f"bounds must have {n} entries")
        if not np.all(np.isfinite(self.lower_bounds)):
            raise ParameterError("lower bounds must be finite")
        if np.any(self.lower_bounds > self.upper_bounds):
            raise ParameterError("every lower bound must not exceed its upper bound")
        if self.names is None:
            self.names = [f"x{i}" for i in range(n)]
        elif len(self.names) != n:
            raise ParameterError(f"expected {n} variable names, got {len(self.names)}")
        constraints, self.constraints = self.constraints, []
        for constraint in constraints:
            self.add_constraint(constraint.coefficients, constraint.relation, constraint.bound, constraint.name)

    @property
    def n_variables(self):
        return self.objective.size

    def add_constraint(self, coefficients, relation, bound, name=''):
        coefficients = np.asarray(coefficients, dtype=float).ravel()
        if coefficients.size != self.n_variables:
            raise ParameterError(
                f"constraint '{name}' has {coefficients.size} coefficients, expected {self.n_variables}"
            )
        if not np.isfinite(bound) or not np.all(np.isfinite(coefficients)):
            raise ParameterError(f"constraint '{name}' has non-finite data")
        self.constraints.append(Constraint(coefficients, Relation(relation), float(bound), name))

    def matrix(self):
        """(A, relations, b) with one row per constraint."""
        n = self.n_variables
        if not self.constraints:
            return np.zeros((0, n)), [], np.zeros(0)
        A = np.vstack([c.coefficients for c in self.constraints])
        b = np.array([c.bound for c in self.constraints])
        return A, [c.relation for c in self.constraints], b

    def violations(self, x, tol=1e-8):
        """
        Independent feasibility check of ``x``. A row counts as violated when
        its excess exceeds tol*max(1, |b|, sum|a_i x_i|).
        """
        x = np.asarray(x, dtype=float)
        found = []
        for i, c in enumerate(self.constraints):
            lhs = float(c.coefficients @ x)
            if c.relation is Relation.LE:
                excess = lhs - c.bound
            elif c.relation is Relation.GE:
                excess = c.bound - lhs
            else:
                excess = abs(lhs - c.bound)
            scale = max(1.0, abs(c.bound), float(np.abs(c.coefficients * x).sum()))
            if excess > tol * scale:
                found.append(f"{c.name or f'row{i}'}: {c.relation.value} violated by {excess:.3e}")
        below = self.lower_bounds - x
        above = x - self.upper_bounds
        for i in np.flatnonzero(below > tol * np.maximum(1.0, np.abs(self.lower_bounds))):
            found.append(f"{self.names[i]}: below lower bound by {below[i]:.3e}")
        finite = np.isfinite(self.upper_bounds)
        for i in np.flatnonzero(finite & (above > tol * np.maximum(1.0, np.abs(np.where(finite, self.upper_bounds, 0.0))))):
            found.append(f"{self.names[i]}: above upper bound by {above[i]:.3e}")
        return found

    def dumps(self):
        """Plain-text dump: objective, one line per constraint, then bounds."""
        lines = [f"variables {' '.join(self.names)}"]
        lines.append("minimize " + ' '.join(repr(float(v)) for v in self.objective))
        for i, c in enumerate(self.constraints):
            coefficients = ' '.join(repr(float(v)) for v in c.coefficients)
            lines.append(f"{c.name or f'row{i}'} {coefficients} {c.relation.value} {c.bound!r}")
        for name, lo, hi in zip(self.names, self.lower_bounds, self.upper_bounds):
            lines.append(f"bound {name} {float(lo)!r} {float(hi)!r}")
        return '\n'.join(lines) + '\n'


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    x: np.ndarray | None
    objective_value: float
    iterations: int = 0

    @property
    def is_optimal(self):
        return self.status is LpStatus.OPTIMAL


def solve(lp, tolerances=None):
    tol = tolerances or SolverTolerances()
    n = lp.n_variables
    A, relations, b = lp.matrix()
    lower, upper = lp.lower_bounds, lp.upper_bounds

    b = b - A @ lower
    bounded = np.flatnonzero(np.isfinite(upper))
    if bounded.size:
        rows = np.zeros((bounded.size, n))
        rows[np.arange(bounded.size), bounded] = 1.0
        A = np.vstack([A, rows])
        b = np.concatenate([b, upper[bounded] - lower[bounded]])
        relations = list(relations) + [Relation.LE] * bounded.size

    keep = np.ones(A.shape[0], dtype=bool)
    for i in np.flatnonzero(~np.any(A != 0.0, axis=1)):
        slack = tol.feasibility * max(1.0, abs(b[i]))
        satisfied = {
            Relation.LE: b[i] >= -slack,
            Relation.GE: b[i] <= slack,
            Relation.EQ: abs(b[i]) <= slack,
        }[relations[i]]
        if not satisfied:
            logger.debug("[LP] empty row %d cannot hold", i)
            return LpSolution(LpStatus.INFEASIBLE, None, float('nan'))
        keep[i] = False
    A, b = A[keep], b[keep]
    relations = [r for r, k in zip(relations, keep) if k]

    row_scale, col_scale = _equilibrate(A, tol.scaling_passes)
    cost = lp.objective * col_scale
    cost_norm = np.abs(cost).max() if cost.size else 0.0
    if cost_norm > 0:
        cost = cost / cost_norm

    tableau = _Tableau(A * row_scale[:, None] * col_scale[None, :], relations, b * row_scale, tol)
    status = tableau.run(cost)
    if status is not LpStatus.OPTIMAL:
        logger.debug("[LP] %s after %d pivots", status.value, tableau.iterations)
        return LpSolution(status, None, float('nan'), tableau.iterations)

    x = np.clip(lower + col_scale * tableau.primal(n), lower, upper)
    problems = lp.violations(x, tol.feasibility)
    if problems:
        logger.warning("[LP] optimal basis fails the recheck: %s", '; '.join(problems[:3]))
        return LpSolution(LpStatus.NUMERICAL, None, float('nan'), tableau.iterations)
    return LpSolution(LpStatus.OPTIMAL, x, float(lp.objective @ x), tableau.iterations)


def _equilibrate(A, passes):
    m, n = A.shape
    row_scale, col_scale = np.ones(m), np.ones(n)
    if m == 0 or n == 0:
        return row_scale, col_scale
    work = np.abs(A)
    for _ in range(passes):
        row_max = work.max(axis=1)
        factor = np.where(row_max > 0, 1.0 / np.sqrt(np.where(row_max > 0, row_max, 1.0)), 1.0)
        work *= factor[:, None]
        row_scale *= factor
        col_max = work.max(axis=0)
        factor = np.where(col_max > 0, 1.0 / np.sqrt(np.where(col_max > 0, col_max, 1.0)), 1.0)
        work *= factor[None, :]
        col_scale *= factor
    return row_scale, col_scale


class _Tableau:
    """Standard-form tableau [A | slack | surplus | artificial] with b >= 0."""

    def __init__(self, A, relations, b, tol):
        self.tol = tol
        m, n = A.shape
        self.n_structural = n
        flip = b < 0
        A = np.where(flip[:, None], -A, A)
        b = np.abs(b)
        swap = {Relation.LE: Relation.GE, Relation.GE: Relation.LE, Relation.EQ: Relation.EQ}
        relations = [swap[r] if f else r for r, f in zip(relations, flip)]

        extra, artificial, basis = [], [], np.zeros(m, dtype=int)
        for i, relation in enumerate(relations):
            unit = np.zeros(m)
            unit[i] = 1.0
            if relation is Relation.LE:
                extra.append(unit)
                artificial.append(False)
            else:
                if relation is Relation.GE:
                    extra.append(-unit)
                    artificial.append(False)
                extra.append(unit)
                artificial.append(True)
            basis[i] = n + len(extra) - 1

        slack = np.column_stack(extra) if extra else np.zeros((m, 0))
        self.A0 = np.hstack([A, slack])
        self.b0 = b.copy()
        self.artificial = np.concatenate([np.zeros(n, dtype=bool), np.array(artificial, dtype=bool)])
        self.T = self.A0.copy()
        self.rhs = b.copy()
        self.basis = basis
        self.iterations = 0

    def run(self, cost):
        if self.artificial.any():
            phase_one = self.artificial.astype(float)
            status = self._iterate(phase_one, np.ones_like(self.artificial))
            if status is LpStatus.ITERATION_LIMIT:
                return status
            infeasibility = float(phase_one[self.basis] @ self.rhs)
            limit = self.tol.feasibility * max(1.0, float(self.b0.max(initial=0.0)))
            if infeasibility > limit:
                return LpStatus.INFEASIBLE
            self._drive_out_artificials()

        full_cost = np.zeros(self.T.shape[1])
        full_cost[:self.n_structural] = cost
        return self._iterate(full_cost, ~self.artificial)

    def primal(self, n):
        x = np.zeros(self.T.shape[1])
        xb = self.rhs.copy()
        if self.basis.size:
            basis_matrix = self.A0[:, self.basis]
            try:
                refined = np.linalg.solve(basis_matrix, self.b0)
            except np.linalg.LinAlgError:
                refined = None
            if refined is not None and np.all(np.isfinite(refined)):
                if np.linalg.norm(basis_matrix @ refined - self.b0) <= np.linalg.norm(basis_matrix @ xb - self.b0):
                    xb = refined
        x[self.basis] = np.maximum(xb, 0.0)
        return x[:n]

    def _iterate(self, cost, allowed):
        tol = self.tol
        degenerate_streak = 0
        while self.iterations < tol.max_iterations:
            reduced = cost - cost[self.basis] @ self.T
            reduced[~allowed] = 0.0
            reduced[self.basis] = 0.0
            candidates = np.flatnonzero(reduced < -tol.optimality)
            if candidates.size == 0:
                return LpStatus.OPTIMAL

            bland = degenerate_streak >= tol.bland_after
            entering = candidates[0] if bland else candidates[np.argmin(reduced[candidates])]

            column = self.T[:, entering]
            positive = column > tol.pivot
            if not positive.any():
                return LpStatus.UNBOUNDED
            ratios = np.full(column.size, np.inf)
            ratios[positive] = self.rhs[positive] / column[positive]
            best = ratios.min()
            ties = np.flatnonzero(ratios <= best + 1e-12 * max(1.0, abs(best)))
            if bland:
                leaving = ties[np.argmin(self.basis[ties])]
            else:
                leaving = ties[np.argmax(column[ties])]

            degenerate_streak = degenerate_streak + 1 if best <= 1e-12 else 0
            self._pivot(leaving, entering)
            self.iterations += 1
        return LpStatus.ITERATION_LIMIT

    def _pivot(self, row, col):
        pivot = self.T[row, col]
        self.T[row] /= pivot
        self.rhs[row] /= pivot
        factor = self.T[:, col].copy()
        factor[row] = 0.0
        self.T -= np.outer(factor, self.T[row])
        self.rhs -= factor * self.rhs[row]
        self.T[:, col] = 0.0
        self.T[row, col] = 1.0
        self.basis[row] = col
        tiny = (self.rhs < 0) & (self.rhs > -self.tol.feasibility)
        self.rhs[tiny] = 0.0

    def _drive_out_artificials(self):
        row = 0
        while row < self.basis.size:
            if not self.artificial[self.basis[row]]:
                row += 1
                continue
            weights = np.abs(self.T[row]) * ~self.artificial
            col = int(np.argmax(weights))
            if weights[col] > self.tol.pivot:
                self._pivot(row, col)
                row += 1
            else:
                # redundant row
                self.T = np.delete(self.T, row, axis=0)
                self.rhs = np.delete(self.rhs, row)
                self.basis = np.delete(self.basis, row)
                self.A0 = np.delete(self.A0, row, axis=0)
                self.b0 = np.delete(self.b0, row)
