"""
Per-drop outcomes and the aggregates reported for a campaign.

Battery fraction, spectral efficiency and objective are averaged over
feasible drops only; outage is the share of infeasible drops.
"""
from dataclasses import dataclass, field
import math

import numpy as np

PROPOSED = 'proposed'
NO_SELF_RECYCLING = 'proposed_no_self_recycling'

METRICS = ('outage_rate', 'battery_fraction', 'se_per_user', 'objective', 'iterations')


def _finite_or_none(value):
    value = float(value)
    return value if math.isfinite(value) else None


def _float_list(values):
    if values is None:
        return []
    return [float(v) for v in np.asarray(values, dtype=float).ravel()]


@dataclass
class DropResult:
    drop_index: int
    algorithm: str
    feasible: bool
    objective: float | None = None
    first_objective: float | None = None
    iterations: int = 0
    per_user_se: list = field(default_factory=list)
    battery_fraction: list = field(default_factory=list)
    objective_trace: list = field(default_factory=list)
    anomaly: str | None = None
    violations: list = field(default_factory=list)
    sweep_var: str = ''
    sweep_value: float | None = None

    @classmethod
    def from_outcome(cls, drop_index, outcome, sweep_var='', sweep_value=None, algorithm=None):
        return cls(
            drop_index=int(drop_index),
            algorithm=algorithm or outcome.label,
            feasible=bool(outcome.feasible),
            objective=_finite_or_none(outcome.objective) if outcome.feasible else None,
            first_objective=_finite_or_none(outcome.first_objective) if outcome.feasible else None,
            iterations=int(outcome.iterations),
            per_user_se=_float_list(outcome.per_user_se),
            battery_fraction=_float_list(outcome.battery_fraction),
            objective_trace=[float(v) for v in outcome.objective_trace],
            anomaly=outcome.anomaly,
            violations=list(outcome.violations),
            sweep_var=sweep_var,
            sweep_value=None if sweep_value is None else float(sweep_value),
        )

    @classmethod
    def skipped_outage(cls, drop_index, algorithm, K, sweep_var, sweep_value):
        """Outage implied by infeasibility at a lower rate demand; not solved."""
        return cls(
            drop_index=int(drop_index),
            algorithm=algorithm,
            feasible=False,
            per_user_se=[0.0] * K,
            battery_fraction=[0.0] * K,
            sweep_var=sweep_var,
            sweep_value=float(sweep_value),
        )

    def at(self, sweep_var, sweep_value):
        """Copy placed at another sweep point (results that do not depend on it)."""
        copy = DropResult(**self.to_dict())
        copy.sweep_var = sweep_var
        copy.sweep_value = float(sweep_value)
        return copy

    @property
    def mean_se(self):
        return float(np.mean(self.per_user_se)) if self.per_user_se else 0.0

    @property
    def mean_battery_fraction(self):
        return float(np.mean(self.battery_fraction)) if self.battery_fraction else 0.0

    def to_dict(self):
        return {
            'drop_index': self.drop_index,
            'algorithm': self.algorithm,
            'feasible': self.feasible,
            'objective': self.objective,
            'first_objective': self.first_objective,
            'iterations': self.iterations,
            'per_user_se': list(self.per_user_se),
            'battery_fraction': list(self.battery_fraction),
            'objective_trace': list(self.objective_trace),
            'anomaly': self.anomaly,
            'violations': list(self.violations),
            'sweep_var': self.sweep_var,
            'sweep_value': self.sweep_value,
        }

    def record_data(self):
        """The JSON payload stored on a DropRecord."""
        return {
            'per_user_se': list(self.per_user_se),
            'battery_fraction': list(self.battery_fraction),
            'objective_trace': list(self.objective_trace),
            'first_objective': self.first_objective,
            'anomaly': self.anomaly,
            'violations': list(self.violations),
        }


def _mean_and_stderr(values):
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return math.nan, math.nan
    if values.size == 1:
        return float(values[0]), math.nan
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(values.size))


@dataclass
class CampaignResult:
    kind: str
    drops: list = field(default_factory=list)
    sweep_var: str = ''

    def algorithms(self):
        """Algorithm labels in first-seen order."""
        return list(dict.fromkeys(d.algorithm for d in self.drops))

    def sweep_values(self):
        return list(dict.fromkeys(d.sweep_value for d in self.drops))

    def select(self, algorithm=None, sweep_value=None, feasible=None):
        selected = self.drops
        if algorithm is not None:
            selected = [d for d in selected if d.algorithm == algorithm]
        if sweep_value is not None:
            selected = [d for d in selected if d.sweep_value == sweep_value]
        if feasible is not None:
            selected = [d for d in selected if d.feasible == feasible]
        return selected

    def by_drop(self, algorithm, sweep_value=None):
        return {d.drop_index: d for d in self.select(algorithm, sweep_value)}

    def outage_rate(self, algorithm, sweep_value=None):
        selected = self.select(algorithm, sweep_value)
        if not selected:
            return math.nan
        return sum(not d.feasible for d in selected) / len(selected)

    def mean_battery_fraction(self, algorithm, sweep_value=None):
        return _mean_and_stderr([d.mean_battery_fraction for d in self.select(algorithm, sweep_value, True)])[0]

    def mean_se(self, algorithm, sweep_value=None):
        return _mean_and_stderr([d.mean_se for d in self.select(algorithm, sweep_value, True)])[0]

    def metric(self, name, algorithm, sweep_value=None):
        """(value, stderr) of one aggregate."""
        if name == 'outage_rate':
            n = len(self.select(algorithm, sweep_value))
            rate = self.outage_rate(algorithm, sweep_value)
            stderr = math.sqrt(rate * (1.0 - rate) / n) if n else math.nan
            return rate, stderr
        feasible = self.select(algorithm, sweep_value, True)
        values = {
            'battery_fraction': [d.mean_battery_fraction for d in feasible],
            'se_per_user': [d.mean_se for d in feasible],
            'objective': [d.objective for d in feasible],
            'iterations': [d.iterations for d in feasible],
        }[name]
        return _mean_and_stderr(values)

    def aggregate_rows(self, metrics=METRICS):
        """Long-format rows (sweep_var, sweep_value, algorithm, metric, value, stderr)."""
        rows = []
        for sweep_value in self.sweep_values():
            for algorithm in self.algorithms():
                if not self.select(algorithm, sweep_value):
                    continue
                for name in metrics:
                    value, stderr = self.metric(name, algorithm, sweep_value)
                    rows.append((self.sweep_var, sweep_value, algorithm, name, value, stderr))
        return rows

    def mean_trace(self, algorithm, sweep_value=None):
        """
        Objective per iteration averaged over feasible drops. Traces that
        stopped early hold their last value.
        """
        traces = [d.objective_trace for d in self.select(algorithm, sweep_value, True) if d.objective_trace]
        if not traces:
            return np.zeros(0), np.zeros(0)
        length = max(len(t) for t in traces)
        padded = np.array([t + [t[-1]] * (length - len(t)) for t in traces])
        if len(traces) == 1:
            return padded[0], np.full(length, math.nan)
        return padded.mean(axis=0), padded.std(axis=0, ddof=1) / math.sqrt(len(traces))

    def trace_rows(self, algorithm=PROPOSED):
        rows = []
        for sweep_value in self.sweep_values():
            mean, stderr = self.mean_trace(algorithm, sweep_value)
            for i, (value, err) in enumerate(zip(mean, stderr), start=1):
                rows.append((self.sweep_var, sweep_value, algorithm, f"objective_iter_{i}", float(value), float(err)))
        return rows


def crossover_bracket(grid, proposed, reference):
    """
    Sweep values (low, high) between which the proposed curve stops being
    at or below the reference: low is the largest grid value where it is,
    high the next grid value. None when the proposed curve is never at or
    below the reference; high is None when it stays there over the grid.
    """
    order = np.argsort(grid)
    grid = np.asarray(grid, dtype=float)[order]
    below = np.asarray(proposed, dtype=float)[order] <= np.asarray(reference, dtype=float)[order]
    if not below.any():
        return None
    last = int(np.flatnonzero(below)[-1])
    high = float(grid[last + 1]) if last + 1 < grid.size else None
    return float(grid[last]), high


def is_non_decreasing(values, tol=0.0):
    values = [v for v in values if not math.isnan(v)]
    return all(b >= a - tol for a, b in zip(values, values[1:]))


def is_non_increasing(values, tol=0.0):
    values = [v for v in values if not math.isnan(v)]
    return all(b <= a + tol for a, b in zip(values, values[1:]))
