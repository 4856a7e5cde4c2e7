"""
Battery-energy minimization by alternating optimization.

For fixed receive filters every constraint is linear in the AP powers
p_mk and the user powers (eta_e, eta_b), so the power step is an LP:

    minimize    sum_k tau_u * eta_b_k
    subject to  eta_k|a^H B_k|^2 (1 + G_k) >= G_k (sum_j eta_j a^H C_kj a + sum_qj p_qj a^H F_kqj a + a^H D_k a)
                tau_u * eta_e_k <= E_k(p, eta)          harvested energy
                tau_u * eta_b_k <= E_max                battery
                sum_k p_mk * gamma_mk <= P_max          per AP
                p, eta_e, eta_b >= 0

with eta_k = eta_e_k + eta_b_k and G_k the SINR threshold. The filter step
maximizes each user's generalized Rayleigh quotient, a_k ~ Sigma_k^-1 B_k,
which can only raise every SINR. The previous powers therefore stay
feasible and the objective never increases.

The battery LP stops at the first vertex meeting the rate floors and
leaves harvested energy unused. Once the loop settles, a second LP keeps
eta_b fixed and maximizes sum_k eta_e_k over the same constraints, so
every joule the rate and harvest rows allow goes into uplink data.

The time-switching baseline spends tau_d extra samples on downlink-only
harvesting: users are silent while harvesting and APs are silent during
the uplink, so there is neither user-to-user harvesting nor residual
self-interference.
"""
from dataclasses import dataclass, field, replace
import logging

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .closedform import (
    effective_sinr_all,
    harvest_coefficients,
    sinr_coefficients,
    sinr_threshold,
    spectral_efficiency,
    stats_matrices,
)
from .exceptions import DegenerateInputError, ParameterError
from .lpsolver import LinearProgram, LpStatus, Relation, SolverTolerances, solve

logger = logging.getLogger(__name__)

# objective values at or below this are treated as exactly zero
_ZERO_OBJECTIVE = 1e-12


@dataclass(frozen=True)
class Allocation:
    p_dl: np.ndarray
    eta_e: np.ndarray
    eta_b: np.ndarray
    alpha: np.ndarray

    @property
    def eta(self):
        return self.eta_e + self.eta_b

    @classmethod
    def initial(cls, M, K):
        """Zero powers with the all-ones filters the alternating loop starts from."""
        return cls(
            p_dl=np.zeros((M, K)),
            eta_e=np.zeros(K),
            eta_b=np.zeros(K),
            alpha=np.ones((K, M), dtype=complex),
        )

    def with_filters(self, alpha):
        return replace(self, alpha=np.asarray(alpha, dtype=complex))


@dataclass(frozen=True)
class ProblemInstance:
    """One drop's allocation problem under one protocol."""
    label: str
    matrices: object
    harvest: object
    gamma: np.ndarray
    tau_u: int
    tau_c: int
    rate_demands: np.ndarray
    e_max: float
    p_max: float

    @property
    def M(self):
        return self.gamma.shape[0]

    @property
    def K(self):
        return self.gamma.shape[1]

    @property
    def sinr_threshold(self):
        return sinr_threshold(self.rate_demands, self.tau_u, self.tau_c)


@dataclass
class OptimizerOutcome:
    label: str
    feasible: bool
    allocation: Allocation | None
    objective_trace: list = field(default_factory=list)
    iterations: int = 0
    per_user_se: np.ndarray | None = None
    battery_fraction: np.ndarray | None = None
    sinr: np.ndarray | None = None
    harvested_energy: np.ndarray | None = None
    anomaly: str | None = None
    violations: list = field(default_factory=list)

    @property
    def objective(self):
        return self.objective_trace[-1] if self.objective_trace else float('nan')

    @property
    def first_objective(self):
        return self.objective_trace[0] if self.objective_trace else float('nan')


def _per_user(values, K):
    values = np.asarray(values, dtype=float)
    if values.ndim == 0:
        return np.full(K, float(values))
    if values.shape != (K,):
        raise ParameterError(f"expected a scalar or {K} per-user values")
    return values.copy()


def proposed_instance(scenario, drop, *, rsi=None, rate_demands=None, mu=None,
                      self_recycling=True, label='proposed'):
    """Simultaneous uplink and harvesting: tau_harvest = tau_u, with self-interference."""
    est, stats, pilots = drop.estimation, drop.stats, drop.pilots
    rsi = scenario.rsi if rsi is None else rsi
    mu = scenario.mu if mu is None else mu
    rates = scenario.rate_demands if rate_demands is None else rate_demands
    return ProblemInstance(
        label=label,
        matrices=stats_matrices(est, stats, pilots, rsi),
        harvest=harvest_coefficients(est, stats, pilots, mu, scenario.tau_u, self_recycling=self_recycling),
        gamma=est.gamma,
        tau_u=scenario.tau_u,
        tau_c=scenario.tau_c,
        rate_demands=_per_user(rates, scenario.K),
        e_max=scenario.e_max,
        p_max=scenario.p_max,
    )


def ts_instance(scenario, drop, tau_d, *, rate_demands=None, mu=None, label=None):
    """Time switching: tau_d harvest-only samples, tau_u = tau_c - tau_p - tau_d."""
    est, stats, pilots = drop.estimation, drop.stats, drop.pilots
    tau_u = scenario.ts_tau_u(tau_d)
    mu = scenario.mu if mu is None else mu
    rates = scenario.rate_demands if rate_demands is None else rate_demands
    return ProblemInstance(
        label=label or f"ts_tau{int(tau_d)}",
        matrices=stats_matrices(est, stats, pilots, np.zeros(scenario.M)),
        harvest=harvest_coefficients(est, stats, pilots, mu, tau_d, include_users=False),
        gamma=est.gamma,
        tau_u=tau_u,
        tau_c=scenario.tau_c,
        rate_demands=_per_user(rates, scenario.K),
        e_max=scenario.e_max,
        p_max=scenario.p_max,
    )


def variable_names(M, K):
    return (
        [f"p[{m},{j}]" for m in range(M) for j in range(K)]
        + [f"eta_e[{k}]" for k in range(K)]
        + [f"eta_b[{k}]" for k in range(K)]
    )


def _normalized(row, bound):
    scale = max(float(np.abs(row).max(initial=0.0)), abs(bound))
    if scale > 0:
        return row / scale, bound / scale
    return row, bound


def build_lp(instance, alpha):
    """Power-allocation LP for fixed filters ``alpha`` (K x M)."""
    M, K = instance.M, instance.K
    n_p = M * K
    alpha = np.asarray(alpha, dtype=complex)
    if alpha.shape != (K, M):
        raise ParameterError(f"filters must have shape ({K}, {M})")

    objective = np.zeros(n_p + 2 * K)
    objective[n_p + K:] = instance.tau_u
    upper = np.full(n_p + 2 * K, np.inf)
    upper[n_p + K:] = instance.e_max / instance.tau_u
    lp = LinearProgram(objective=objective, upper_bounds=upper, names=variable_names(M, K))

    thresholds = instance.sinr_threshold
    for k in range(K):
        coeffs = sinr_coefficients(instance.matrices, alpha[k], k)
        target = thresholds[k]
        eta_part = -target * coeffs.interference
        eta_part[k] += (1.0 + target) * coeffs.desired
        row = np.concatenate([-target * coeffs.self_interference.ravel(), eta_part, eta_part])
        coefficients, bound = _normalized(row, target * coeffs.noise)
        lp.add_constraint(coefficients, Relation.GE, bound, name=f"sinr[{k}]")

    ap_total = instance.harvest.ap_total
    from_users = instance.harvest.from_users
    for k in range(K):
        eta_e = -from_users[k].copy()
        eta_e[k] += instance.tau_u
        row = np.concatenate([-ap_total[k].ravel(), eta_e, -from_users[k]])
        coefficients, bound = _normalized(row, 0.0)
        lp.add_constraint(coefficients, Relation.LE, bound, name=f"harvest[{k}]")

    for m in range(M):
        p_part = np.zeros((M, K))
        p_part[m] = instance.gamma[m]
        row = np.concatenate([p_part.ravel(), np.zeros(2 * K)])
        coefficients, bound = _normalized(row, instance.p_max)
        lp.add_constraint(coefficients, Relation.LE, bound, name=f"ap_power[{m}]")
    return lp


def build_spending_lp(instance, alloc):
    """
    The power LP at ``alloc.alpha`` with the battery draw pinned to
    ``alloc.eta_b``, maximizing the harvested power users transmit.
    """
    M, K = instance.M, instance.K
    n_p = M * K
    lp = build_lp(instance, alloc.alpha)
    objective = np.zeros(n_p + 2 * K)
    objective[n_p:n_p + K] = -instance.tau_u
    lower = np.zeros(n_p + 2 * K)
    lower[n_p + K:] = alloc.eta_b
    upper = lp.upper_bounds.copy()
    upper[n_p + K:] = alloc.eta_b
    return LinearProgram(
        objective=objective,
        constraints=lp.constraints,
        lower_bounds=lower,
        upper_bounds=upper,
        names=lp.names,
    )


def spend_harvest(instance, alloc, tolerances=None):
    """
    Send all the harvested energy the constraints allow into uplink data,
    then refresh the filters. ``alloc`` must be feasible for ``instance``;
    the battery draw and so the objective are unchanged.
    """
    solution = solve(build_spending_lp(instance, alloc), tolerances)
    if not solution.is_optimal:
        logger.warning(
            "[Optimizer] %s: spending LP %s; harvested energy left unspent", instance.label, solution.status.value
        )
        return alloc
    spent = unpack_solution(solution.x, instance.M, instance.K, alloc.alpha)
    return spent.with_filters(update_filters(instance.matrices, spent))


def unpack_solution(x, M, K, alpha):
    n_p = M * K
    return Allocation(
        p_dl=x[:n_p].reshape(M, K).copy(),
        eta_e=x[n_p:n_p + K].copy(),
        eta_b=x[n_p + K:].copy(),
        alpha=np.asarray(alpha, dtype=complex),
    )


def update_filters(matrices, alloc):
    """Per-user maximizer of the generalized Rayleigh quotient, unit norm."""
    covariance = matrices.covariance(alloc.p_dl, alloc.eta)
    alpha = np.empty((matrices.K, matrices.M), dtype=complex)
    for k in range(matrices.K):
        sigma = covariance[k]
        scale = float(np.max(np.diag(sigma)))
        if not np.isfinite(scale) or scale <= 0:
            raise DegenerateInputError(f"filter covariance of user {k} is zero or not finite")
        try:
            factor = cho_factor(sigma / scale)
        except LinAlgError as exc:
            raise DegenerateInputError(f"filter covariance of user {k} is singular") from exc
        direction = cho_solve(factor, matrices.b[k] / scale)
        norm = np.linalg.norm(direction)
        if norm == 0 or not np.isfinite(norm):
            raise DegenerateInputError(f"user {k} has no usable channel estimate")
        alpha[k] = direction / norm
    return alpha


def check_allocation(instance, alloc, rtol=1e-6):
    """
    Re-evaluate every constraint from the closed forms. Returns a list of
    human-readable violations, empty when the allocation is feasible.
    """
    problems = []
    if np.any(alloc.p_dl < 0) or np.any(alloc.eta_e < 0) or np.any(alloc.eta_b < 0):
        problems.append("negative power")

    def exceeds(lhs, rhs):
        return lhs > rhs + rtol * max(abs(lhs), abs(rhs))

    sinr = effective_sinr_all(instance.matrices, alloc)
    for k, (value, target) in enumerate(zip(sinr, instance.sinr_threshold)):
        if exceeds(target, value):
            problems.append(f"user {k}: SINR {value:.6e} below threshold {target:.6e}")

    energy = instance.harvest.energy(alloc.p_dl, alloc.eta)
    for k in range(instance.K):
        drawn = instance.tau_u * alloc.eta_e[k]
        if exceeds(drawn, energy[k]):
            problems.append(f"user {k}: draws {drawn:.6e} J of {energy[k]:.6e} J harvested")
        battery = instance.tau_u * alloc.eta_b[k]
        if exceeds(battery, instance.e_max):
            problems.append(f"user {k}: battery draw {battery:.6e} J exceeds {instance.e_max} J")

    ap_power = np.sum(alloc.p_dl * instance.gamma, axis=1)
    for m in np.flatnonzero([exceeds(value, instance.p_max) for value in ap_power]):
        problems.append(f"AP {m}: transmit power {ap_power[m]:.6e} W exceeds {instance.p_max} W")
    return problems


def battery_fraction(alloc):
    total = alloc.eta_e + alloc.eta_b
    return np.divide(alloc.eta_b, total, out=np.zeros_like(total), where=total > 0)


def run_alternating(instance, config):
    """Alternate LP power steps and filter updates until the objective settles."""
    tolerances = SolverTolerances(feasibility=config.lp_feasibility_tol)
    alpha = np.ones((instance.K, instance.M), dtype=complex)
    trace, last, anomaly = [], None, None
    iterations = 0

    for iteration in range(1, config.max_iterations + 1):
        iterations = iteration
        solution = solve(build_lp(instance, alpha), tolerances)
        if not solution.is_optimal:
            if last is None:
                if solution.status is LpStatus.INFEASIBLE:
                    logger.debug("[Optimizer] %s: LP infeasible at the first iteration, outage", instance.label)
                else:
                    anomaly = f"LP {solution.status.value} at the first iteration"
                    logger.warning("[Optimizer] %s: %s, counted as outage", instance.label, anomaly)
                return OptimizerOutcome(
                    label=instance.label,
                    feasible=False,
                    allocation=None,
                    iterations=iteration,
                    per_user_se=np.zeros(instance.K),
                    battery_fraction=np.zeros(instance.K),
                    anomaly=anomaly,
                )
            anomaly = f"LP {solution.status.value} at iteration {iteration} after a feasible iterate"
            logger.warning("[Optimizer] %s: %s; keeping the last feasible allocation", instance.label, anomaly)
            break

        current = unpack_solution(solution.x, instance.M, instance.K, alpha)
        objective = solution.objective_value
        if trace and objective > trace[-1] + config.monotonicity_tol * max(1.0, abs(trace[-1])):
            logger.warning(
                "[Optimizer] %s: objective rose from %.9e to %.9e at iteration %d",
                instance.label, trace[-1], objective, iteration,
            )
        trace.append(objective)
        last = current
        logger.debug("[Optimizer] %s iteration %d objective %.9e", instance.label, iteration, objective)

        if objective <= _ZERO_OBJECTIVE:
            break
        if len(trace) >= 2 and abs(trace[-1] - trace[-2]) <= config.convergence_tol * max(1.0, abs(trace[-1])):
            break
        alpha = update_filters(instance.matrices, current)

    final = last.with_filters(update_filters(instance.matrices, last))
    final = spend_harvest(instance, final, tolerances)
    sinr = effective_sinr_all(instance.matrices, final)
    outcome = OptimizerOutcome(
        label=instance.label,
        feasible=True,
        allocation=final,
        objective_trace=trace,
        iterations=iterations,
        per_user_se=spectral_efficiency(sinr, instance.tau_u, instance.tau_c),
        battery_fraction=battery_fraction(final),
        sinr=sinr,
        harvested_energy=instance.harvest.energy(final.p_dl, final.eta),
        anomaly=anomaly,
    )
    outcome.violations = check_allocation(instance, final)
    if outcome.violations:
        logger.warning("[Optimizer] %s: recheck found %s", instance.label, '; '.join(outcome.violations))
    return outcome


def optimize(scenario, drop, **overrides):
    """Proposed scheme. ``overrides`` go to ``proposed_instance`` (rsi, rate_demands, mu, ...)."""
    return run_alternating(proposed_instance(scenario, drop, **overrides), scenario.optimizer)


def optimize_ts_baseline(scenario, drop, tau_d, **overrides):
    return run_alternating(ts_instance(scenario, drop, tau_d, **overrides), scenario.optimizer)
