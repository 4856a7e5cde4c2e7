"""
Scenario dataclasses: every physical and protocol parameter of a campaign.

Defaults reproduce the indoor deployment used throughout the experiments:
64 APs and 4 users on a 100 m square, 2 pilots, 200-sample coherence
interval, 0.1 W pilots, -96 dBm noise, 0.2 J battery budget and 1 W per AP.
"""
from dataclasses import asdict, dataclass, field, replace
import math

import numpy as np

from .exceptions import ParameterError
from .units import db_to_linear, dbm_to_watts


@dataclass(frozen=True)
class PropagationConfig:
    """
    Indoor-hotspot large-scale model constants.

    Path loss in dB with d in meters and f in GHz:
        LOS:  los_pl_intercept_db + los_pl_slope*log10(d) + los_pl_freq_coeff*log10(f)
        NLOS: max(LOS, nlos_pl_intercept_db + nlos_pl_slope*log10(d) + nlos_pl_freq_coeff*log10(f))
    Rician factor in dB for LOS links: rician_k_intercept_db - rician_k_slope_db_per_m*d.
    """
    carrier_freq_ghz: float = 3.4
    bandwidth_hz: float = 20e6

    los_pl_intercept_db: float = 32.4
    los_pl_slope: float = 17.3
    los_pl_freq_coeff: float = 20.0
    nlos_pl_intercept_db: float = 17.30
    nlos_pl_slope: float = 38.3
    nlos_pl_freq_coeff: float = 24.9

    # LOS probability: 1 up to the breakpoint, then two exponential segments
    los_prob_breakpoint_m: float = 5.0
    los_prob_decay_near_m: float = 70.8
    los_prob_far_start_m: float = 49.0
    los_prob_decay_far_m: float = 211.7
    los_prob_far_factor: float = 0.54

    shadowing_los_db: float = 3.0
    shadowing_nlos_db: float = 8.03

    rician_k_intercept_db: float = 13.0
    rician_k_slope_db_per_m: float = 0.03

    # Self-loop couplings have no distance model; total gain, pure NLOS
    user_self_loop_gain_db: float = -15.0
    ap_self_loop_gain_db: float = -15.0

    min_distance_m: float = 1.0

    def __post_init__(self):
        if self.carrier_freq_ghz <= 0:
            raise ParameterError("carrier_freq_ghz must be positive")
        if self.bandwidth_hz <= 0:
            raise ParameterError("bandwidth_hz must be positive")
        if self.min_distance_m <= 0:
            raise ParameterError("min_distance_m must be positive")
        if self.shadowing_los_db < 0 or self.shadowing_nlos_db < 0:
            raise ParameterError("shadowing standard deviations must be non-negative")
        if self.los_prob_decay_near_m <= 0 or self.los_prob_decay_far_m <= 0:
            raise ParameterError("LOS probability decay lengths must be positive")


@dataclass(frozen=True)
class OptimizerConfig:
    max_iterations: int = 50
    convergence_tol: float = 1e-5
    monotonicity_tol: float = 1e-7
    lp_feasibility_tol: float = 1e-8

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ParameterError("max_iterations must be at least 1")
        for name in ('convergence_tol', 'monotonicity_tol', 'lp_feasibility_tol'):
            if getattr(self, name) <= 0:
                raise ParameterError(f"{name} must be positive")


@dataclass(frozen=True)
class TimeSwitchingConfig:
    """Harvest-phase lengths (samples) swept for the time-switching baseline."""
    tau_d_grid: tuple = (20, 60, 100)

    def __post_init__(self):
        object.__setattr__(self, 'tau_d_grid', tuple(int(t) for t in self.tau_d_grid))
        if any(t < 0 for t in self.tau_d_grid):
            raise ParameterError("tau_d values must be non-negative")


@dataclass(frozen=True)
class Scenario:
    M: int = 64
    K: int = 4
    tau_p: int = 2
    tau_c: int = 200
    rho_p: float = 0.1
    noise_dbm: float = -96.0
    mu: float = 0.5
    rsi_db: float = -90.0
    e_max: float = 0.2
    p_max: float = 1.0
    r_th: float | tuple = 2.5
    side_length_m: float = 100.0
    height_diff_m: float = 4.0
    drops: int = 500
    seed: int = 0
    propagation: PropagationConfig = field(default_factory=PropagationConfig)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    baseline: TimeSwitchingConfig | None = field(default_factory=TimeSwitchingConfig)

    def __post_init__(self):
        if isinstance(self.r_th, (list, tuple, np.ndarray)):
            object.__setattr__(self, 'r_th', tuple(float(r) for r in self.r_th))
        self._validate()

    def _validate(self):
        if self.M < 1 or self.K < 1:
            raise ParameterError(f"M and K must be at least 1, got M={self.M}, K={self.K}")
        if self.tau_p < 1:
            raise ParameterError("tau_p must be at least 1")
        if self.tau_c <= self.tau_p:
            raise ParameterError("tau_c must exceed tau_p so that tau_u >= 1")
        if self.rho_p <= 0:
            raise ParameterError("rho_p must be positive")
        if not 0.0 <= self.mu <= 1.0:
            raise ParameterError(f"mu must lie in [0, 1], got {self.mu}")
        if not self.rsi_db < 0:
            raise ParameterError(f"rsi_db must be negative, got {self.rsi_db}")
        if self.e_max < 0:
            raise ParameterError("e_max must be non-negative")
        if self.p_max <= 0:
            raise ParameterError("p_max must be positive")
        if self.side_length_m <= 0:
            raise ParameterError("side_length_m must be positive")
        if self.height_diff_m < 0:
            raise ParameterError("height_diff_m must be non-negative")
        if self.drops < 1:
            raise ParameterError("drops must be at least 1")
        if self.seed < 0:
            raise ParameterError("seed must be non-negative")
        rates = self.rate_demands
        if rates.shape != (self.K,):
            raise ParameterError(f"r_th must be a scalar or a list of {self.K} values")
        if np.any(rates < 0) or not np.all(np.isfinite(rates)):
            raise ParameterError("rate demands must be finite and non-negative")
        if self.baseline is not None:
            for tau_d in self.baseline.tau_d_grid:
                if self.tau_p + tau_d >= self.tau_c:
                    raise ParameterError(
                        f"tau_d={tau_d} leaves no uplink samples (tau_p={self.tau_p}, tau_c={self.tau_c})"
                    )

    @property
    def tau_u(self):
        return self.tau_c - self.tau_p

    def ts_tau_u(self, tau_d):
        """Uplink samples left when ``tau_d`` samples are spent harvesting."""
        tau_u = self.tau_c - self.tau_p - int(tau_d)
        if tau_d < 0 or tau_u < 1:
            raise ParameterError(f"tau_d={tau_d} is incompatible with tau_c={self.tau_c}, tau_p={self.tau_p}")
        return tau_u

    @property
    def noise_power(self):
        return float(dbm_to_watts(self.noise_dbm))

    @property
    def rsi(self):
        """Per-AP residual self-interference level (linear)."""
        return np.full(self.M, float(db_to_linear(self.rsi_db)))

    @property
    def rate_demands(self):
        if isinstance(self.r_th, tuple):
            return np.asarray(self.r_th, dtype=float)
        return np.full(self.K, float(self.r_th))

    def with_overrides(self, **changes):
        return replace(self, **changes)

    def to_dict(self):
        data = asdict(self)
        if isinstance(self.r_th, tuple):
            data['r_th'] = list(self.r_th)
        if self.baseline is not None:
            data['baseline']['tau_d_grid'] = list(self.baseline.tau_d_grid)
        if math.isinf(self.rsi_db):
            data['rsi_db'] = None
        return data
