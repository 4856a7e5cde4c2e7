"""
Pilot assignment and phase-unaware LMMSE channel estimation.

With pilot sets P_k (users sharing user k's pilot, k included):

    psi_mk   = tau_p*rho_p * sum_{j in P_k} w_mj + sigma^2
    gamma_mk = tau_p*rho_p * w_mk^2 / psi_mk        (variance of the estimate)
    c_mk     = w_mk - gamma_mk                      (variance of the error)

and the estimate is g_hat_mk = sqrt(tau_p*rho_p) * w_mk / psi_mk * y_mk, where
y_mk is the received pilot signal projected on user k's pilot.
"""
from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateInputError, ParameterError
from .streams import Stream, substream


@dataclass(frozen=True)
class PilotAssignment:
    pilot_index: np.ndarray
    tau_p: int

    @classmethod
    def from_indices(cls, indices, tau_p):
        """Fixed assignment, e.g. orthogonal pilots for a test instance."""
        indices = np.asarray(indices, dtype=int)
        if indices.ndim != 1 or indices.size < 1:
            raise ParameterError("pilot indices must be a non-empty 1-D sequence")
        if tau_p < 1 or np.any(indices < 0) or np.any(indices >= tau_p):
            raise ParameterError(f"pilot indices must lie in [0, {tau_p})")
        return cls(pilot_index=indices, tau_p=int(tau_p))

    @property
    def K(self):
        return self.pilot_index.size

    @property
    def copilot_mask(self):
        """Boolean K x K matrix, True where j is in P_k."""
        return self.pilot_index[:, None] == self.pilot_index[None, :]

    @property
    def copilot_sets(self):
        mask = self.copilot_mask
        return tuple(frozenset(np.flatnonzero(mask[k]).tolist()) for k in range(self.K))


@dataclass(frozen=True)
class EstimationStats:
    psi: np.ndarray
    gamma: np.ndarray
    c_err: np.ndarray
    estimator_gain: np.ndarray
    tau_p: int
    rho_p: float
    noise_power: float

    @property
    def pilot_snr_product(self):
        """tau_p * rho_p, the pilot energy."""
        return self.tau_p * self.rho_p


def assign_pilots(K, tau_p, seed):
    """Each user independently picks one of ``tau_p`` orthogonal pilots."""
    if K < 1:
        raise ParameterError(f"K must be at least 1, got {K}")
    if tau_p < 1:
        raise ParameterError(f"tau_p must be at least 1, got {tau_p}")
    rng = substream(seed, Stream.PILOTS)
    return PilotAssignment(pilot_index=rng.integers(0, tau_p, size=K), tau_p=int(tau_p))


def compute_estimation_stats(stats, pilots, tau_p, rho_p, noise_power):
    if tau_p < 1 or rho_p <= 0:
        raise ParameterError("tau_p must be at least 1 and rho_p positive")
    if noise_power < 0:
        raise ParameterError("noise_power must be non-negative")
    if pilots.K != stats.K:
        raise ParameterError(f"pilot assignment covers {pilots.K} users, channel stats {stats.K}")
    if np.any(pilots.pilot_index >= tau_p):
        raise ParameterError(f"pilot indices exceed tau_p={tau_p}")

    energy = tau_p * rho_p
    w = stats.ap_user.w
    psi = energy * (w @ pilots.copilot_mask.T) + noise_power
    if np.any(psi <= 0):
        raise DegenerateInputError("psi must be strictly positive for every AP-user pair")
    gamma = energy * w ** 2 / psi
    return EstimationStats(
        psi=psi,
        gamma=gamma,
        c_err=w - gamma,
        estimator_gain=np.sqrt(energy) * w / psi,
        tau_p=int(tau_p),
        rho_p=float(rho_p),
        noise_power=float(noise_power),
    )


def pilot_book(tau_p):
    """Unit-norm orthogonal pilots as the columns of a normalized DFT matrix."""
    n = np.arange(tau_p)
    return np.exp(-2j * np.pi * np.outer(n, n) / tau_p) / np.sqrt(tau_p)


def estimate_channels(realization, pilots, est, noise_seed, materialize_pilots=False):
    """
    LMMSE estimates for every (m, k), with the same leading sample axes as
    ``realization.ap_user``.

    By default the projected observation is formed directly: users on the
    same pilot see the same projected noise sample, drawn per pilot with
    variance sigma^2. With ``materialize_pilots`` the full received pilot
    block Y = sqrt(tau_p*rho_p) * G @ Phi^H + N is built and projected.
    """
    g = realization.ap_user
    sample_shape = g.shape[:-1]
    rng = substream(noise_seed, Stream.PILOT_NOISE)
    scale = np.sqrt(est.pilot_snr_product)

    if materialize_pilots:
        phi = pilot_book(pilots.tau_p)[:, pilots.pilot_index]
        noise = _complex_normal(rng, sample_shape + (pilots.tau_p,), est.noise_power)
        received = scale * (g @ phi.conj().T) + noise
        projected = received @ phi
    else:
        noise = _complex_normal(rng, sample_shape + (pilots.tau_p,), est.noise_power)
        projected = scale * (g @ pilots.copilot_mask.T.astype(float)) + noise[..., pilots.pilot_index]

    return est.estimator_gain * projected


def _complex_normal(rng, shape, variance):
    return np.sqrt(variance / 2.0) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
