"""
Closed-form statistics of the uplink-while-harvesting phase.

Harvested energy of user k over ``tau`` samples with efficiency ``mu`` is
linear in the AP powers p_mj and the user transmit powers eta_j:

    E_k = mu*tau * ( sum_mj p_mj*gamma_mj*w_mk
                     + sum_j eta_j*ww_kj
                     + (tau_p*rho_p)^2 sum_m sum_{j: k in P_j} p_mj*(w_mj/psi_mj)^2*(2|h_mk|^2*beta_mk + beta_mk^2) )

The effective SINR for a fixed receive filter alpha_k is

    Gamma_k = eta_k|a^H B_k|^2 / ( sum_j eta_j a^H C_kj a - eta_k|a^H B_k|^2
                                    + sum_qj p_qj a^H F_kqj a + a^H D_k a )

B, C, D and F are the expectations that define them under the channel
model; ``FormulaVariant`` selects how the typeset element formulas are read.
"""
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .exceptions import ParameterError


class FormulaVariant(str, Enum):
    # Exact expectations under the channel model (pilot energy tau_p*rho_p)
    EXACT = 'exact'
    # Typeset element formulas with tau_p, including the typeset F self-AP branch
    PRINTED = 'printed'
    # Typeset element formulas taken literally with the harvest length tau_d
    LITERAL_TAU = 'literal_tau'


@dataclass(frozen=True)
class HarvestCoefficients:
    """
    Linear form of the harvested energy. AP coefficients are indexed
    [k, m, j] (energy at user k per unit p_mj), user coefficients [k, j].
    """
    from_ap: np.ndarray
    from_users: np.ndarray
    contamination: np.ndarray
    mu: float
    tau_harvest: float

    @property
    def ap_total(self):
        return self.from_ap + self.contamination

    def energy(self, p_dl, eta):
        """Harvested energy per user for AP powers ``p_dl`` (M x K) and user powers ``eta`` (K)."""
        p_dl = np.asarray(p_dl, dtype=float)
        return np.einsum('kmj,mj->k', self.ap_total, p_dl) + self.from_users @ np.asarray(eta, dtype=float)


@dataclass(frozen=True)
class StatsMatrices:
    """
    Uplink statistics in the layout the LP and the filter update consume:

        b  (K, M)          B_k
        c  (K, K, M, M)    C_kj, real symmetric
        d  (K, M)          diagonal of D_k
        f  (K, M, K, M)    diagonal of F_kqj as f[k, q, j, m]; off-diagonals are zero
    """
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    f: np.ndarray
    rsi: np.ndarray
    noise_power: float
    variant: FormulaVariant = FormulaVariant.EXACT

    @property
    def M(self):
        return self.b.shape[1]

    @property
    def K(self):
        return self.b.shape[0]

    def f_aggregate(self, p_dl):
        """Diagonal of sum_qj p_qj F_kqj for every k, shape (K, M)."""
        return np.einsum('kqjm,qj->km', self.f, np.asarray(p_dl, dtype=float))

    def interference(self, eta):
        """sum_j eta_j C_kj for every k, shape (K, M, M)."""
        return np.einsum('kjmn,j->kmn', self.c, np.asarray(eta, dtype=float))

    def covariance(self, p_dl, eta):
        """Rayleigh-quotient denominator matrix per user, shape (K, M, M)."""
        cov = self.interference(eta)
        diag = self.f_aggregate(p_dl) + self.d
        idx = np.arange(self.M)
        cov[:, idx, idx] += diag
        return cov


class SinrCoefficients(NamedTuple):
    """Quadratic forms of one user's filter; every SINR term is linear in them."""
    desired: float           # |a^H B_k|^2
    interference: np.ndarray  # a^H C_kj a, shape (K,)
    self_interference: np.ndarray  # a^H F_kqj a, shape (M, K)
    noise: float             # a^H D_k a


def harvest_coefficients(est, stats, pilots, mu, tau_harvest, *, include_users=True, self_recycling=True):
    """
    Decompose the harvested energy into per-power coefficients.

    ``include_users=False`` drops the user-to-user term (a harvest phase
    where users are silent); ``self_recycling=False`` drops only the
    user's own self-loop.
    """
    if not 0.0 <= mu <= 1.0:
        raise ParameterError(f"mu must lie in [0, 1], got {mu}")
    if tau_harvest < 0:
        raise ParameterError("tau_harvest must be non-negative")

    scale = mu * tau_harvest
    w = stats.ap_user.w
    beta = stats.ap_user.beta
    los = stats.ap_user.los_amplitude
    mask = pilots.copilot_mask

    from_ap = scale * w.T[:, :, None] * est.gamma[None, :, :]
    fourth = 2.0 * los ** 2 * beta + beta ** 2
    ratio2 = (w / est.psi) ** 2
    contamination = (
        scale * est.pilot_snr_product ** 2
        * fourth.T[:, :, None] * ratio2[None, :, :] * mask[:, None, :]
    )

    from_users = scale * stats.user_user.w if include_users else np.zeros((stats.K, stats.K))
    if not self_recycling:
        from_users = from_users.copy()
        np.fill_diagonal(from_users, 0.0)

    return HarvestCoefficients(
        from_ap=from_ap,
        from_users=from_users,
        contamination=contamination,
        mu=float(mu),
        tau_harvest=float(tau_harvest),
    )


def stats_matrices(est, stats, pilots, rsi, *, variant=FormulaVariant.EXACT, literal_tau=None):
    """
    Build B, C, D and F. ``rsi`` is the per-AP residual self-interference
    level (a scalar is broadcast). ``literal_tau`` is the harvest length
    substituted for tau_p when ``variant`` is LITERAL_TAU.
    """
    variant = FormulaVariant(variant)
    M, K = stats.M, stats.K
    rsi = np.broadcast_to(np.asarray(rsi, dtype=float), (M,)).copy()
    if np.any(rsi < 0) or np.any(rsi >= 1):
        raise ParameterError("residual self-interference must lie in [0, 1)")

    if variant is FormulaVariant.LITERAL_TAU:
        if literal_tau is None or literal_tau < 0:
            raise ParameterError("LITERAL_TAU needs a non-negative literal_tau")
        energy = literal_tau * est.rho_p
    else:
        energy = est.pilot_snr_product

    w = stats.ap_user.w
    beta = stats.ap_user.beta
    los = stats.ap_user.los_amplitude
    gamma = est.gamma
    mask = pilots.copilot_mask.astype(float)
    ratio = w / est.psi
    fourth = 2.0 * los ** 2 * beta + beta ** 2

    b = (energy * w * ratio).T

    # cross[m, k, j] = E[conj(g_hat_mk) g_mj]
    cross = energy * ratio[:, :, None] * w[:, None, :] * mask[None, :, :]
    c = np.einsum('mkj,nkj->kjmn', cross, cross)
    idx = np.arange(M)
    c[:, :, idx, idx] = (
        gamma.T[:, None, :] * w.T[None, :, :]
        + mask[:, :, None] * energy ** 2 * (ratio.T ** 2)[:, None, :] * fourth.T[None, :, :]
    )
    c = 0.5 * (c + np.swapaxes(c, -1, -2))

    d = est.noise_power * gamma.T

    w_ap = stats.ap_ap.w
    f = (
        rsi[None, None, None, :]
        * w_ap.T[None, :, None, :]
        * gamma.T[:, None, None, :]
        * gamma[None, :, :, None]
    )
    # same-AP branch, q = m; self_term[k, j, m] = E|g_hat_mk|^2 |g_hat_mj|^2 under the chosen reading
    gg = gamma.T[:, None, :] * gamma.T[None, :, :]
    if variant is FormulaVariant.EXACT:
        los4 = (los ** 4) @ mask.T
        ratio_pair = ratio.T[:, None, :] * ratio.T[None, :, :]
        self_term = gg + mask[:, :, None] * (gg - energy ** 4 * ratio_pair ** 2 * los4.T[:, None, :])
    else:
        self_term = gg + mask[:, :, None] * (
            energy ** 2 * (ratio.T ** 2)[:, None, :] * fourth.T[None, :, :]
            + gamma.T[:, None, :] * est.c_err.T[None, :, :]
        )
    f[:, idx, :, idx] = (rsi * np.diag(w_ap))[:, None, None] * np.transpose(self_term, (2, 0, 1))

    return StatsMatrices(b=b, c=c, d=d, f=f, rsi=rsi, noise_power=est.noise_power, variant=variant)


def sinr_coefficients(matrices, alpha, k):
    alpha = np.asarray(alpha, dtype=complex)
    if alpha.shape != (matrices.M,):
        raise ParameterError(f"filter must have length {matrices.M}")
    if not np.any(alpha):
        raise ParameterError(f"receive filter of user {k} is zero")
    power = np.abs(alpha) ** 2
    return SinrCoefficients(
        desired=float(np.abs(np.vdot(alpha, matrices.b[k])) ** 2),
        interference=np.einsum('m,jmn,n->j', alpha.conj(), matrices.c[k], alpha).real,
        self_interference=matrices.f[k] @ power,
        noise=float(power @ matrices.d[k]),
    )


def sinr_terms(matrices, alloc, k):
    """Numerator and denominator of Gamma_k."""
    coeffs = sinr_coefficients(matrices, alloc.alpha[k], k)
    eta = np.asarray(alloc.eta, dtype=float)
    desired = eta[k] * coeffs.desired
    denominator = (
        float(eta @ coeffs.interference) - desired
        + float(np.sum(coeffs.self_interference * alloc.p_dl))
        + coeffs.noise
    )
    return desired, denominator


def effective_sinr(matrices, alloc, k):
    desired, denominator = sinr_terms(matrices, alloc, k)
    if desired == 0.0:
        return 0.0
    return desired / denominator


def effective_sinr_all(matrices, alloc):
    return np.array([effective_sinr(matrices, alloc, k) for k in range(matrices.K)])


def spectral_efficiency(gamma_k, tau_u, tau_c):
    """Achievable SE in bit/s/Hz, (tau_u/tau_c) * log2(1 + Gamma)."""
    gamma_k = np.asarray(gamma_k, dtype=float)
    if np.any(gamma_k < 0):
        raise ParameterError("SINR must be non-negative")
    _check_lengths(tau_u, tau_c)
    se = tau_u / tau_c * np.log1p(gamma_k) / np.log(2.0)
    return float(se) if se.ndim == 0 else se


def sinr_threshold(rate_req, tau_u, tau_c):
    """SINR needed for ``rate_req`` bit/s/Hz over ``tau_u`` of ``tau_c`` samples."""
    rate_req = np.asarray(rate_req, dtype=float)
    if np.any(rate_req < 0):
        raise ParameterError("rate requirement must be non-negative")
    _check_lengths(tau_u, tau_c)
    threshold = np.expm1(tau_c * rate_req / tau_u * np.log(2.0))
    return float(threshold) if threshold.ndim == 0 else threshold


def _check_lengths(tau_u, tau_c):
    if tau_u <= 0 or tau_c <= 0 or tau_u > tau_c:
        raise ParameterError(f"need 0 < tau_u <= tau_c, got tau_u={tau_u}, tau_c={tau_c}")
