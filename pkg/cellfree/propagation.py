"""
Large-scale statistics and channel realizations for the three link classes.

Every channel is g = h_bar * exp(j*theta) + h with an unknown LOS phase
theta ~ U[0, 2*pi) and NLOS part h ~ CN(0, beta), so that
E|g|^2 = w = |h_bar|^2 + beta and E[g] = 0.

Link classes:
    ap_user    M x K, AP to user (3-D distance, height difference applied)
    user_user  K x K, user to user, diagonal is the user's own self-loop
    ap_ap      M x M, AP to AP, diagonal is the AP's residual self-loop

The large-scale model is the indoor-hotspot one whose constants live in
``PropagationConfig``. Each link class is drawn from its own substream.
"""
from dataclasses import dataclass
import logging

import numpy as np

from .exceptions import PropagationError
from .streams import Stream, substream
from .units import db_to_linear

logger = logging.getLogger(__name__)

_AP_USER, _USER_USER, _AP_AP = 0, 1, 2


@dataclass(frozen=True)
class LinkStats:
    """Structure of arrays for one link class: beta, |h_bar| and LOS flags."""
    beta: np.ndarray
    los_amplitude: np.ndarray
    is_los: np.ndarray

    @property
    def w(self):
        return self.los_amplitude ** 2 + self.beta

    @property
    def shape(self):
        return self.beta.shape


@dataclass(frozen=True)
class ChannelStats:
    ap_user: LinkStats
    user_user: LinkStats
    ap_ap: LinkStats

    @property
    def M(self):
        return self.ap_user.shape[0]

    @property
    def K(self):
        return self.ap_user.shape[1]


@dataclass(frozen=True)
class LosPhases:
    ap_user: np.ndarray
    user_user: np.ndarray
    ap_ap: np.ndarray


@dataclass(frozen=True)
class ChannelRealization:
    """
    Complex gains with optional leading sample axes: ``ap_user`` has shape
    (..., M, K), ``user_user`` (..., K, K) and ``ap_ap`` (..., M, M).
    """
    ap_user: np.ndarray
    user_user: np.ndarray
    ap_ap: np.ndarray
    los_phases: LosPhases


def los_probability(planar_distance, model):
    d = np.asarray(planar_distance, dtype=float)
    near = np.exp(-(d - model.los_prob_breakpoint_m) / model.los_prob_decay_near_m)
    far = np.exp(-(d - model.los_prob_far_start_m) / model.los_prob_decay_far_m) * model.los_prob_far_factor
    return np.where(
        d <= model.los_prob_breakpoint_m, 1.0,
        np.where(d <= model.los_prob_far_start_m, near, far),
    )


def path_loss_db(distance, is_los, model):
    """Path loss in dB at 3-D ``distance`` meters (shadowing excluded)."""
    d = np.asarray(distance, dtype=float)
    log_f = np.log10(model.carrier_freq_ghz)
    los = model.los_pl_intercept_db + model.los_pl_slope * np.log10(d) + model.los_pl_freq_coeff * log_f
    nlos = model.nlos_pl_intercept_db + model.nlos_pl_slope * np.log10(d) + model.nlos_pl_freq_coeff * log_f
    return np.where(is_los, los, np.maximum(los, nlos))


def rician_factor(distance, model):
    """Linear Rician factor of a LOS link."""
    kappa_db = model.rician_k_intercept_db - model.rician_k_slope_db_per_m * np.asarray(distance, dtype=float)
    return db_to_linear(kappa_db)


def rician_split(total_gain, kappa):
    """
    Split total gain Omega into (|h_bar|, beta) with |h_bar|^2 = kappa/(kappa+1)*Omega
    and beta = Omega/(kappa+1). ``kappa`` may be 0 (Rayleigh) or inf (pure LOS).
    """
    omega = np.asarray(total_gain, dtype=float)
    kappa = np.broadcast_to(np.asarray(kappa, dtype=float), omega.shape)
    with np.errstate(invalid='ignore', divide='ignore'):
        los_fraction = np.where(np.isinf(kappa), 1.0, kappa / (kappa + 1.0))
    beta = omega * (1.0 - los_fraction)
    los_amplitude = np.sqrt(omega * los_fraction)
    return los_amplitude, beta


def _draw_links(planar, distance, model, rng):
    """Large-scale draws for a flat array of links."""
    if planar.size and (not np.all(np.isfinite(distance)) or np.any(distance <= 0)):
        raise PropagationError("link distances must be positive and finite")
    distance = np.maximum(distance, model.min_distance_m)

    is_los = rng.uniform(size=planar.shape) < los_probability(planar, model)
    shadow_std = np.where(is_los, model.shadowing_los_db, model.shadowing_nlos_db)
    shadowing = rng.standard_normal(planar.shape) * shadow_std

    total_gain = db_to_linear(-(path_loss_db(distance, is_los, model) + shadowing))
    kappa = np.where(is_los, rician_factor(distance, model), 0.0)
    los_amplitude, beta = rician_split(total_gain, kappa)
    return LinkStats(beta=beta, los_amplitude=los_amplitude, is_los=is_los)


def _symmetric_links(planar, model, rng, self_loop_gain_db):
    """
    Links between nodes in the same plane: the upper triangle is drawn
    once and mirrored, the diagonal is the configured self-loop.
    """
    n = planar.shape[0]
    rows, cols = np.triu_indices(n, k=1)
    pairs = _draw_links(planar[rows, cols], planar[rows, cols], model, rng)

    beta = np.zeros((n, n))
    los_amplitude = np.zeros((n, n))
    is_los = np.zeros((n, n), dtype=bool)
    for target, values in ((beta, pairs.beta), (los_amplitude, pairs.los_amplitude), (is_los, pairs.is_los)):
        target[rows, cols] = values
        target[cols, rows] = values

    beta[np.diag_indices(n)] = db_to_linear(self_loop_gain_db)
    return LinkStats(beta=beta, los_amplitude=los_amplitude, is_los=is_los)


def compute_channel_stats(deployment, model, seed):
    """Large-scale statistics for every link of ``deployment``."""
    planar = deployment.ap_user_planar()
    ap_user = _draw_links(
        planar, deployment.ap_user_distances(), model,
        substream(seed, Stream.LARGE_SCALE, _AP_USER),
    )
    user_user = _symmetric_links(
        deployment.user_user_distances(), model,
        substream(seed, Stream.LARGE_SCALE, _USER_USER), model.user_self_loop_gain_db,
    )
    ap_ap = _symmetric_links(
        deployment.ap_ap_distances(), model,
        substream(seed, Stream.LARGE_SCALE, _AP_AP), model.ap_self_loop_gain_db,
    )
    logger.debug(
        "[Propagation] %d/%d AP-user links in LOS", int(ap_user.is_los.sum()), ap_user.is_los.size
    )
    return ChannelStats(ap_user=ap_user, user_user=user_user, ap_ap=ap_ap)


def _symmetrize(values):
    return np.triu(values) + np.swapaxes(np.triu(values, 1), -1, -2)


def _sample_links(links, rng, size, symmetric):
    shape = tuple(size) + links.shape
    theta = rng.uniform(0.0, 2.0 * np.pi, size=shape)
    nlos = np.sqrt(links.beta / 2.0) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    if symmetric:
        theta = _symmetrize(theta)
        nlos = _symmetrize(nlos)
    return links.los_amplitude * np.exp(1j * theta) + nlos, theta


def sample_realization(stats, seed, size=None):
    """
    Draw channel realizations. ``size`` adds leading sample axes, e.g.
    ``size=(n,)`` gives ``ap_user`` of shape (n, M, K). Same-class links
    are reciprocal, so user-user and AP-AP gains are symmetric.
    """
    if size is None:
        size = ()
    elif np.isscalar(size):
        size = (int(size),)
    rng = substream(seed, Stream.REALIZATION)
    ap_user, theta_au = _sample_links(stats.ap_user, rng, size, symmetric=False)
    user_user, theta_uu = _sample_links(stats.user_user, rng, size, symmetric=True)
    ap_ap, theta_aa = _sample_links(stats.ap_ap, rng, size, symmetric=True)
    return ChannelRealization(
        ap_user=ap_user,
        user_user=user_user,
        ap_ap=ap_ap,
        los_phases=LosPhases(ap_user=theta_au, user_user=theta_uu, ap_ap=theta_aa),
    )
