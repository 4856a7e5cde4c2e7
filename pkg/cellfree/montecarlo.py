"""
Sample-level oracle for the closed forms.

Every estimator here simulates the second-phase signals directly: channel
realizations, LMMSE estimates from noisy pilots, unit-modulus energy
symbols s_mj, CN(0, 1) data symbols x_j and CN(0, sigma^2) uplink noise.

    harvest    z_k  = sum_mj sqrt(p_mj) conj(g_mk) g_hat_mj s_mj + sum_j sqrt(eta_j) gu_kj x_j
    uplink     y_m  = sum_j sqrt(eta_j) g_mj x_j
                      + sum_qj sqrt(p_qj rsi_m) ga_mq g_hat_qj s_qj + n_m
    combined   xh_k = sum_m conj(a_mk) conj(g_hat_mk) y_m

Samples are drawn in batches, each from its own substream of the seed, and
batch statistics are merged pairwise so the result does not depend on how
batches are spread over workers.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import logging

import numpy as np

from .estimation import estimate_channels
from .exceptions import ParameterError
from .propagation import sample_realization
from .streams import Stream, derive_seed, substream

logger = logging.getLogger(__name__)

MIN_ENERGY_SAMPLES = 10_000
DEFAULT_BATCH_SIZE = 10_000

_ELEMENT_ARITY = {'b': 2, 'c': 4, 'd': 2, 'f': 5}


@dataclass(frozen=True)
class McEstimate:
    """Sample mean with its standard error. ``mean`` may be an array."""
    mean: object
    std_error: object
    n_samples: int

    def __getitem__(self, index):
        return McEstimate(np.asarray(self.mean)[index], np.asarray(self.std_error)[index], self.n_samples)

    def z_score(self, reference):
        """(mean - reference) / std_error; 0 where both the error and the gap are zero."""
        gap = np.asarray(self.mean, dtype=float) - np.asarray(reference, dtype=float)
        err = np.asarray(self.std_error, dtype=float)
        with np.errstate(divide='ignore', invalid='ignore'):
            z = np.where(err > 0, gap / np.where(err > 0, err, 1.0), np.where(gap == 0, 0.0, np.inf * np.sign(gap)))
        return float(z) if z.ndim == 0 else z


class _Moments:
    """Running count, mean and sum of squared deviations (pairwise merge)."""

    def __init__(self):
        self.n = 0
        self.mean = None
        self.m2 = None

    def add_batch(self, samples):
        samples = np.asarray(samples, dtype=float)
        n_b = samples.shape[0]
        mean_b = samples.mean(axis=0)
        m2_b = ((samples - mean_b) ** 2).sum(axis=0)
        self.merge(n_b, mean_b, m2_b)

    def merge(self, n_b, mean_b, m2_b):
        if self.n == 0:
            self.n, self.mean, self.m2 = n_b, mean_b, m2_b
            return
        total = self.n + n_b
        delta = mean_b - self.mean
        self.mean = self.mean + delta * (n_b / total)
        self.m2 = self.m2 + m2_b + delta ** 2 * (self.n * n_b / total)
        self.n = total

    @property
    def std_error(self):
        return np.sqrt(self.m2 / (self.n - 1) / self.n)

    def estimate(self):
        return McEstimate(mean=self.mean, std_error=self.std_error, n_samples=self.n)


def _batches(n_samples, batch_size):
    if n_samples < 2:
        raise ParameterError("need at least 2 samples")
    if batch_size < 1:
        raise ParameterError("batch_size must be positive")
    sizes = [batch_size] * (n_samples // batch_size)
    if n_samples % batch_size:
        sizes.append(n_samples % batch_size)
    return sizes


def _run_batches(n_samples, seed, batch_size, workers, draw):
    """Evaluate ``draw(batch_seed, size)`` per batch and merge the outputs in batch order."""
    sizes = _batches(n_samples, batch_size)
    seeds = [derive_seed(seed, Stream.BATCH, i) for i in range(len(sizes))]
    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(draw, seeds, sizes))
    else:
        results = [draw(s, n) for s, n in zip(seeds, sizes)]

    accumulators = None
    for result in results:
        if accumulators is None:
            accumulators = [_Moments() for _ in result]
        for acc, samples in zip(accumulators, result):
            acc.add_batch(samples)
    return accumulators


def _complex_normal(rng, shape, variance=1.0):
    return np.sqrt(variance / 2.0) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def _unit_phase(rng, shape):
    return np.exp(2j * np.pi * rng.random(shape))


def _channels(stats, est, pilots, batch_seed, size):
    realization = sample_realization(stats, batch_seed, size=(size,))
    g_hat = estimate_channels(realization, pilots, est, batch_seed)
    return realization, g_hat


def mc_harvested_energy(stats, est, pilots, alloc, mu, tau_harvest, n_samples, seed, *,
                        include_users=True, self_recycling=True,
                        batch_size=DEFAULT_BATCH_SIZE, workers=1):
    """Per-user harvested energy tau*mu*|z_k|^2, averaged over realizations."""
    if n_samples < MIN_ENERGY_SAMPLES:
        raise ParameterError(f"harvested-energy estimates need at least {MIN_ENERGY_SAMPLES} samples")
    sqrt_p = np.sqrt(np.asarray(alloc.p_dl, dtype=float))
    sqrt_eta = np.sqrt(np.asarray(alloc.eta, dtype=float))
    scale = mu * tau_harvest

    def draw(batch_seed, size):
        realization, g_hat = _channels(stats, est, pilots, batch_seed, size)
        rng = substream(batch_seed, Stream.SYMBOLS)
        s = _unit_phase(rng, (size,) + sqrt_p.shape)
        x = _complex_normal(rng, (size, stats.K))
        beam = np.sum(sqrt_p * g_hat * s, axis=2)
        z = np.einsum('smk,sm->sk', realization.ap_user.conj(), beam)
        if include_users:
            user_user = realization.user_user
            if not self_recycling:
                user_user = user_user.copy()
                idx = np.arange(stats.K)
                user_user[:, idx, idx] = 0.0
            z = z + np.einsum('skj,sj->sk', user_user, sqrt_eta * x)
        return (scale * np.abs(z) ** 2,)

    (energy,) = _run_batches(n_samples, seed, batch_size, workers, draw)
    logger.debug("[MC] harvested energy over %d samples", energy.n)
    return energy.estimate()


def _check_element(which, M, K):
    if not which or which[0] not in _ELEMENT_ARITY:
        raise ParameterError(f"unknown element id {which!r}")
    kind, indices = which[0], tuple(int(i) for i in which[1:])
    if len(indices) != _ELEMENT_ARITY[kind]:
        raise ParameterError(f"element '{kind}' takes {_ELEMENT_ARITY[kind]} indices, got {len(indices)}")
    limits = {
        'b': (M, K),
        'c': (K, K, M, M),
        'd': (M, K),
        'f': (K, M, K, M, M),
    }[kind]
    if any(i < 0 or i >= n for i, n in zip(indices, limits)):
        raise ParameterError(f"element {which!r} is out of range for M={M}, K={K}")
    return kind, indices


def _element_samples(kind, indices, realization, g_hat, rsi, noise):
    g = realization.ap_user
    if kind == 'b':
        m, k = indices
        return g_hat[:, m, k].conj() * g[:, m, k]
    if kind == 'c':
        k, j, m, m2 = indices
        return g_hat[:, m, k].conj() * g[:, m, j] * g[:, m2, j].conj() * g_hat[:, m2, k]
    if kind == 'd':
        m, k = indices
        return np.abs(g_hat[:, m, k]) ** 2 * np.abs(noise[:, m]) ** 2
    k, q, j, m, m2 = indices
    ga = realization.ap_ap
    return (
        g_hat[:, m, k].conj() * ga[:, m, q] * g_hat[:, q, j]
        * np.sqrt(rsi[m] * rsi[m2])
        * g_hat[:, q, j].conj() * ga[:, m2, q].conj() * g_hat[:, m2, k]
    )


def mc_stats_element(stats, est, pilots, rsi, which, n_samples, seed, *,
                     batch_size=DEFAULT_BATCH_SIZE, workers=1):
    """
    Sample average of one defining expectation. ``which`` is ('b', m, k),
    ('c', k, j, m, m2), ('d', m, k) or ('f', k, q, j, m, m2). The real part is
    returned; every element is real under the channel model.
    """
    kind, indices = _check_element(tuple(which), stats.M, stats.K)
    rsi = np.broadcast_to(np.asarray(rsi, dtype=float), (stats.M,))

    def draw(batch_seed, size):
        realization, g_hat = _channels(stats, est, pilots, batch_seed, size)
        noise = None
        if kind == 'd':
            noise = _complex_normal(substream(batch_seed, Stream.UPLINK_NOISE), (size, stats.M), est.noise_power)
        return (_element_samples(kind, indices, realization, g_hat, rsi, noise).real,)

    (element,) = _run_batches(n_samples, seed, batch_size, workers, draw)
    return element.estimate()


def mc_stats_all(stats, est, pilots, rsi, n_samples, seed, *, batch_size=2_000, workers=1):
    """
    Every element at once, for small instances. Returns a dict of McEstimates
    with b (K, M), c (K, K, M, M), d (K, M) and f (K, M, K, M, M) laid out
    as f[k, q, j, m, m2].
    """
    rsi = np.broadcast_to(np.asarray(rsi, dtype=float), (stats.M,))
    root_rsi = np.sqrt(rsi)

    def draw(batch_seed, size):
        realization, g_hat = _channels(stats, est, pilots, batch_seed, size)
        g = realization.ap_user
        noise = _complex_normal(substream(batch_seed, Stream.UPLINK_NOISE), (size, stats.M), est.noise_power)
        b = np.einsum('smk,smk->skm', g_hat.conj(), g)
        cross = np.einsum('smk,smj->skjm', g_hat.conj(), g)
        c = np.einsum('skjm,skjn->skjmn', cross, cross.conj())
        d = np.abs(g_hat.transpose(0, 2, 1)) ** 2 * np.abs(noise[:, None, :]) ** 2
        # leg[s, k, q, j, m] = conj(g_hat_mk) ga_mq g_hat_qj sqrt(rsi_m)
        leg = np.einsum('smk,smq,sqj,m->skqjm', g_hat.conj(), realization.ap_ap, g_hat, root_rsi)
        f = np.einsum('skqjm,skqjn->skqjmn', leg, leg.conj())
        return b.real, c.real, d, f.real

    b, c, d, f = _run_batches(n_samples, seed, batch_size, workers, draw)
    return {'b': b.estimate(), 'c': c.estimate(), 'd': d.estimate(), 'f': f.estimate()}


def mc_sinr_terms(stats, est, pilots, alloc, rsi, n_samples, seed, *,
                  batch_size=DEFAULT_BATCH_SIZE, workers=1):
    """
    Desired-signal and interference-plus-noise power of the combined signal
    per user, as (numerator, denominator) McEstimates over K users.

    The numerator is eta_k |E[a_k^H diag(g_hat_k^*) g_k]|^2; the denominator
    is E|xh_k|^2 minus the numerator.
    """
    K, M = stats.K, stats.M
    alpha = np.asarray(alloc.alpha, dtype=complex)
    if alpha.shape != (K, M):
        raise ParameterError(f"filters must have shape ({K}, {M})")
    rsi = np.broadcast_to(np.asarray(rsi, dtype=float), (M,))
    sqrt_p = np.sqrt(np.asarray(alloc.p_dl, dtype=float))
    eta = np.asarray(alloc.eta, dtype=float)
    sqrt_eta = np.sqrt(eta)

    def draw(batch_seed, size):
        realization, g_hat = _channels(stats, est, pilots, batch_seed, size)
        g = realization.ap_user
        rng = substream(batch_seed, Stream.SYMBOLS)
        s = _unit_phase(rng, (size, M, K))
        x = _complex_normal(rng, (size, K))
        noise = _complex_normal(substream(batch_seed, Stream.UPLINK_NOISE), (size, M), est.noise_power)

        transmitted = np.sum(sqrt_p * g_hat * s, axis=2)
        y = (
            np.einsum('smj,sj->sm', g, sqrt_eta * x)
            + np.sqrt(rsi) * np.einsum('smq,sq->sm', realization.ap_ap, transmitted)
            + noise
        )
        combined = np.einsum('km,smk,sm->sk', alpha.conj(), g_hat.conj(), y)
        gain = np.einsum('km,smk,smk->sk', alpha.conj(), g_hat.conj(), g)
        return gain.real, gain.imag, np.abs(combined) ** 2

    gain_re, gain_im, power = _run_batches(n_samples, seed, batch_size, workers, draw)
    gain_mean = gain_re.mean + 1j * gain_im.mean
    gain_err = np.hypot(gain_re.std_error, gain_im.std_error)

    numerator = eta * np.abs(gain_mean) ** 2
    numerator_err = 2.0 * eta * np.abs(gain_mean) * gain_err
    n = power.n
    return (
        McEstimate(mean=numerator, std_error=numerator_err, n_samples=n),
        McEstimate(mean=power.mean - numerator, std_error=np.hypot(power.std_error, numerator_err), n_samples=n),
    )
