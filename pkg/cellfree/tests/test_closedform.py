from django.test import SimpleTestCase
import numpy as np

from cellfree.closedform import (
    FormulaVariant,
    effective_sinr,
    effective_sinr_all,
    harvest_coefficients,
    sinr_coefficients,
    sinr_threshold,
    spectral_efficiency,
    stats_matrices,
)
from cellfree.exceptions import ParameterError
from cellfree.optimizer import Allocation

from .factories import channel_stats, estimation_for, random_stats


def allocation(M, K, p=0.0, eta=0.0, seed=None):
    """Uniform powers with all-ones filters, or random ones when ``seed`` is given."""
    if seed is None:
        return Allocation(
            p_dl=np.full((M, K), float(p)),
            eta_e=np.full(K, float(eta)),
            eta_b=np.zeros(K),
            alpha=np.ones((K, M), dtype=complex),
        )
    rng = np.random.default_rng(seed)
    return Allocation(
        p_dl=rng.uniform(0.0, 1.0, size=(M, K)),
        eta_e=rng.uniform(0.0, 1.0, size=K),
        eta_b=np.zeros(K),
        alpha=rng.standard_normal((K, M)) + 1j * rng.standard_normal((K, M)),
    )


class HarvestCoefficientTests(SimpleTestCase):

    def setUp(self):
        self.stats = random_stats(3, 3, seed=0)
        self.pilots, self.est = estimation_for(self.stats, [0, 1, 0], tau_p=2)

    def test_single_link_without_los(self):
        stats = channel_stats(np.array([[2.0]]), user_user=0.0)
        pilots, est = estimation_for(stats, [0], tau_p=1, rho_p=1.0, noise_power=1.0)
        harvest = harvest_coefficients(est, stats, pilots, mu=0.5, tau_harvest=10)
        # gamma*w + (tau_p*rho_p)^2 * beta^2 * (w/psi)^2 = 4/3*2 + 4*(2/3)^2
        self.assertAlmostEqual(harvest.ap_total[0, 0, 0], 5.0 * (8.0 / 3.0 + 16.0 / 9.0))

    def test_energy_is_linear(self):
        harvest = harvest_coefficients(self.est, self.stats, self.pilots, mu=0.5, tau_harvest=100)
        a, b = allocation(3, 3, seed=1), allocation(3, 3, seed=2)
        total = harvest.energy(a.p_dl + b.p_dl, a.eta + b.eta)
        np.testing.assert_allclose(total, harvest.energy(a.p_dl, a.eta) + harvest.energy(b.p_dl, b.eta))
        np.testing.assert_array_equal(harvest.energy(np.zeros((3, 3)), np.zeros(3)), np.zeros(3))

    def test_contamination_only_between_copilots(self):
        harvest = harvest_coefficients(self.est, self.stats, self.pilots, mu=0.5, tau_harvest=100)
        np.testing.assert_array_equal(harvest.contamination[0, :, 1], 0.0)
        self.assertTrue(np.all(harvest.contamination[0, :, 2] > 0))

    def test_user_terms(self):
        full = harvest_coefficients(self.est, self.stats, self.pilots, 0.5, 100)
        no_self = harvest_coefficients(self.est, self.stats, self.pilots, 0.5, 100, self_recycling=False)
        silent = harvest_coefficients(self.est, self.stats, self.pilots, 0.5, 100, include_users=False)
        np.testing.assert_allclose(np.diag(full.from_users), 50.0 * np.diag(self.stats.user_user.w))
        np.testing.assert_array_equal(np.diag(no_self.from_users), 0.0)
        np.testing.assert_allclose(no_self.from_users[0, 1], full.from_users[0, 1])
        np.testing.assert_array_equal(silent.from_users, 0.0)

    def test_invalid_efficiency(self):
        with self.assertRaises(ParameterError):
            harvest_coefficients(self.est, self.stats, self.pilots, mu=1.2, tau_harvest=10)


class StatsMatrixTests(SimpleTestCase):

    def setUp(self):
        self.stats = random_stats(4, 3, seed=2)
        self.pilots, self.est = estimation_for(self.stats, [0, 1, 0], tau_p=2)
        self.rsi = np.full(4, 1e-3)
        self.matrices = stats_matrices(self.est, self.stats, self.pilots, self.rsi)

    def test_shapes(self):
        m = self.matrices
        self.assertEqual(m.b.shape, (3, 4))
        self.assertEqual(m.c.shape, (3, 3, 4, 4))
        self.assertEqual(m.d.shape, (3, 4))
        self.assertEqual(m.f.shape, (3, 4, 3, 4))

    def test_b_equals_estimate_variance(self):
        np.testing.assert_allclose(self.matrices.b, self.est.gamma.T)

    def test_c_is_symmetric_positive_semidefinite(self):
        c = self.matrices.c
        np.testing.assert_allclose(c, np.swapaxes(c, -1, -2))
        for k in range(3):
            for j in range(3):
                self.assertGreaterEqual(np.linalg.eigvalsh(c[k, j]).min(), -1e-12)

    def test_non_copilot_c_is_diagonal(self):
        c01 = self.matrices.c[0, 1]
        np.testing.assert_array_equal(c01 - np.diag(np.diag(c01)), 0.0)
        np.testing.assert_allclose(np.diag(c01), self.est.gamma[:, 0] * self.stats.ap_user.w[:, 1])

    def test_d_is_noise_times_gamma(self):
        np.testing.assert_allclose(self.matrices.d, 0.1 * self.est.gamma.T)

    def test_zero_self_interference(self):
        matrices = stats_matrices(self.est, self.stats, self.pilots, 0.0)
        np.testing.assert_array_equal(matrices.f, 0.0)

    def test_f_other_ap_branch(self):
        k, q, j, m = 1, 2, 0, 3
        expected = 1e-3 * self.stats.ap_ap.w[m, q] * self.est.gamma[m, k] * self.est.gamma[q, j]
        self.assertAlmostEqual(self.matrices.f[k, q, j, m], expected)

    def test_printed_reading_differs_only_on_same_ap_branch(self):
        stats = random_stats(3, 2, seed=4, los=False)
        pilots, est = estimation_for(stats, [0, 1], tau_p=2)
        exact = stats_matrices(est, stats, pilots, 1e-3)
        printed = stats_matrices(est, stats, pilots, 1e-3, variant=FormulaVariant.PRINTED)
        np.testing.assert_allclose(exact.c, printed.c)
        same_ap = np.zeros(exact.f.shape, dtype=bool)
        idx = np.arange(3)
        same_ap[:, idx, :, idx] = True
        np.testing.assert_allclose(exact.f[~same_ap], printed.f[~same_ap])
        # Gaussian estimates: E|g_hat|^4 = 2 gamma^2, the printed form gives gamma^2 + gamma*w
        m, k = 1, 0
        gap = printed.f[k, m, k, m] - exact.f[k, m, k, m]
        self.assertAlmostEqual(gap, 1e-3 * stats.ap_ap.w[m, m] * est.gamma[m, k] * est.c_err[m, k])

    def test_literal_tau_scales_pilot_energy(self):
        literal = stats_matrices(
            self.est, self.stats, self.pilots, self.rsi,
            variant=FormulaVariant.LITERAL_TAU, literal_tau=100,
        )
        ratio = self.stats.ap_user.w / self.est.psi
        np.testing.assert_allclose(literal.b, (100 * 1.0 * self.stats.ap_user.w * ratio).T)
        with self.assertRaises(ParameterError):
            stats_matrices(self.est, self.stats, self.pilots, self.rsi, variant=FormulaVariant.LITERAL_TAU)

    def test_self_interference_level_range(self):
        with self.assertRaises(ParameterError):
            stats_matrices(self.est, self.stats, self.pilots, 1.0)


class SinrTests(SimpleTestCase):

    def setUp(self):
        self.stats = random_stats(4, 2, seed=6)
        self.pilots, self.est = estimation_for(self.stats, [0, 1], tau_p=2)
        self.matrices = stats_matrices(self.est, self.stats, self.pilots, 1e-3)

    def test_silent_user_has_zero_sinr(self):
        alloc = allocation(4, 2, p=0.1, eta=0.0)
        self.assertEqual(effective_sinr(self.matrices, alloc, 0), 0.0)

    def test_single_user_closed_form(self):
        stats = channel_stats(np.array([[1.0], [2.0]]))
        pilots, est = estimation_for(stats, [0], tau_p=1, rho_p=1.0, noise_power=1.0)
        matrices = stats_matrices(est, stats, pilots, 0.0)
        alloc = allocation(2, 1, eta=1.0)
        gamma = est.gamma[:, 0]
        w = stats.ap_user.w[:, 0]
        # NLOS: E|g_hat|^2|g|^2 = gamma*w + gamma^2, cross terms gamma_m*gamma_n
        signal = gamma.sum() ** 2
        second_moment = signal - np.sum(gamma ** 2) + np.sum(gamma * w + gamma ** 2)
        expected = signal / (second_moment - signal + np.sum(gamma))
        self.assertAlmostEqual(effective_sinr(matrices, alloc, 0), expected)

    def test_scaling_filter_leaves_sinr(self):
        alloc = allocation(4, 2, seed=3)
        scaled = alloc.with_filters(alloc.alpha * (2.0 - 1.5j))
        np.testing.assert_allclose(effective_sinr_all(self.matrices, alloc), effective_sinr_all(self.matrices, scaled))

    def test_zero_filter_rejected(self):
        with self.assertRaises(ParameterError):
            sinr_coefficients(self.matrices, np.zeros(4), 0)

    def test_threshold_inverts_spectral_efficiency(self):
        threshold = sinr_threshold(2.5, 198, 200)
        self.assertAlmostEqual(spectral_efficiency(threshold, 198, 200), 2.5)
        self.assertAlmostEqual(threshold, 2 ** (2.5 * 200 / 198) - 1)
        self.assertEqual(sinr_threshold(0.0, 198, 200), 0.0)

    def test_length_checks(self):
        with self.assertRaises(ParameterError):
            spectral_efficiency(1.0, 0, 200)
        with self.assertRaises(ParameterError):
            sinr_threshold(1.0, 201, 200)
        with self.assertRaises(ParameterError):
            spectral_efficiency(-1.0, 198, 200)
