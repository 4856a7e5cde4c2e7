from django.test import SimpleTestCase
import numpy as np

from cellfree.estimation import (
    PilotAssignment,
    assign_pilots,
    compute_estimation_stats,
    estimate_channels,
    pilot_book,
)
from cellfree.exceptions import DegenerateInputError, ParameterError
from cellfree.propagation import sample_realization

from .factories import channel_stats, estimation_for, random_stats


class PilotAssignmentTests(SimpleTestCase):

    def test_random_assignment_in_range(self):
        pilots = assign_pilots(K=20, tau_p=3, seed=1)
        self.assertEqual(pilots.K, 20)
        self.assertTrue(np.all((pilots.pilot_index >= 0) & (pilots.pilot_index < 3)))

    def test_copilot_sets(self):
        pilots = PilotAssignment.from_indices([0, 1, 0], tau_p=2)
        self.assertEqual(pilots.copilot_sets, (frozenset({0, 2}), frozenset({1}), frozenset({0, 2})))
        np.testing.assert_array_equal(pilots.copilot_mask, pilots.copilot_mask.T)

    def test_invalid_indices(self):
        with self.assertRaises(ParameterError):
            PilotAssignment.from_indices([0, 2], tau_p=2)
        with self.assertRaises(ParameterError):
            assign_pilots(K=0, tau_p=2, seed=0)

    def test_pilot_book_is_orthonormal(self):
        phi = pilot_book(4)
        np.testing.assert_allclose(phi.conj().T @ phi, np.eye(4), atol=1e-12)


class EstimationStatsTests(SimpleTestCase):

    def test_orthogonal_pilots(self):
        stats = channel_stats(np.array([[2.0, 0.5]]))
        _, est = estimation_for(stats, [0, 1], tau_p=2, rho_p=1.0, noise_power=1.0)
        np.testing.assert_allclose(est.psi, [[5.0, 2.0]])
        np.testing.assert_allclose(est.gamma, [[8.0 / 5.0, 0.25]])
        np.testing.assert_allclose(est.c_err, [[0.4, 0.25]])

    def test_shared_pilot_contaminates(self):
        stats = channel_stats(np.array([[2.0, 0.5]]))
        _, est = estimation_for(stats, [0, 0], tau_p=2, rho_p=1.0, noise_power=1.0)
        np.testing.assert_allclose(est.psi, [[6.0, 6.0]])
        np.testing.assert_allclose(est.gamma, [[8.0 / 6.0, 0.5 / 6.0]])

    def test_estimate_variance_bounded_by_channel(self):
        stats = random_stats(5, 3, seed=3)
        _, est = estimation_for(stats, [0, 1, 0], tau_p=2)
        self.assertTrue(np.all(est.gamma <= stats.ap_user.w))
        self.assertTrue(np.all(est.c_err >= 0))

    def test_noiseless_dead_link_is_degenerate(self):
        stats = channel_stats(np.array([[0.0, 1.0]]))
        pilots = PilotAssignment.from_indices([0, 1], tau_p=2)
        with self.assertRaises(DegenerateInputError):
            compute_estimation_stats(stats, pilots, tau_p=2, rho_p=1.0, noise_power=0.0)

    def test_mismatched_assignment(self):
        stats = channel_stats(np.ones((2, 3)))
        with self.assertRaises(ParameterError):
            compute_estimation_stats(stats, PilotAssignment.from_indices([0, 1], 2), 2, 1.0, 0.1)


class ChannelEstimateTests(SimpleTestCase):

    def setUp(self):
        self.stats = random_stats(3, 3, seed=5)
        self.pilots, self.est = estimation_for(self.stats, [0, 1, 0], tau_p=2)

    def _check_moments(self, materialize):
        n = 40_000
        realization = sample_realization(self.stats, seed=8, size=n)
        g_hat = estimate_channels(realization, self.pilots, self.est, noise_seed=8, materialize_pilots=materialize)
        power = np.abs(g_hat) ** 2
        stderr = power.std(axis=0) / np.sqrt(n)
        self.assertTrue(np.all(np.abs(power.mean(axis=0) - self.est.gamma) < 5 * stderr))
        error = np.abs(realization.ap_user - g_hat) ** 2
        stderr = error.std(axis=0) / np.sqrt(n)
        self.assertTrue(np.all(np.abs(error.mean(axis=0) - self.est.c_err) < 5 * stderr))

    def test_projected_observation(self):
        self._check_moments(materialize=False)

    def test_materialized_pilot_block(self):
        self._check_moments(materialize=True)

    def test_copilot_estimates_are_parallel(self):
        realization = sample_realization(self.stats, seed=1, size=4)
        g_hat = estimate_channels(realization, self.pilots, self.est, noise_seed=1)
        ratio = g_hat[..., 0] / g_hat[..., 2]
        expected = self.est.estimator_gain[:, 0] / self.est.estimator_gain[:, 2]
        np.testing.assert_allclose(ratio, np.broadcast_to(expected, ratio.shape))
