from django.test import SimpleTestCase
import numpy as np

from cellfree.exceptions import PropagationError
from cellfree.geometry import Deployment, generate_deployment
from cellfree.propagation import (
    compute_channel_stats,
    los_probability,
    path_loss_db,
    rician_factor,
    rician_split,
    sample_realization,
)
from cellfree.scenario import PropagationConfig, Scenario
from cellfree.units import db_to_linear


class LargeScaleModelTests(SimpleTestCase):

    def setUp(self):
        self.model = PropagationConfig()

    def test_los_probability_segments(self):
        p = los_probability(np.array([3.0, 5.0, 20.0, 100.0]), self.model)
        np.testing.assert_allclose(p, [
            1.0,
            1.0,
            np.exp(-15.0 / 70.8),
            0.54 * np.exp(-51.0 / 211.7),
        ])

    def test_path_loss_reference(self):
        los = path_loss_db(10.0, True, self.model)
        self.assertAlmostEqual(float(los), 32.4 + 17.3 + 20.0 * np.log10(3.4))
        distances = np.linspace(1.0, 150.0, 40)
        self.assertTrue(np.all(path_loss_db(distances, False, self.model) >= path_loss_db(distances, True, self.model)))

    def test_rician_factor_decreases_with_distance(self):
        self.assertAlmostEqual(float(rician_factor(0.0, self.model)), float(db_to_linear(13.0)))
        self.assertLess(float(rician_factor(50.0, self.model)), float(rician_factor(10.0, self.model)))

    def test_rician_split_preserves_total_gain(self):
        omega = np.array([1.0, 2.0, 3.0])
        los, beta = rician_split(omega, np.array([0.0, 1.0, np.inf]))
        np.testing.assert_allclose(los ** 2 + beta, omega)
        self.assertEqual(los[0], 0.0)
        self.assertAlmostEqual(beta[1], 1.0)
        self.assertEqual(beta[2], 0.0)


class ChannelStatsTests(SimpleTestCase):

    def setUp(self):
        self.scenario = Scenario(M=6, K=3)
        self.deployment = generate_deployment(self.scenario, seed=4)
        self.stats = compute_channel_stats(self.deployment, self.scenario.propagation, seed=4)

    def test_shapes(self):
        self.assertEqual(self.stats.ap_user.shape, (6, 3))
        self.assertEqual(self.stats.user_user.shape, (3, 3))
        self.assertEqual(self.stats.ap_ap.shape, (6, 6))
        self.assertEqual((self.stats.M, self.stats.K), (6, 3))

    def test_nlos_links_have_no_los_part(self):
        links = self.stats.ap_user
        np.testing.assert_array_equal(links.los_amplitude[~links.is_los], 0.0)
        self.assertTrue(np.all(links.beta > 0))

    def test_same_class_links_are_reciprocal(self):
        for links, loop_db in ((self.stats.user_user, -15.0), (self.stats.ap_ap, -15.0)):
            np.testing.assert_array_equal(links.beta, links.beta.T)
            np.testing.assert_allclose(np.diag(links.w), db_to_linear(loop_db))

    def test_deterministic_per_seed(self):
        again = compute_channel_stats(self.deployment, self.scenario.propagation, seed=4)
        np.testing.assert_array_equal(again.ap_user.beta, self.stats.ap_user.beta)

    def test_coincident_nodes_rejected(self):
        deployment = Deployment(
            side_length=10.0,
            ap_positions=np.array([[1.0, 1.0]]),
            user_positions=np.array([[1.0, 1.0]]),
            height_diff=0.0,
            rng_seed=0,
        )
        with self.assertRaises(PropagationError):
            compute_channel_stats(deployment, PropagationConfig(), seed=0)


class RealizationTests(SimpleTestCase):

    def setUp(self):
        scenario = Scenario(M=3, K=2)
        self.stats = compute_channel_stats(generate_deployment(scenario, 9), scenario.propagation, 9)

    def test_sample_axes(self):
        realization = sample_realization(self.stats, seed=1, size=5)
        self.assertEqual(realization.ap_user.shape, (5, 3, 2))
        self.assertEqual(realization.user_user.shape, (5, 2, 2))
        self.assertEqual(realization.ap_ap.shape, (5, 3, 3))
        np.testing.assert_array_equal(realization.user_user, np.swapaxes(realization.user_user, 1, 2))
        np.testing.assert_array_equal(realization.ap_ap, np.swapaxes(realization.ap_ap, 1, 2))

    def test_second_moment_matches_w(self):
        n = 40_000
        realization = sample_realization(self.stats, seed=2, size=n)
        power = np.abs(realization.ap_user) ** 2
        mean = power.mean(axis=0)
        stderr = power.std(axis=0) / np.sqrt(n)
        self.assertTrue(np.all(np.abs(mean - self.stats.ap_user.w) < 5 * stderr))
        # zero mean: the LOS phase is unknown
        self.assertTrue(np.all(np.abs(realization.ap_user.mean(axis=0)) < 5 * np.sqrt(self.stats.ap_user.w / n)))
