from django.test import SimpleTestCase
import numpy as np

from cellfree.exceptions import ParameterError
from cellfree.scenario import OptimizerConfig, PropagationConfig, Scenario, TimeSwitchingConfig


class ScenarioTests(SimpleTestCase):

    def test_defaults(self):
        scenario = Scenario()
        self.assertEqual((scenario.M, scenario.K, scenario.tau_p, scenario.tau_c), (64, 4, 2, 200))
        self.assertEqual(scenario.tau_u, 198)
        self.assertAlmostEqual(scenario.noise_power, 10 ** -12.6, delta=1e-20)
        np.testing.assert_allclose(scenario.rsi, np.full(64, 1e-9))
        np.testing.assert_allclose(scenario.rate_demands, np.full(4, 2.5))

    def test_time_switching_uplink_length(self):
        scenario = Scenario()
        self.assertEqual(scenario.ts_tau_u(20), 178)
        self.assertEqual(scenario.ts_tau_u(0), 198)
        with self.assertRaises(ParameterError):
            scenario.ts_tau_u(198)

    def test_per_user_rates(self):
        scenario = Scenario(K=2, r_th=[1.0, 2.0])
        self.assertEqual(scenario.r_th, (1.0, 2.0))
        np.testing.assert_array_equal(scenario.rate_demands, [1.0, 2.0])
        with self.assertRaises(ParameterError):
            Scenario(K=3, r_th=[1.0, 2.0])

    def test_invalid_parameters(self):
        invalid = [
            dict(mu=1.5),
            dict(rsi_db=0.0),
            dict(tau_c=2),
            dict(p_max=0.0),
            dict(M=0),
            dict(r_th=-1.0),
            dict(seed=-3),
        ]
        for options in invalid:
            with self.subTest(**options), self.assertRaises(ParameterError):
                Scenario(**options)

    def test_baseline_must_leave_uplink_samples(self):
        with self.assertRaises(ParameterError):
            Scenario(baseline=TimeSwitchingConfig(tau_d_grid=(100, 198)))
        Scenario(baseline=None)

    def test_disabled_self_interference(self):
        scenario = Scenario(rsi_db=-np.inf)
        np.testing.assert_array_equal(scenario.rsi, np.zeros(scenario.M))
        self.assertIsNone(scenario.to_dict()['rsi_db'])

    def test_to_dict_is_plain_data(self):
        data = Scenario(K=2, r_th=(1.0, 2.0)).to_dict()
        self.assertEqual(data['r_th'], [1.0, 2.0])
        self.assertEqual(data['baseline']['tau_d_grid'], [20, 60, 100])
        self.assertEqual(data['propagation']['carrier_freq_ghz'], 3.4)
        self.assertEqual(data['optimizer']['max_iterations'], 50)

    def test_nested_configs_validate(self):
        with self.assertRaises(ParameterError):
            PropagationConfig(min_distance_m=0.0)
        with self.assertRaises(ParameterError):
            OptimizerConfig(convergence_tol=0.0)
