import math

from django.test import SimpleTestCase

from experiments.results import (
    CampaignResult,
    DropResult,
    crossover_bracket,
    is_non_decreasing,
    is_non_increasing,
)

from .factories import drop_result


class CampaignResultTests(SimpleTestCase):

    def setUp(self):
        self.result = CampaignResult(kind='run', drops=[
            drop_result(0, objective=0.02, se=(1.0, 3.0), fraction=(0.2, 0.4)),
            drop_result(0, algorithm='ts_tau20', feasible=False),
            drop_result(1, objective=0.04, se=(2.0, 2.0), fraction=(0.6, 0.8)),
            drop_result(1, algorithm='ts_tau20', objective=0.05),
            drop_result(2, feasible=False, se=(0.0, 0.0), fraction=(0.0, 0.0)),
            drop_result(2, algorithm='ts_tau20', feasible=False),
        ])

    def test_algorithms_in_first_seen_order(self):
        self.assertEqual(self.result.algorithms(), ['proposed', 'ts_tau20'])

    def test_outage_rate(self):
        self.assertAlmostEqual(self.result.outage_rate('proposed'), 1 / 3)
        self.assertAlmostEqual(self.result.outage_rate('ts_tau20'), 2 / 3)
        self.assertTrue(math.isnan(self.result.outage_rate('missing')))

    def test_aggregates_skip_infeasible_drops(self):
        self.assertAlmostEqual(self.result.mean_battery_fraction('proposed'), (0.3 + 0.7) / 2)
        self.assertAlmostEqual(self.result.mean_se('proposed'), 2.0)
        value, stderr = self.result.metric('objective', 'proposed')
        self.assertAlmostEqual(value, 0.03)
        self.assertAlmostEqual(stderr, 0.01)

    def test_outage_stderr_is_binomial(self):
        rate, stderr = self.result.metric('outage_rate', 'proposed')
        self.assertAlmostEqual(stderr, math.sqrt(rate * (1 - rate) / 3))

    def test_single_feasible_drop_has_no_stderr(self):
        value, stderr = self.result.metric('objective', 'ts_tau20')
        self.assertEqual(value, 0.05)
        self.assertTrue(math.isnan(stderr))

    def test_aggregate_rows_layout(self):
        rows = self.result.aggregate_rows(metrics=('outage_rate', 'se_per_user'))
        self.assertEqual(len(rows), 4)
        self.assertEqual(rows[0][:4], ('', None, 'proposed', 'outage_rate'))
        self.assertEqual(rows[3][2:4], ('ts_tau20', 'se_per_user'))

    def test_by_drop(self):
        by_drop = self.result.by_drop('proposed')
        self.assertEqual(sorted(by_drop), [0, 1, 2])
        self.assertFalse(by_drop[2].feasible)


class TraceTests(SimpleTestCase):

    def test_short_traces_hold_their_last_value(self):
        result = CampaignResult(kind='convergence', sweep_var='mu', drops=[
            drop_result(0, objective=1.0, trace=[3.0, 2.0, 1.0], sweep_var='mu', sweep_value=0.5),
            drop_result(1, objective=3.0, trace=[5.0, 3.0], sweep_var='mu', sweep_value=0.5),
        ])
        mean, stderr = result.mean_trace('proposed', 0.5)
        self.assertEqual(list(mean), [4.0, 2.5, 2.0])
        self.assertEqual(len(stderr), 3)

        rows = result.trace_rows()
        self.assertEqual([row[3] for row in rows], ['objective_iter_1', 'objective_iter_2', 'objective_iter_3'])
        self.assertEqual(rows[0][:3], ('mu', 0.5, 'proposed'))

    def test_no_feasible_drops(self):
        result = CampaignResult(kind='convergence', drops=[drop_result(0, feasible=False)])
        mean, stderr = result.mean_trace('proposed')
        self.assertEqual(mean.size, 0)
        self.assertEqual(result.trace_rows(), [])


class DropResultTests(SimpleTestCase):

    def test_skipped_outage(self):
        skipped = DropResult.skipped_outage(4, 'ts_tau60', 3, 'r_th', 2.5)
        self.assertFalse(skipped.feasible)
        self.assertEqual(skipped.iterations, 0)
        self.assertEqual(skipped.per_user_se, [0.0, 0.0, 0.0])
        self.assertEqual((skipped.sweep_var, skipped.sweep_value), ('r_th', 2.5))

    def test_at_copies(self):
        original = drop_result(1, algorithm='ts_tau20', trace=[0.3, 0.2])
        moved = original.at('rsi_db', -90)
        self.assertEqual((moved.sweep_var, moved.sweep_value), ('rsi_db', -90.0))
        self.assertEqual(original.sweep_value, None)
        moved.objective_trace.append(0.1)
        self.assertEqual(original.objective_trace, [0.3, 0.2])

    def test_record_data_keys(self):
        data = drop_result(0).record_data()
        self.assertEqual(
            sorted(data),
            ['anomaly', 'battery_fraction', 'first_objective', 'objective_trace', 'per_user_se', 'violations'],
        )


class SweepHelperTests(SimpleTestCase):

    def test_crossover_bracket(self):
        grid = [-80, -110, -100, -90]
        proposed = [0.9, 0.1, 0.2, 0.6]
        reference = [0.5, 0.5, 0.5, 0.5]
        self.assertEqual(crossover_bracket(grid, proposed, reference), (-100.0, -90.0))

    def test_crossover_never_below(self):
        self.assertIsNone(crossover_bracket([1, 2], [3, 3], [1, 1]))

    def test_crossover_below_everywhere(self):
        self.assertEqual(crossover_bracket([1, 2], [0, 0], [1, 1]), (2.0, None))

    def test_monotonicity_skips_nan(self):
        self.assertTrue(is_non_decreasing([0.0, math.nan, 0.2, 0.2]))
        self.assertFalse(is_non_decreasing([0.3, 0.2]))
        self.assertTrue(is_non_increasing([3.0, 2.0, math.nan, 2.0]))
        self.assertTrue(is_non_increasing([1.0, 1.0 + 1e-9], tol=1e-8))
