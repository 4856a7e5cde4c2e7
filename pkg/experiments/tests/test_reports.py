from pathlib import Path
import io
import json
import math
import tempfile

from django.test import SimpleTestCase
import numpy as np

from experiments.reports import ReportWriter, config_hash, format_cell, json_safe, write_table

from .factories import drop_result


class FormatCellTests(SimpleTestCase):

    def test_cells(self):
        self.assertEqual(format_cell(None), '')
        self.assertEqual(format_cell(True), 'true')
        self.assertEqual(format_cell(np.int64(7)), '7')
        self.assertEqual(format_cell(0.1), '0.1')
        self.assertEqual(format_cell(np.float64(1e-12)), '1e-12')
        self.assertEqual(format_cell(math.nan), '')
        self.assertEqual(format_cell('ts_tau20'), 'ts_tau20')

    def test_floats_round_trip(self):
        value = 2 / 3
        self.assertEqual(float(format_cell(value)), value)


class WriteTableTests(SimpleTestCase):

    def test_long_format(self):
        stream = io.StringIO()
        write_table([('r_th', 2.5, 'proposed', 'outage_rate', 0.25, None)], stream)
        self.assertEqual(
            stream.getvalue(),
            "sweep_var,sweep_value,algorithm,metric,value,stderr\n"
            "r_th,2.5,proposed,outage_rate,0.25,\n",
        )


class HashTests(SimpleTestCase):

    def test_key_order_does_not_matter(self):
        self.assertEqual(config_hash({'M': 4, 'K': 2}), config_hash({'K': 2, 'M': 4}))
        self.assertNotEqual(config_hash({'M': 4}), config_hash({'M': 5}))
        self.assertEqual(len(config_hash({})), 64)

    def test_json_safe(self):
        self.assertEqual(json_safe({'a': [math.nan, 1.0], 'b': (math.inf,)}), {'a': [None, 1.0], 'b': [None]})


class ReportWriterTests(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.out = Path(self.tmp.name) / 'nested' / 'run'

    def test_writes_files_and_manifest(self):
        writer = ReportWriter(self.out)
        writer.write_table('run.csv', [('', None, 'proposed', 'objective', 0.5, 0.1)])
        writer.write_drops('run_drops.csv', [drop_result(0), drop_result(1, feasible=False)])
        writer.write_manifest(
            command='run_campaign', scenario_dict={'M': 4, 'rsi_db': None}, seed=3, parameters={'tau_d_grid': [20]},
        )

        self.assertEqual(writer.files, ['run.csv', 'run_drops.csv', 'manifest.json'])
        drops = (self.out / 'run_drops.csv').read_text().splitlines()
        self.assertEqual(drops[0].split(',')[:5], ['drop', 'sweep_var', 'sweep_value', 'algorithm', 'feasible'])
        self.assertEqual(drops[2].split(',')[4], 'false')

        manifest = json.loads((self.out / 'manifest.json').read_text())
        self.assertEqual(manifest['seed'], 3)
        self.assertEqual(manifest['config_hash'], config_hash({'M': 4, 'rsi_db': None}))
        self.assertEqual(manifest['files'], ['run.csv', 'run_drops.csv'])
        self.assertEqual(manifest['parameters'], {'tau_d_grid': [20]})
        self.assertIn('git_revision', manifest)
