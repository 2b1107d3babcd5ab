import io
import json
import logging
import os
import tempfile
import unittest
import unittest.mock as mock

import numpy as np
import pandas as pd

import cfconstants
from cycleflow_cli import main

DATA_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'cycleflow', 'test', 'data')


def data_path(name):
    return os.path.join(DATA_DIR, name)


@mock.patch('cycleflow_cli.get_defaults', return_value={})
class CycleflowCliTest(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.out = os.path.join(self.tmp.name, 'out.txt')

    def tearDown(self):
        logging.getLogger().handlers.clear()
        self.tmp.cleanup()

    def run_cli(self, *argv):
        with mock.patch('sys.stderr', new_callable=io.StringIO):
            return main(list(argv) + ['--working-dir', self.tmp.name])

    def read_out(self):
        with open(self.out) as fp:
            return fp.read()

    def test_info(self, _):
        code = self.run_cli('info', '--case', data_path('case5.m'), '--format', 'json', '--out', self.out)
        self.assertEqual(code, cfconstants.EXIT_OK)
        record = json.loads(self.read_out())[0]
        self.assertEqual((record['nodes'], record['lines'], record['cycles'], record['slack']), (5, 6, 2, 4))

    def test_ptdf_methods_agree(self, _):
        results = []
        for method in cfconstants.PTDF_METHODS:
            code = self.run_cli('ptdf', '--case', data_path('case5.m'), '--method', method, '--format', 'json',
                                '--out', self.out)
            self.assertEqual(code, cfconstants.EXIT_OK)
            results.append(np.array(json.loads(self.read_out())['values']))
        np.testing.assert_allclose(results[1], results[0], atol=1e-8)
        np.testing.assert_allclose(results[2], results[0], atol=1e-8)

    def test_ptdf_with_slack(self, _):
        code = self.run_cli('ptdf', '--case', data_path('case5.json'), '--slack', '2', '--mode', 'dense',
                            '--out', self.out)
        self.assertEqual(code, cfconstants.EXIT_OK)
        frame = pd.read_csv(io.StringIO(self.read_out()), index_col='line')
        np.testing.assert_array_equal(frame['2'].to_numpy(), np.zeros(6))

    def test_ptdf_prime_and_lodf(self, _):
        self.assertEqual(self.run_cli('ptdf', '--case', data_path('case5.m'), '--prime', '--method', 'qr',
                                      '--format', 'json', '--out', self.out), cfconstants.EXIT_OK)
        self.assertEqual(json.loads(self.read_out())['kind'], cfconstants.PTDF_PRIME)
        self.assertEqual(self.run_cli('lodf', '--case', data_path('case5.m'), '--method', 'conventional',
                                      '--format', 'json', '--out', self.out), cfconstants.EXIT_OK)
        values = np.array(json.loads(self.read_out())['values'], dtype=float)
        np.testing.assert_allclose(np.diag(values), -np.ones(6))

    def test_decompose(self, _):
        code = self.run_cli('decompose', '--case', data_path('case5.m'), '--from', '4', '--to', '1',
                            '--power', '10', '--format', 'json', '--out', self.out)
        self.assertEqual(code, cfconstants.EXIT_OK)
        data = json.loads(self.read_out())
        self.assertEqual((data['source'], data['sink']), (4, 1))

    def test_verify(self, _):
        code = self.run_cli('verify', '--case', data_path('case5.m'), '--out', self.out)
        self.assertEqual(code, cfconstants.EXIT_OK)
        frame = pd.read_csv(self.out)
        self.assertTrue(bool(frame['passed'][0]))

    def test_tie_switch(self, _):
        code = self.run_cli('tie-switch', '--case', data_path('feeder.json'), '--add', '4:6:0.05',
                            '--format', 'json', '--out', self.out)
        self.assertEqual(code, cfconstants.EXIT_OK)
        data = json.loads(self.read_out())
        self.assertEqual(len(data['values']), 6)
        self.assertEqual(data['values'][0], [0.0] * 6)

    def test_tie_switch_on_meshed_grid(self, _):
        code = self.run_cli('tie-switch', '--case', data_path('case5.m'), '--add', '2:5:0.05')
        self.assertEqual(code, cfconstants.EXIT_VALIDATION)

    def test_unscheduled(self, _):
        code = self.run_cli('unscheduled', '--case', data_path('case5.m'),
                            '--schedule', data_path('schedule_direct.json'), '--power', '100', '--out', self.out)
        self.assertEqual(code, cfconstants.EXIT_OK)
        frame = pd.read_csv(self.out)
        np.testing.assert_allclose(frame['actual'], frame['scheduled'] + frame['unscheduled'])
        self.assertEqual(frame['scheduled'][1], -100.0)

    def test_bad_schedule(self, _):
        schedule = os.path.join(self.tmp.name, 'schedule.json')
        with open(schedule, 'w') as fp:
            json.dump({'flows': [2, 0, 0, 0, 0, 0]}, fp)
        code = self.run_cli('unscheduled', '--case', data_path('case5.m'), '--schedule', schedule)
        self.assertEqual(code, cfconstants.EXIT_VALIDATION)

    def test_synth_then_info(self, _):
        grid_path = os.path.join(self.tmp.name, 'synth.json')
        self.assertEqual(self.run_cli('synth', '--nodes', '50', '--chords', '7', '--seed', '3', '--out', grid_path),
                         cfconstants.EXIT_OK)
        self.assertEqual(self.run_cli('info', '--case', grid_path, '--format', 'json', '--out', self.out),
                         cfconstants.EXIT_OK)
        record = json.loads(self.read_out())[0]
        self.assertEqual((record['name'], record['nodes'], record['cycles']), ('synth_50_7_3', 50, 7))

    def test_invalid_inputs(self, _):
        self.assertEqual(self.run_cli('info', '--case', data_path('phase_shifter.m')), cfconstants.EXIT_VALIDATION)
        self.assertEqual(self.run_cli('info', '--case', data_path('malformed.m')), cfconstants.EXIT_VALIDATION)
        self.assertEqual(self.run_cli('info', '--case', data_path('disconnected.json')),
                         cfconstants.EXIT_VALIDATION)
        self.assertEqual(self.run_cli('info', '--case', data_path('nope.m')), cfconstants.EXIT_VALIDATION)
        self.assertEqual(self.run_cli('synth', '--nodes', '4', '--chords', '4'), cfconstants.EXIT_VALIDATION)
        self.assertEqual(self.run_cli('ptdf', '--case', data_path('case5.m'), '--slack', '99'),
                         cfconstants.EXIT_VALIDATION)

    def test_numerical_failure(self, _):
        with mock.patch('cycleflow_cli.method_deviations', return_value={'passed': False, 'name': 'case5'}):
            code = self.run_cli('verify', '--case', data_path('case5.m'), '--out', self.out)
        self.assertEqual(code, cfconstants.EXIT_NUMERICAL)

    def test_bench_and_fit(self, _):
        report = os.path.join(self.tmp.name, 'report.csv')
        code = self.run_cli('bench', '--case', data_path('case5.m'), '--synth', '40:2:1', '40:10:1',
                            '--repetitions', '3', '--session', 'S1', '--out', report)
        self.assertEqual(code, cfconstants.EXIT_OK)
        frame = pd.read_csv(report)
        self.assertEqual(list(frame['name']), ['case5', 'synth_40_2_1', 'synth_40_10_1'])
        self.assertTrue(os.path.exists(os.path.join(self.tmp.name, 'S1', 'checkpoint', 'bench_tasks.log')))

        # three grids are too few to fit
        self.assertEqual(self.run_cli('fit', '--report', report), cfconstants.EXIT_VALIDATION)

    def test_fit(self, _):
        report = os.path.join(self.tmp.name, 'report.csv')
        ratios = np.array([0.01, 0.03, 0.1, 0.3, 1.0])
        pd.DataFrame({'cycles_per_nodes': ratios, 'speedup': 2.0 * ratios ** -0.5}).to_csv(report, index=False)
        self.assertEqual(self.run_cli('fit', '--report', report, '--format', 'json', '--out', self.out),
                         cfconstants.EXIT_OK)
        result = json.loads(self.read_out())[0]
        self.assertAlmostEqual(result['alpha'], 2.0, places=6)
        self.assertAlmostEqual(result['gamma'], 0.5, places=6)
        self.assertEqual(result['grids'], 5)

    def test_bench_repetitions_checked(self, _):
        code = self.run_cli('bench', '--synth', '40:2', '--repetitions', '1')
        self.assertEqual(code, cfconstants.EXIT_VALIDATION)


if __name__ == '__main__':
    unittest.main()
