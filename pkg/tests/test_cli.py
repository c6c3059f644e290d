import os
import json
import tempfile
import unittest
from pathlib import Path
from unittest.mock import patch

from click.testing import CliRunner

from pyfekete.cli import cli
from pyfekete.spectrum import arc_max_spectrum
from pyfekete.writer import MANIFEST_SUFFIX


class TestCli(unittest.TestCase):

    def setUp(self):
        self.runner = CliRunner()
        self.home = tempfile.TemporaryDirectory()
        self.patcher_home = patch('pathlib.Path.home', return_value=Path(self.home.name))
        self.patcher_home.start()
        self.patcher_env = patch.dict(os.environ, {"PYFEKETE_THREADS": "2"})
        self.patcher_env.start()

    def tearDown(self):
        self.patcher_env.stop()
        self.patcher_home.stop()
        self.home.cleanup()

    def test_setup_copies_config_once(self):
        result = self.runner.invoke(cli, ['setup'])
        self.assertEqual(result.exit_code, 0)
        target = Path(self.home.name) / '.pyfekete_config.json'
        self.assertTrue(target.exists())
        self.assertEqual(json.loads(target.read_text())['DEFAULT_P'], 200003)

        result = self.runner.invoke(cli, ['setup'])
        self.assertIn("already exists", result.output)

    def test_tail_writes_csv_and_manifest(self):
        with self.runner.isolated_filesystem():
            result = self.runner.invoke(cli, ['tail', '--p', '101', '--orders', '2', '--vstep', '0.1',
                                              '--out', 'out/tail.csv'])
            self.assertEqual(result.exit_code, 0, result.output)
            with open('out/tail.csv', 'rb') as file:
                lines = file.read().decode('utf-8').split('\n')
            self.assertEqual(lines[0], 'V,phi,order,p,kind,shift')
            self.assertEqual(lines[1], '0,1,2,101,midpoint,0')

            with open('out/tail.csv' + MANIFEST_SUFFIX, encoding='utf-8') as file:
                manifest = json.load(file)
            self.assertEqual(manifest['command'], 'tail')
            self.assertEqual(manifest['parameters']['p'], 101)
            self.assertEqual(manifest['parameters']['threads'], 2)
            self.assertEqual(manifest['outputs'], ['out/tail.csv'])

    def test_tail_rejects_order_not_dividing(self):
        result = self.runner.invoke(cli, ['tail', '--p', '101', '--orders', '2,3'])
        self.assertEqual(result.exit_code, 2)
        self.assertIn("do not divide", result.output)

    def test_tail_rejects_composite(self):
        result = self.runner.invoke(cli, ['tail', '--p', '100'])
        self.assertEqual(result.exit_code, 2)

    def test_tail_svg_and_parquet(self):
        with self.runner.isolated_filesystem(), \
                patch('pyfekete.writer.pd.DataFrame.to_parquet', autospec=True) as mock_to_parquet:
            result = self.runner.invoke(cli, ['tail', '--p', '101', '--orders', '2,5', '--vstep', '0.05',
                                              '--out', 't.csv', '--svg', 't.svg', '--parquet', 's.parquet'])
            self.assertEqual(result.exit_code, 0, result.output)
            with open('t.svg', encoding='utf-8') as file:
                svg = file.read()
            self.assertEqual(svg.count('<polyline'), 2)
            self.assertIn('stroke-dasharray', svg)
            self.assertIn('class="tail-window"', svg)
            self.assertTrue(os.path.exists('t.svg' + MANIFEST_SUFFIX))
            frame = mock_to_parquet.call_args[0][0]
            self.assertEqual(len(frame), 2 * 101)
            self.assertEqual(set(frame['order']), {2, 5})

    def test_replay_reproduces_bytes(self):
        with self.runner.isolated_filesystem():
            args = ['tail', '--p', '211', '--orders', '2,3', '--kind', 'arcmax', '--grid', '4',
                    '--refine-top', '5', '--out', 'a.csv']
            self.assertEqual(self.runner.invoke(cli, args).exit_code, 0)
            with open('a.csv', 'rb') as file:
                first = file.read()
            os.remove('a.csv')

            result = self.runner.invoke(cli, ['replay', 'a.csv' + MANIFEST_SUFFIX])
            self.assertEqual(result.exit_code, 0, result.output)
            with open('a.csv', 'rb') as file:
                self.assertEqual(file.read(), first)

    def test_tail_refine_top_zero_refines_every_arc(self):
        with self.runner.isolated_filesystem(), \
                patch('pyfekete.spectrum.arc_max_spectrum', wraps=arc_max_spectrum) as mock_arc_max:
            result = self.runner.invoke(cli, ['tail', '--p', '101', '--orders', '2', '--kind', 'arcmax',
                                              '--grid', '4', '--refine-top', '0', '--out', 'a.csv'])
            self.assertEqual(result.exit_code, 0, result.output)
            self.assertIsNone(mock_arc_max.call_args[1]['refine_top'])
            with open('a.csv' + MANIFEST_SUFFIX, encoding='utf-8') as file:
                self.assertEqual(json.load(file)['parameters']['refine_top'], 0)

    def test_replay_rejects_unknown_command(self):
        with self.runner.isolated_filesystem():
            with open('m.json', 'w', encoding='utf-8') as file:
                json.dump({"command": "verify", "parameters": {}}, file)
            result = self.runner.invoke(cli, ['replay', 'm.json'])
            self.assertEqual(result.exit_code, 2)

    def test_constants_json(self):
        with self.runner.isolated_filesystem():
            result = self.runner.invoke(cli, ['constants', '--orders', '2', '--out', 'c.json'])
            self.assertEqual(result.exit_code, 0, result.output)
            with open('c.json', encoding='utf-8') as file:
                text = file.read()
            records = json.loads(text)
            self.assertEqual(json.dumps(records, indent=2, sort_keys=True) + "\n", text)
            self.assertLess(abs(records[0]['hat_C_d'] - 0.1029), 5e-4)
            self.assertIn('C_d_upper_proof', records[0])
            self.assertIn('C_d_upper_displayed', records[0])

    def test_constants_table(self):
        result = self.runner.invoke(cli, ['constants', '--orders', '2'])
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn('hat_C_d', result.output)

    def test_randmodel(self):
        with self.runner.isolated_filesystem():
            args = ['randmodel', '--p', '101', '--orders', '2', '--s', '0,0.01',
                    '--samples', '2048', '--seed', '9', '--out', 'r.json']
            result = self.runner.invoke(cli, args)
            self.assertEqual(result.exit_code, 0, result.output)
            with open('r.json', encoding='utf-8') as file:
                first = file.read()
            records = json.loads(first)
            self.assertEqual(records[0]['value'], 1.0)
            self.assertFalse(records[1]['overflow'])

            self.assertEqual(self.runner.invoke(cli, args).exit_code, 0)
            with open('r.json', encoding='utf-8') as file:
                self.assertEqual(file.read(), first)

    def test_randmodel_bad_s(self):
        result = self.runner.invoke(cli, ['randmodel', '--p', '101', '--s', 'one,two'])
        self.assertEqual(result.exit_code, 2)

    def test_verify_single_check(self):
        result = self.runner.invoke(cli, ['verify', '--only', 'maxsum'])
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn('maxsum', result.output)

    def test_verify_corrupted_fixture(self):
        with self.runner.isolated_filesystem():
            with open('fixtures.json', 'w', encoding='utf-8') as file:
                json.dump({"maxsum_d2_n1000": {"value": 1.0, "tol": 1e-6}}, file)
            result = self.runner.invoke(cli, ['verify', '--fixtures', 'fixtures.json', '--only', 'maxsum'])
            self.assertEqual(result.exit_code, 1)
            self.assertIn('FAILED: maxsum', result.output)

    def test_verify_configuration_errors(self):
        result = self.runner.invoke(cli, ['verify', '--fixtures', 'does-not-exist.json'])
        self.assertEqual(result.exit_code, 2)
        with self.runner.isolated_filesystem():
            with open('bad.json', 'w', encoding='utf-8') as file:
                file.write('{"hat_C_2": 3}')
            result = self.runner.invoke(cli, ['verify', '--fixtures', 'bad.json'])
            self.assertEqual(result.exit_code, 2)

    def test_verify_unknown_check(self):
        result = self.runner.invoke(cli, ['verify', '--only', 'nonsense'])
        self.assertEqual(result.exit_code, 2)


if __name__ == '__main__':
    unittest.main()
