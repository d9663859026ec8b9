"""
Unit tests for the Keyframer CLI.
"""
import json
import os
import shutil
import sys
import tempfile
import unittest
from io import StringIO
from unittest.mock import patch

# Add src to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from cli import KeyframerApp

FIXTURES = os.path.join(os.path.dirname(__file__), 'fixtures')
FILTER_AGGREGATE_START = os.path.join(FIXTURES, 'filter_aggregate_start.json')
FILTER_AGGREGATE_END = os.path.join(FIXTURES, 'filter_aggregate_end.json')


class CliTestCase(unittest.TestCase):
    """Runs commands against a scratch directory."""

    def setUp(self):
        self.test_dir = tempfile.mkdtemp()
        self.db_path = os.path.join(self.test_dir, 'library.db')

    def tearDown(self):
        shutil.rmtree(self.test_dir)

    def path(self, name):
        return os.path.join(self.test_dir, name)

    def run_cli(self, *argv):
        """Run a command; return its decoded output document."""
        out = StringIO()
        KeyframerApp(stdout=out).run(list(argv))
        return json.loads(out.getvalue())

    def run_failing(self, *argv):
        """Run a command expected to fail; return (exit code, error document)."""
        with patch('sys.stderr', new_callable=StringIO) as err:
            with self.assertRaises(SystemExit) as ctx:
                KeyframerApp(stdout=StringIO()).run(list(argv))
        return ctx.exception.code, json.loads(err.getvalue())['error']

    def write_json(self, name, document):
        with open(self.path(name), 'w') as f:
            json.dump(document, f)
        return self.path(name)


class TestDiff(CliTestCase):
    """Test the diff command."""

    def test_diff(self):
        ops = self.run_cli('diff', FILTER_AGGREGATE_START, FILTER_AGGREGATE_END)
        self.assertEqual([op['id'] for op in ops], ['ADD_AGGREGATE', 'ADD_FILTER:Weight:lte'])

    def test_output_file(self):
        out = StringIO()
        KeyframerApp(stdout=out).run(['diff', FILTER_AGGREGATE_START, FILTER_AGGREGATE_END, '--o', self.path('ops.json')])
        self.assertEqual(out.getvalue(), '')
        with open(self.path('ops.json')) as f:
            self.assertEqual(len(json.load(f)), 2)

    def test_malformed_json(self):
        with open(self.path('broken.json'), 'w') as f:
            f.write('{"mark": ')
        code, error = self.run_failing('diff', self.path('broken.json'), FILTER_AGGREGATE_END)
        self.assertEqual(code, 1)
        self.assertEqual(error['type'], 'ChartSyntaxError')

    def test_missing_file(self):
        code, error = self.run_failing('diff', self.path('nowhere.json'), FILTER_AGGREGATE_END)
        self.assertEqual(code, 1)
        self.assertEqual(error['type'], 'ValidationError')

    def test_unsupported_feature(self):
        with open(FILTER_AGGREGATE_START) as f:
            document = json.load(f)
        document['hconcat'] = []
        code, error = self.run_failing('diff', self.write_json('concat.json', document), FILTER_AGGREGATE_END)
        self.assertEqual(code, 2)
        self.assertEqual(error['type'], 'UnsupportedFeature')


class TestRecommend(CliTestCase):
    """Test the recommendation commands."""

    def test_recommend_keyframes(self):
        sequences = self.run_cli('recommend-keyframes', FILTER_AGGREGATE_START, FILTER_AGGREGATE_END)
        self.assertEqual(sequences[0]['rank'], 1)
        self.assertEqual(sequences[0]['partition'], [['ADD_FILTER:Weight:lte'], ['ADD_AGGREGATE']])
        self.assertEqual([s['rank'] for s in sequences], list(range(1, len(sequences) + 1)))

    def test_top(self):
        self.assertEqual(len(self.run_cli('recommend-keyframes', FILTER_AGGREGATE_START, FILTER_AGGREGATE_END, '--top', '1')), 1)

    def test_invalid_top(self):
        code, error = self.run_failing('recommend-keyframes', FILTER_AGGREGATE_START, FILTER_AGGREGATE_END, '--top', 'many')
        self.assertEqual(code, 1)
        self.assertEqual(error['path'], '--top')

    def test_recommend_anim(self):
        sequences = self.write_json('seq.json', self.run_cli('recommend-keyframes', FILTER_AGGREGATE_START, FILTER_AGGREGATE_END))
        plans = self.run_cli('recommend-anim', sequences, '--stages', '3')
        self.assertTrue(plans)
        for plan in plans:
            self.assertEqual(plan['total_stages'], 3)
        complexities = [p['total_complexity'] for p in plans]
        self.assertEqual(complexities, sorted(complexities))

    def test_infeasible_budget(self):
        sequences = self.write_json('seq.json', self.run_cli('recommend-keyframes', FILTER_AGGREGATE_START, FILTER_AGGREGATE_END))
        code, error = self.run_failing('recommend-anim', sequences, '--stages', '1')
        self.assertEqual(code, 3)
        self.assertEqual(error['type'], 'InfeasibleBudget')


class TestCompileAndSample(CliTestCase):
    """Test compiling, sampling and retiming."""

    def setUp(self):
        super().setUp()
        self.sequences = self.write_json('seq.json', self.run_cli('recommend-keyframes', FILTER_AGGREGATE_START, FILTER_AGGREGATE_END))
        self.plans = self.write_json('plans.json', self.run_cli('recommend-anim', self.sequences, '--stages', '2'))

    def test_compile(self):
        timeline = self.run_cli('compile', self.sequences, self.plans)
        self.assertEqual(timeline['duration'], 1200.0)
        self.assertEqual(timeline['keyframe_times'], [0.0, 600.0, 1200.0])

    def test_compile_with_bad_stagger_order(self):
        code, error = self.run_failing('compile', self.sequences, self.plans, '--stagger-order', 'random')
        self.assertEqual(code, 1)
        self.assertEqual(error['path'], '--stagger-order')

    def test_sample(self):
        timeline = self.write_json('timeline.json', self.run_cli('compile', self.sequences, self.plans))
        scene = self.run_cli('sample', timeline, '--t', '1')
        self.assertEqual(scene['t'], 1.0)
        self.assertIn('axis.x', scene['elements'])

    def test_sample_out_of_range(self):
        timeline = self.write_json('timeline.json', self.run_cli('compile', self.sequences, self.plans))
        code, error = self.run_failing('sample', timeline, '--t', '1.5')
        self.assertEqual(code, 1)
        self.assertEqual(error['type'], 'OutOfRange')

    def test_retime(self):
        plan = self.run_cli('retime', self.plans, '--step', '1', '--stage', '0',
                            '--duration', '300', '--easing', 'cubic-in-out')
        stage = plan['steps'][1]['stages'][0]
        self.assertEqual(stage['duration'], 300.0)
        self.assertEqual(stage['easing'], 'cubic-in-out')
        self.assertEqual(plan['steps'][0]['stages'][0]['duration'], 600.0)

    def test_retime_missing_step(self):
        code, error = self.run_failing('retime', self.plans, '--step', '5', '--stage', '0', '--delay', '10')
        self.assertEqual(code, 1)
        self.assertEqual(error['path'], '--step')


class TestPipeline(CliTestCase):
    """Test the end-to-end pipeline command."""

    def test_pipeline(self):
        document = self.run_cli('pipeline', FILTER_AGGREGATE_START, FILTER_AGGREGATE_END, '--stages', '2', '--t', '0.5')
        self.assertEqual(set(document), {'keyframes', 'animations', 'timeline', 'sample'})
        self.assertEqual(document['timeline']['duration'], 1200.0)
        self.assertEqual(document['sample']['t'], 0.5)

    def test_pipeline_is_deterministic(self):
        for name in ('filter_aggregate', 'mark_encoding_aggregate', 'two_filters', 'encoding_aggregate', 'bin_aggregate'):
            start = os.path.join(FIXTURES, f'{name}_start.json')
            end = os.path.join(FIXTURES, f'{name}_end.json')
            best = self.run_cli('recommend-keyframes', start, end, '--top', '1')[0]
            stages = str(len(best['keyframes']) - 1)
            first = StringIO()
            second = StringIO()
            KeyframerApp(stdout=first).run(['pipeline', start, end, '--stages', stages, '--t', '0.3'])
            KeyframerApp(stdout=second).run(['pipeline', start, end, '--stages', stages, '--t', '0.3'])
            self.assertEqual(first.getvalue(), second.getvalue(), name)

    def test_pipeline_infeasible(self):
        code, error = self.run_failing('pipeline', FILTER_AGGREGATE_START, FILTER_AGGREGATE_END, '--stages', '40')
        self.assertEqual(code, 3)
        self.assertEqual(error['path'], 'stages')


class TestLibrary(CliTestCase):
    """Test the animation library commands."""

    def setUp(self):
        super().setUp()
        self.sequences = self.write_json('seq.json', self.run_cli('recommend-keyframes', FILTER_AGGREGATE_START, FILTER_AGGREGATE_END))
        self.plans = self.write_json('plans.json', self.run_cli('recommend-anim', self.sequences, '--stages', '2'))

    def test_save_list_and_load(self):
        saved = self.run_cli('save_animation', 'weights', self.sequences, self.plans, '--db', self.db_path)
        self.assertEqual(saved, {'saved': 'weights', 'keyframes': 3, 'stages': 2})
        self.assertEqual(self.run_cli('list_animations', '--db', self.db_path),
                         [{'name': 'weights', 'keyframes': 3, 'stages': 2}])
        loaded = self.run_cli('load_animation', 'weights', '--db', self.db_path)
        self.assertEqual(loaded['name'], 'weights')
        self.assertEqual(len(loaded['keyframes']), 3)
        self.assertEqual(loaded['plan']['total_stages'], 2)

    def test_loaded_animation_compiles(self):
        self.run_cli('save_animation', 'weights', self.sequences, self.plans, '--db', self.db_path)
        loaded = self.write_json('loaded.json', self.run_cli('load_animation', 'weights', '--db', self.db_path))
        with open(loaded) as f:
            plan = self.write_json('plan.json', json.load(f)['plan'])
        timeline = self.run_cli('compile', loaded, plan)
        self.assertEqual(timeline['duration'], 1200.0)

    def test_load_missing(self):
        code, error = self.run_failing('load_animation', 'nothing', '--db', self.db_path)
        self.assertEqual(code, 1)
        self.assertEqual(error['type'], 'AnimationNotFound')

    def test_empty_library(self):
        self.assertEqual(self.run_cli('list_animations', '--db', self.db_path), [])


if __name__ == '__main__':
    unittest.main()
