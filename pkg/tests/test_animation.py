"""
Unit tests for staged animation recommendation.
"""
import itertools
import json
import os
import sys
import unittest

# Add src to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from models.animation import (
    AnimStepSpec, AnimationPlanCandidate, Stage, Timing, changed_components, complexity,
    enumerate_pair_specs, recommend_animations, retime,
)
from models.errors import InfeasibleBudget, ValidationError
from models.keyframes import recommend_keyframes
from models.parser import read_chart_spec

FIXTURES = os.path.join(os.path.dirname(__file__), 'fixtures')
FIXTURE_NAMES = ('filter_aggregate', 'mark_encoding_aggregate', 'two_filters', 'encoding_aggregate', 'bin_aggregate')


def fixture_pair(name):
    return (read_chart_spec(os.path.join(FIXTURES, f'{name}_start.json')),
            read_chart_spec(os.path.join(FIXTURES, f'{name}_end.json')))


def filter_aggregate_keyframes():
    start, end = fixture_pair('filter_aggregate')
    return recommend_keyframes(start, end)[0].keyframes


def step(*blocks):
    return AnimStepSpec(tuple(Stage(tuple(block)) for block in blocks))


class TestChangedComponents(unittest.TestCase):
    """Test detecting which visual components change."""

    def test_filter_aggregate_pairs(self):
        k1, k2, k3 = filter_aggregate_keyframes()
        self.assertEqual(changed_components(k1, k2), {"data", "marks"})
        self.assertEqual(changed_components(k2, k3), {"data", "marks", "axis.x", "axis.y"})

    def test_mark_encoding_aggregate(self):
        start, end = fixture_pair('mark_encoding_aggregate')
        self.assertEqual(changed_components(start, end), {"data", "marks", "axis.x", "legend.color"})

    def test_equal_charts(self):
        start, _ = fixture_pair('filter_aggregate')
        self.assertEqual(changed_components(start, start), frozenset())


class TestComplexity(unittest.TestCase):
    """Test the complexity of staged animations."""

    def test_staged_is_simpler_than_simultaneous(self):
        staged = step(["data"], ["marks"])
        simultaneous = step(["data", "marks"])
        self.assertEqual(complexity(staged), 5.0)
        self.assertEqual(complexity(simultaneous), 7.5)
        self.assertLess(complexity(staged), complexity(simultaneous))

    def test_empty_stage_costs_nothing(self):
        self.assertEqual(complexity(step([])), 0.0)

    def test_plan_complexity_is_the_sum_of_its_steps(self):
        steps = (step(["data"], ["marks"]), step(["data", "marks", "axis.x"]))
        plan = AnimationPlanCandidate.of(steps)
        self.assertEqual(plan.total_complexity, sum(complexity(s) for s in steps))
        self.assertEqual(plan.total_stages, 3)

    def test_two_stages_beat_one_for_every_fixture(self):
        for name in FIXTURE_NAMES:
            start, end = fixture_pair(name)
            keyframes = recommend_keyframes(start, end)[0].keyframes
            for a, b in zip(keyframes, keyframes[1:]):
                if len(changed_components(a, b)) < 2:
                    continue
                specs = enumerate_pair_specs(a, b)
                one = min(complexity(s) for s in specs if s.stage_count == 1)
                two = min(complexity(s) for s in specs if s.stage_count == 2)
                self.assertLess(two, one, name)


class TestEnumeratePairSpecs(unittest.TestCase):
    """Test staging a single keyframe pair."""

    def test_fewest_stages_first(self):
        k1, k2, _ = filter_aggregate_keyframes()
        specs = enumerate_pair_specs(k1, k2)
        self.assertEqual(len(specs), 3)
        self.assertEqual(specs[0].stage_count, 1)
        self.assertEqual([s.stage_count for s in specs], sorted(s.stage_count for s in specs))

    def test_guides_never_lead_the_data(self):
        _, k2, k3 = filter_aggregate_keyframes()
        for spec in enumerate_pair_specs(k2, k3):
            data_stage = spec.stage_of("data")
            self.assertLessEqual(data_stage, spec.stage_of("axis.x"))
            self.assertLessEqual(data_stage, spec.stage_of("axis.y"))

    def test_every_changed_component_is_staged_once(self):
        _, k2, k3 = filter_aggregate_keyframes()
        for spec in enumerate_pair_specs(k2, k3):
            self.assertEqual(spec.components, changed_components(k2, k3))

    def test_equal_charts_have_one_empty_stage(self):
        start, _ = fixture_pair('filter_aggregate')
        specs = enumerate_pair_specs(start, start)
        self.assertEqual(len(specs), 1)
        self.assertEqual(specs[0].stages[0].components, ())

    def test_duplicate_component_is_rejected(self):
        with self.assertRaises(ValidationError):
            step(["data"], ["data"])
        with self.assertRaises(ValidationError):
            step(["axis.z"])


class TestRecommendAnimations(unittest.TestCase):
    """Test whole-plan recommendation under a stage budget."""

    def cross_join(self, keyframes):
        options = [enumerate_pair_specs(a, b) for a, b in zip(keyframes, keyframes[1:])]
        return [AnimationPlanCandidate.of(c) for c in itertools.product(*options)]

    def test_matches_cross_join(self):
        for name in FIXTURE_NAMES:
            start, end = fixture_pair(name)
            for sequence in recommend_keyframes(start, end, top_k=1000):
                keyframes = sequence.keyframes
                if len(keyframes) > 4:
                    continue
                self.check_cross_join(f"{name} {sequence.partition.ids}", keyframes)

    def check_cross_join(self, label, keyframes):
        every_plan = self.cross_join(keyframes)
        for stages in range(len(keyframes) - 1, 7):
            expected = [p for p in every_plan if p.total_stages == stages]
            if not expected:
                with self.assertRaises(InfeasibleBudget):
                    recommend_animations(keyframes, stages)
                continue
            actual = recommend_animations(keyframes, stages, top_k=len(expected))
            self.assertEqual(len(actual), len(expected), f"{label} M={stages}")
            self.assertEqual({json.dumps(c.to_document(), sort_keys=True) for c in actual},
                             {json.dumps(c.to_document(), sort_keys=True) for c in expected}, label)

    def test_ranked_by_complexity(self):
        candidates = recommend_animations(filter_aggregate_keyframes(), 3, top_k=10000)
        complexities = [c.total_complexity for c in candidates]
        self.assertEqual(complexities, sorted(complexities))
        self.assertEqual(candidates[0].total_complexity, min(complexities))

    def test_one_stage_per_pair(self):
        candidates = recommend_animations(filter_aggregate_keyframes(), 2)
        self.assertEqual(len(candidates), 1)
        self.assertEqual([s.stage_count for s in candidates[0].steps], [1, 1])

    def test_accepts_a_keyframe_sequence(self):
        start, end = fixture_pair('filter_aggregate')
        sequence = recommend_keyframes(start, end)[0]
        self.assertEqual(recommend_animations(sequence, 2)[0].to_document(),
                         recommend_animations(list(sequence.keyframes), 2)[0].to_document())

    def test_infeasible_budget(self):
        keyframes = filter_aggregate_keyframes()
        for stages in (1, 7):
            with self.assertRaises(InfeasibleBudget) as ctx:
                recommend_animations(keyframes, stages)
            self.assertEqual(ctx.exception.exit_code, 3)

    def test_single_keyframe(self):
        start, _ = fixture_pair('filter_aggregate')
        with self.assertRaises(ValidationError):
            recommend_animations([start], 1)

    def test_timing_is_carried(self):
        candidates = recommend_animations(filter_aggregate_keyframes(), 2, timing=Timing(duration=250))
        stage = candidates[0].steps[0].stages[0]
        self.assertEqual(stage.timing.duration, 250)


class TestRetime(unittest.TestCase):
    """Test editing the timing of one stage."""

    def test_retime_one_stage(self):
        original = step(["data"], ["marks"])
        changed = retime(original, 1, duration=300, stagger=0.25, easing="cubic-in-out")
        self.assertEqual(changed.stages[1].timing, Timing(300, 0.0, 0.25, "cubic-in-out"))
        self.assertEqual(changed.stages[0].timing, original.stages[0].timing)
        self.assertEqual(original.stages[1].timing, Timing())
        self.assertEqual(changed.duration, 900)

    def test_retime_missing_stage(self):
        with self.assertRaises(ValidationError):
            retime(step(["data"]), 1, duration=100)

    def test_invalid_timing(self):
        for changes in ({"duration": 0}, {"delay": -1}, {"stagger": 1.5}, {"easing": "bounce"}):
            with self.assertRaises(ValidationError):
                retime(step(["data"]), 0, **changes)


if __name__ == '__main__':
    unittest.main()
