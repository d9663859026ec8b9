"""
Unit tests for compiling and sampling animation timelines.
"""
import copy
import math
import os
import sys
import unittest
from collections import Counter

# Add src to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from models.animation import AnimStepSpec, Stage, enumerate_pair_specs, retime
from models.documents import keyframes_from_document, read_document
from models.errors import CoverageMismatch, JoinAmbiguity, OutOfRange, ValidationError
from models.keyframes import recommend_keyframes
from models.parser import load_chart_spec, read_chart_spec
from models.scene import render_scene
from models.timeline import compile_timeline, keyframe_t, sample, sample_at

FIXTURES = os.path.join(os.path.dirname(__file__), 'fixtures')


def median_keyframes():
    return keyframes_from_document(read_document(os.path.join(FIXTURES, 'median_sequence.json')))


def default_steps(keyframes):
    return [enumerate_pair_specs(a, b)[0] for a, b in zip(keyframes, keyframes[1:])]


def _hashable(attrs):
    return tuple(sorted((k, tuple(v) if isinstance(v, (list, tuple)) else v) for k, v in attrs.items()))


def visible_marks(elements):
    return Counter(_hashable(a) for a in elements.values() if "mark" in a and a["opacity"] > 0)


def visible_guides(elements):
    return {eid: a for eid, a in elements.items() if "mark" not in a and a["opacity"] > 0}


def small_chart(rows, **encoding):
    doc = {
        "mark": "point",
        "encoding": {"x": {"field": "v", "type": "quantitative"}},
        "data": {"values": copy.deepcopy(rows)},
    }
    doc["encoding"].update(encoding)
    return load_chart_spec(doc)


class TestCompileTimeline(unittest.TestCase):
    """Test timeline fidelity on the median sequence."""

    def setUp(self):
        self.keyframes = median_keyframes()
        self.timeline = compile_timeline(self.keyframes, default_steps(self.keyframes))

    def test_keyframe_times(self):
        self.assertEqual(self.timeline.keyframe_times, (0.0, 600.0, 1200.0, 1800.0, 2400.0, 3000.0))
        self.assertEqual(self.timeline.duration, 3000.0)

    def test_boundaries_match_static_scenes(self):
        for index, chart in enumerate(self.keyframes):
            sampled = sample(self.timeline, keyframe_t(self.timeline, index)).elements
            expected = render_scene(chart)
            self.assertEqual(visible_marks(sampled), visible_marks(expected), f"keyframe {index}")
            self.assertEqual(visible_guides(sampled), visible_guides(expected), f"keyframe {index}")

    def test_start_and_end(self):
        first = sample(self.timeline, 0).visible()
        last = sample(self.timeline, 1).visible()
        self.assertEqual(visible_marks(first), visible_marks(render_scene(self.keyframes[0])))
        self.assertEqual(visible_marks(last), visible_marks(render_scene(self.keyframes[-1])))

    def test_linear_interpolation(self):
        moving = [t for t in self.timeline.tracks if t.attribute == "x" and t.start < t.end]
        self.assertTrue(moving)
        for track in moving:
            for fraction in (0.25, 0.5, 0.75):
                time = track.start + fraction * (track.end - track.start)
                value = sample_at(self.timeline, time)[track.element]["x"]
                expected = track.from_value + fraction * (track.to_value - track.from_value)
                self.assertAlmostEqual(value, expected, delta=1e-9)

    def test_merge_keeps_one_mark_per_group(self):
        sampled = sample(self.timeline, keyframe_t(self.timeline, 4)).visible()
        base = [eid for eid in sampled if eid.startswith("marks/")]
        self.assertEqual(len(base), 2)

    def test_elements_enter_invisible(self):
        rules = [eid for eid in self.timeline.initial if eid.startswith("median_rule/")]
        self.assertTrue(rules)
        for eid in rules:
            self.assertEqual(self.timeline.initial[eid]["opacity"], 0.0)

    def test_document(self):
        doc = self.timeline.to_document()
        self.assertEqual(set(doc), {"duration", "keyframe_times", "segments", "tracks", "elements"})
        self.assertEqual(len(doc["segments"]), 5)
        self.assertEqual(set(doc["tracks"][0]), {"element", "attribute", "start", "end", "from", "to",
                                                 "easing", "offset"})

    def test_deterministic(self):
        again = compile_timeline(self.keyframes, default_steps(self.keyframes))
        self.assertEqual(again.to_document(), self.timeline.to_document())


class TestStaging(unittest.TestCase):
    """Test stage layout, stagger and timing."""

    ROWS = [{"g": "a", "v": 4}, {"g": "b", "v": 3}, {"g": "c", "v": 2}, {"g": "d", "v": 1}]

    def setUp(self):
        self.a = small_chart(self.ROWS)
        self.b = small_chart(self.ROWS, color={"field": "g", "type": "nominal"})
        self.step = retime(enumerate_pair_specs(self.a, self.b)[0], 0, stagger=0.5)

    def color_tracks(self, timeline):
        return {t.element: t for t in timeline.tracks if t.attribute == "color"}

    def test_stagger_offsets_in_data_order(self):
        tracks = self.color_tracks(compile_timeline([self.a, self.b], [self.step]))
        self.assertEqual({eid: t.offset for eid, t in tracks.items()},
                         {"marks/a": 0.0, "marks/b": 100.0, "marks/c": 200.0, "marks/d": 300.0})
        for track in tracks.values():
            self.assertEqual(track.end - track.start, 300.0)

    def test_stagger_offsets_in_value_order(self):
        timeline = compile_timeline([self.a, self.b], [self.step], stagger_order="value")
        tracks = self.color_tracks(timeline)
        self.assertEqual(tracks["marks/d"].offset, 0.0)
        self.assertEqual(tracks["marks/a"].offset, 300.0)

    def test_unknown_stagger_order(self):
        with self.assertRaises(ValidationError):
            compile_timeline([self.a, self.b], [self.step], stagger_order="random")

    def test_delay_shifts_the_stage(self):
        step = retime(self.step, 0, delay=200)
        timeline = compile_timeline([self.a, self.b], [step])
        self.assertEqual(timeline.duration, 800.0)
        self.assertTrue(all(t.start >= 200.0 for t in timeline.tracks))

    def test_guides_follow_their_stage(self):
        step = AnimStepSpec((Stage(("marks",)), Stage(("legend.color",))))
        timeline = compile_timeline([self.a, self.b], [step])
        legend = [t for t in timeline.tracks if t.element == "legend.color"]
        self.assertTrue(legend)
        self.assertTrue(all(t.start == 600.0 for t in legend))
        self.assertTrue(all(t.end <= 600.0 for t in self.color_tracks(timeline).values()))

    def test_identical_keyframes_have_no_tracks(self):
        step = enumerate_pair_specs(self.a, self.a)[0]
        timeline = compile_timeline([self.a, self.a], [step])
        self.assertEqual(timeline.tracks, ())
        self.assertEqual(timeline.duration, 600.0)


class TestCompileErrors(unittest.TestCase):
    """Test timeline compilation failures."""

    def test_coverage_mismatch(self):
        start = read_chart_spec(os.path.join(FIXTURES, 'filter_aggregate_start.json'))
        end = read_chart_spec(os.path.join(FIXTURES, 'filter_aggregate_end.json'))
        keyframes = recommend_keyframes(start, end)[0].keyframes
        steps = default_steps(keyframes)
        steps[0] = AnimStepSpec((Stage(("data",)),))
        with self.assertRaises(CoverageMismatch) as ctx:
            compile_timeline(keyframes, steps)
        self.assertEqual(ctx.exception.path, "steps[0]")

    def test_step_count(self):
        keyframes = median_keyframes()
        with self.assertRaises(ValidationError):
            compile_timeline(keyframes, default_steps(keyframes)[1:])
        with self.assertRaises(ValidationError):
            compile_timeline(keyframes[:1], [])

    def test_join_ambiguity_and_key_override(self):
        rows = [{"g": "a", "v": 1}, {"g": "a", "v": 2}]
        a = small_chart(rows)
        b = small_chart(rows, color={"field": "g", "type": "nominal"})
        steps = default_steps([a, b])
        with self.assertRaises(JoinAmbiguity):
            compile_timeline([a, b], steps)
        timeline = compile_timeline([a, b], steps, key="v")
        self.assertEqual(visible_marks(sample(timeline, 1).elements), visible_marks(render_scene(b)))


class TestSample(unittest.TestCase):
    """Test sampling at normalized times."""

    def setUp(self):
        keyframes = median_keyframes()
        self.timeline = compile_timeline(keyframes, default_steps(keyframes))

    def test_out_of_range(self):
        for t in (-0.1, 1.5, math.nan):
            with self.assertRaises(OutOfRange):
                sample(self.timeline, t)

    def test_sample_document(self):
        doc = sample(self.timeline, 0.5).to_document()
        self.assertEqual(doc["t"], 0.5)
        self.assertTrue(all(isinstance(a["color"], list) for a in doc["elements"].values() if "color" in a))


if __name__ == '__main__':
    unittest.main()
