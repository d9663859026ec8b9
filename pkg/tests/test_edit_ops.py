"""
Unit tests for diffing charts into edit operations and applying them.
"""
import copy
import itertools
import os
import sys
import unittest

# Add src to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from models.edit_ops import EditKind, apply_block, apply_ops, diff
from models.errors import InapplicableOp, InvalidResult, UnsupportedFeature
from models.keyframes import enumerate_partitions
from models.parser import load_chart_spec, read_chart_spec, serialize, spec_key, specs_equal

FIXTURES = os.path.join(os.path.dirname(__file__), 'fixtures')


def fixture_pair(name):
    return (read_chart_spec(os.path.join(FIXTURES, f'{name}_start.json')),
            read_chart_spec(os.path.join(FIXTURES, f'{name}_end.json')))


BASE = {
    "mark": "point",
    "encoding": {
        "x": {"field": "v", "type": "quantitative"},
        "y": {"field": "w", "type": "quantitative"},
    },
    "data": {"values": [
        {"g": "a", "v": 1, "w": 5},
        {"g": "b", "v": 2, "w": 6},
        {"g": "b", "v": 4, "w": 9},
    ]},
}


def chart(**encoding):
    doc = copy.deepcopy(BASE)
    doc["encoding"].update(encoding)
    return load_chart_spec(doc)


def filtered(predicate, **encoding):
    doc = copy.deepcopy(BASE)
    doc["encoding"].update(encoding)
    doc["transform"] = [{"filter": predicate}]
    return load_chart_spec(doc)


FIXTURE_NAMES = ('filter_aggregate', 'mark_encoding_aggregate', 'two_filters', 'encoding_aggregate', 'bin_aggregate')


def generated_pairs():
    """Fixture pairs plus small pairs over one shared dataset."""
    pairs = [fixture_pair(name) for name in FIXTURE_NAMES]
    color = {"field": "g", "type": "nominal"}
    mean_w = {"field": "w", "type": "quantitative", "aggregate": "mean"}
    pairs += [
        (chart(), chart(color=color)),
        (chart(color=color), chart(x={"field": "g", "type": "nominal"}, y=mean_w)),
        (chart(), chart(x={"field": "v", "type": "quantitative", "scale": {"type": "log"}})),
        (chart(), filtered({"field": "v", "lte": 2}, color=color)),
        (filtered({"field": "v", "gte": 2}), filtered({"field": "v", "gte": 1}, x={"field": "w", "type": "quantitative"})),
        (chart(color=color), filtered({"field": "g", "oneOf": ["b"]}, x={"field": "g", "type": "nominal"}, y=mean_w)),
    ]
    return pairs


class TestDiff(unittest.TestCase):
    """Test itemizing chart differences."""

    def test_filter_aggregate(self):
        start, end = fixture_pair('filter_aggregate')
        self.assertEqual(diff(start, end).ids, ("ADD_AGGREGATE", "ADD_FILTER:Weight:lte"))

    def test_mark_encoding_aggregate(self):
        start, end = fixture_pair('mark_encoding_aggregate')
        ops = diff(start, end)
        self.assertEqual(ops.ids, ("ADD_AGGREGATE", "MARK", "MODIFY_ENCODING:x"))
        aggregate = ops.ops[0]
        self.assertEqual(aggregate.channels, ("y", "color"))

    def test_two_filters_filters_are_separate_ops(self):
        start, end = fixture_pair('two_filters')
        self.assertEqual(diff(start, end).ids, ("MODIFY_FILTER:region:oneOf", "MODIFY_FILTER:year:range"))

    def test_encoding_aggregate(self):
        start, end = fixture_pair('encoding_aggregate')
        self.assertEqual(diff(start, end).ids, ("ADD_AGGREGATE", "ADD_ENCODING:color"))

    def test_bin_aggregate(self):
        start, end = fixture_pair('bin_aggregate')
        self.assertEqual(diff(start, end).ids, ("ADD_AGGREGATE", "ADD_BIN"))

    def test_equal_charts_have_no_ops(self):
        start, _ = fixture_pair('filter_aggregate')
        self.assertEqual(len(diff(start, start)), 0)

    def test_explicit_scale_change(self):
        ops = diff(chart(), chart(x={"field": "v", "type": "quantitative", "scale": {"type": "log"}}))
        self.assertEqual(ops.ids, ("MODIFY_SCALE:x",))

    def test_default_scale_follows_encoding(self):
        ops = diff(chart(), chart(x={"field": "g", "type": "nominal"}))
        self.assertEqual(ops.ids, ("MODIFY_ENCODING:x",))

    def test_remove_encoding(self):
        start = chart(color={"field": "g", "type": "nominal"})
        ops = diff(start, chart())
        self.assertEqual(ops.ids, ("REMOVE_ENCODING:color",))

    def test_reverse_diff_inverts_kinds(self):
        start, end = fixture_pair('filter_aggregate')
        forward = {op.kind for op in diff(start, end)}
        backward = {op.kind for op in diff(end, start)}
        self.assertEqual(backward, {op.inverse().kind for op in diff(start, end)})
        self.assertEqual(forward, {EditKind.ADD_AGGREGATE, EditKind.ADD_FILTER})

    def test_aggregate_op_swap_is_unsupported(self):
        a = chart(color={"field": "g", "type": "nominal"},
                  y={"field": "w", "type": "quantitative", "aggregate": "mean"})
        b = chart(color={"field": "g", "type": "nominal"},
                  y={"field": "w", "type": "quantitative", "aggregate": "sum"})
        with self.assertRaises(UnsupportedFeature):
            diff(a, b)

    def test_layers_are_unsupported(self):
        doc = copy.deepcopy(BASE)
        doc["layers"] = [{"name": "avg", "mark": "rule",
                          "encoding": {"x": {"field": "v", "type": "quantitative", "aggregate": "mean"}}}]
        with self.assertRaises(UnsupportedFeature):
            diff(load_chart_spec(doc), chart())

    def test_document(self):
        start, end = fixture_pair('filter_aggregate')
        docs = diff(start, end).to_document()
        self.assertEqual(docs[1]["kind"], "ADD_FILTER")
        self.assertEqual(docs[1]["payload"], {"predicate": {"field": "Weight", "lte": 40}})
        self.assertEqual(set(docs[0]), {"id", "kind", "path", "payload"})


class TestApply(unittest.TestCase):
    """Test applying edit operation blocks."""

    def test_applying_every_op_reaches_the_end(self):
        for name in ('filter_aggregate', 'mark_encoding_aggregate', 'two_filters', 'encoding_aggregate', 'bin_aggregate'):
            start, end = fixture_pair(name)
            ops = diff(start, end)
            self.assertTrue(specs_equal(apply_block(start, ops.ops), end), name)

    def test_block_order_does_not_matter(self):
        start, end = fixture_pair('mark_encoding_aggregate')
        ops = diff(start, end).ops
        self.assertEqual(apply_block(start, ops), apply_block(start, tuple(reversed(ops))))

    def test_sequential_blocks(self):
        start, end = fixture_pair('filter_aggregate')
        aggregate, filtering = diff(start, end).ops
        charts = apply_ops(start, [(filtering,), (aggregate,)])
        self.assertEqual(len(charts), 3)
        self.assertFalse(charts[1].is_aggregated)
        self.assertTrue(specs_equal(charts[2], end))

    def test_inapplicable_op(self):
        start, end = fixture_pair('filter_aggregate')
        aggregate = diff(start, end).ops[0]
        with self.assertRaises(InapplicableOp):
            apply_block(end, [aggregate])

    def test_bar_over_raw_data_is_invalid_result(self):
        start, end = fixture_pair('mark_encoding_aggregate')
        mark = [op for op in diff(start, end) if op.kind == EditKind.MARK]
        with self.assertRaises(InvalidResult):
            apply_block(start, mark)

    def test_empty_block_is_identity(self):
        start, _ = fixture_pair('filter_aggregate')
        self.assertIs(apply_block(start, []), start)


def outcome(spec, block):
    try:
        return spec_key(apply_block(spec, block))
    except (InapplicableOp, InvalidResult) as e:
        return type(e).__name__


class TestEditProperties(unittest.TestCase):
    """Test diff and apply properties over fixture and generated chart pairs."""

    def test_every_partition_reaches_the_end(self):
        for start, end in generated_pairs():
            ops = diff(start, end)
            reached = 0
            for partition in enumerate_partitions(ops, cap=8):
                try:
                    charts = apply_ops(start, partition)
                except (InapplicableOp, InvalidResult):
                    continue
                reached += 1
                self.assertTrue(specs_equal(charts[-1], end), partition.ids)
            self.assertGreater(reached, 0, ops.ids)

    def test_no_ops_only_between_equal_charts(self):
        color = {"field": "g", "type": "nominal"}
        charts = [
            chart(),
            load_chart_spec(serialize(chart())),
            chart(color=color),
            chart(x={"field": "g", "type": "nominal"}),
            chart(x={"field": "v", "type": "quantitative", "scale": {"type": "log"}}),
            filtered({"field": "v", "lte": 2}),
            filtered({"field": "v", "lte": 4}),
        ]
        for a, b in itertools.product(charts, repeat=2):
            self.assertEqual(len(diff(a, b)) == 0, specs_equal(a, b))

    def test_reverse_diff_holds_every_inverse(self):
        for start, end in generated_pairs():
            forward, backward = diff(start, end), diff(end, start)
            self.assertEqual(len(forward), len(backward))
            for op in forward:
                self.assertIn(op.inverse(), backward, op.id)

    def test_every_application_order_agrees(self):
        for start, end in generated_pairs():
            ops = diff(start, end).ops
            for size in range(1, len(ops) + 1):
                for block in itertools.combinations(ops, size):
                    outcomes = {outcome(start, order) for order in itertools.permutations(block)}
                    self.assertEqual(len(outcomes), 1, [op.id for op in block])


if __name__ == '__main__':
    unittest.main()
