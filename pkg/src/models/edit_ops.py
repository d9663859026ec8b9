"""
Edit operations between two charts.

``diff`` itemizes the difference between two charts into atomic edit
operations; ``apply_block`` synthesizes a new chart by applying a block of
them at once.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Optional, Tuple

from .chart import CHANNELS, ChartSpec, ScaleSpec, Transform, default_scale_type, is_default_scale
from .errors import InapplicableOp, InvalidResult, UnsupportedFeature, ValidationError
from .parser import canonicalize, encoding_document, predicate_document
from .validation import validate_chart

logger = logging.getLogger(__name__)


class EditKind(str, Enum):
    MARK = "MARK"
    ADD_ENCODING = "ADD_ENCODING"
    REMOVE_ENCODING = "REMOVE_ENCODING"
    MODIFY_ENCODING = "MODIFY_ENCODING"
    MODIFY_SCALE = "MODIFY_SCALE"
    ADD_FILTER = "ADD_FILTER"
    REMOVE_FILTER = "REMOVE_FILTER"
    MODIFY_FILTER = "MODIFY_FILTER"
    ADD_AGGREGATE = "ADD_AGGREGATE"
    REMOVE_AGGREGATE = "REMOVE_AGGREGATE"
    ADD_BIN = "ADD_BIN"
    REMOVE_BIN = "REMOVE_BIN"


ENCODING_KINDS = (EditKind.ADD_ENCODING, EditKind.REMOVE_ENCODING, EditKind.MODIFY_ENCODING)
FILTER_KINDS = (EditKind.ADD_FILTER, EditKind.REMOVE_FILTER, EditKind.MODIFY_FILTER)
CHANNEL_SET_KINDS = (EditKind.ADD_AGGREGATE, EditKind.REMOVE_AGGREGATE, EditKind.ADD_BIN, EditKind.REMOVE_BIN)

# Order in which the ops of one block are applied; MODIFY_SCALE must follow
# MODIFY_ENCODING so the encoding's scale carry does not overwrite it.
APPLY_ORDER = (
    EditKind.MARK,
    EditKind.REMOVE_FILTER,
    EditKind.MODIFY_FILTER,
    EditKind.ADD_FILTER,
    EditKind.REMOVE_AGGREGATE,
    EditKind.REMOVE_BIN,
    EditKind.REMOVE_ENCODING,
    EditKind.ADD_ENCODING,
    EditKind.MODIFY_ENCODING,
    EditKind.MODIFY_SCALE,
    EditKind.ADD_BIN,
    EditKind.ADD_AGGREGATE,
)

INVERSE_KINDS = {
    EditKind.ADD_ENCODING: EditKind.REMOVE_ENCODING,
    EditKind.REMOVE_ENCODING: EditKind.ADD_ENCODING,
    EditKind.ADD_FILTER: EditKind.REMOVE_FILTER,
    EditKind.REMOVE_FILTER: EditKind.ADD_FILTER,
    EditKind.ADD_AGGREGATE: EditKind.REMOVE_AGGREGATE,
    EditKind.REMOVE_AGGREGATE: EditKind.ADD_AGGREGATE,
    EditKind.ADD_BIN: EditKind.REMOVE_BIN,
    EditKind.REMOVE_BIN: EditKind.ADD_BIN,
}


@dataclass(frozen=True)
class EditOp:
    """
    An atomic semantic difference between two charts.

    ``before`` holds the from-state and ``after`` the to-state; ADD ops have no
    from-state and REMOVE ops no to-state. Aggregate and bin ops carry a tuple
    of (channel, aggregate op) or (channel, maxbins) pairs.
    """

    kind: EditKind
    channel: Optional[str] = None
    before: Any = None
    after: Any = None

    @property
    def id(self):
        """Deterministic identifier, e.g. ``MODIFY_ENCODING:x``."""
        if self.kind in FILTER_KINDS:
            predicate = self.after if self.after is not None else self.before
            return f"{self.kind.value}:{predicate.field}:{predicate.op}"
        if self.channel is not None:
            return f"{self.kind.value}:{self.channel}"
        return self.kind.value

    @property
    def path(self):
        """Property path the op changes."""
        if self.kind == EditKind.MARK:
            return "mark"
        if self.kind == EditKind.MODIFY_SCALE:
            return f"encoding.{self.channel}.scale"
        if self.kind in ENCODING_KINDS:
            return f"encoding.{self.channel}"
        if self.kind in FILTER_KINDS:
            predicate = self.after if self.after is not None else self.before
            return f"transform.filter({predicate.field},{predicate.op})"
        prop = "aggregate" if self.kind in (EditKind.ADD_AGGREGATE, EditKind.REMOVE_AGGREGATE) else "bin"
        channels = ",".join(c for c, _ in self.after or self.before)
        return f"encoding.{{{channels}}}.{prop}"

    @property
    def channels(self):
        """Channels the op touches."""
        if self.kind in CHANNEL_SET_KINDS:
            return tuple(c for c, _ in self.after or self.before)
        return (self.channel,) if self.channel else ()

    def inverse(self):
        """Return the op that undoes this one."""
        kind = INVERSE_KINDS.get(self.kind, self.kind)
        return EditOp(kind, self.channel, before=self.after, after=self.before)

    def payload(self):
        kind = self.kind
        if kind == EditKind.MARK:
            return {"from": self.before, "to": self.after}
        if kind == EditKind.ADD_ENCODING:
            return {"channel": self.channel, "encoding": encoding_document(self.after)}
        if kind == EditKind.REMOVE_ENCODING:
            return {"channel": self.channel, "encoding": encoding_document(self.before)}
        if kind == EditKind.MODIFY_ENCODING:
            return {
                "channel": self.channel,
                "from": {"field": self.before.field, "type": self.before.type},
                "to": {"field": self.after.field, "type": self.after.type},
            }
        if kind == EditKind.MODIFY_SCALE:
            return {"channel": self.channel, "from": self.before.to_document(),
                    "to": self.after.to_document()}
        if kind == EditKind.ADD_FILTER:
            return {"predicate": predicate_document(self.after)}
        if kind == EditKind.REMOVE_FILTER:
            return {"predicate": predicate_document(self.before)}
        if kind == EditKind.MODIFY_FILTER:
            return {"from": predicate_document(self.before), "to": predicate_document(self.after)}
        key = "op" if kind in (EditKind.ADD_AGGREGATE, EditKind.REMOVE_AGGREGATE) else "maxbins"
        return {"channels": [{"channel": c, key: v} for c, v in self.after or self.before]}

    def to_document(self):
        return {"id": self.id, "kind": self.kind.value, "path": self.path, "payload": self.payload()}

    def __str__(self):
        return self.id


def op_sort_key(op):
    return op.id


@dataclass(frozen=True)
class EditOpSet:
    """The edit operations between a source and a target chart."""

    ops: Tuple[EditOp, ...]
    source: ChartSpec
    target: ChartSpec

    def __len__(self):
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)

    def __contains__(self, op):
        return op in self.ops

    @property
    def ids(self):
        return tuple(op.id for op in self.ops)

    def to_document(self):
        return [op.to_document() for op in self.ops]


def implied_scale(enc, channel, new_type):
    """
    Return the scale an encoding carries into a new field and type.

    A default scale is re-inferred for the new type; anything explicit is kept.
    """
    if is_default_scale(enc.scale, channel):
        return ScaleSpec(default_scale_type(channel, new_type))
    return enc.scale


def _diff_channel(channel, a, b, ops, aggregates, bins):
    if a.ref != b.ref:
        ops.append(EditOp(EditKind.MODIFY_ENCODING, channel, before=a.ref, after=b.ref))
        carried = implied_scale(a, channel, b.type)
    else:
        carried = a.scale
    if carried != b.scale:
        ops.append(EditOp(EditKind.MODIFY_SCALE, channel, before=a.scale, after=b.scale))

    if a.aggregate != b.aggregate:
        if a.aggregate and b.aggregate:
            raise UnsupportedFeature(f"Changing the aggregate op from '{a.aggregate}' to '{b.aggregate}' "
                                     f"is not an edit operation", path=f"encoding.{channel}.aggregate")
        if b.aggregate:
            aggregates["add"].append((channel, b.aggregate))
        else:
            aggregates["remove"].append((channel, a.aggregate))

    if a.bin != b.bin:
        if b.bin:
            bins["add"].append((channel, b.maxbins))
        else:
            bins["remove"].append((channel, a.maxbins))
    elif a.bin and a.maxbins != b.maxbins:
        raise UnsupportedFeature("Changing maxbins is not an edit operation", path=f"encoding.{channel}.bin")


def diff(start, end):
    """
    Itemize the difference between two charts into edit operations.

    Args:
        start (ChartSpec): Source chart
        end (ChartSpec): Target chart

    Returns:
        EditOpSet: One op per changed property path, sorted by id

    Raises:
        UnsupportedFeature: For layered charts or changes outside the taxonomy
    """
    if start.layers or end.layers:
        raise UnsupportedFeature("Charts with annotation layers cannot be diffed", path="layers")
    a, b = canonicalize(start), canonicalize(end)
    if a.data != b.data:
        raise UnsupportedFeature("Both charts must use the same dataset", path="data")

    ops = []
    if a.mark != b.mark:
        ops.append(EditOp(EditKind.MARK, before=a.mark, after=b.mark))

    aggregates = {"add": [], "remove": []}
    bins = {"add": [], "remove": []}
    for channel in CHANNELS:
        ea, eb = a.encodings.get(channel), b.encodings.get(channel)
        if ea is None and eb is None:
            continue
        if eb is None:
            ops.append(EditOp(EditKind.REMOVE_ENCODING, channel, before=ea))
        elif ea is None:
            ops.append(EditOp(EditKind.ADD_ENCODING, channel, after=eb))
        else:
            _diff_channel(channel, ea, eb, ops, aggregates, bins)

    if aggregates["add"]:
        ops.append(EditOp(EditKind.ADD_AGGREGATE, after=tuple(aggregates["add"])))
    if aggregates["remove"]:
        ops.append(EditOp(EditKind.REMOVE_AGGREGATE, before=tuple(aggregates["remove"])))
    if bins["add"]:
        ops.append(EditOp(EditKind.ADD_BIN, after=tuple(bins["add"])))
    if bins["remove"]:
        ops.append(EditOp(EditKind.REMOVE_BIN, before=tuple(bins["remove"])))

    before = {p.identity: p for p in a.filters}
    after = {p.identity: p for p in b.filters}
    for identity in sorted(set(before) | set(after)):
        pa, pb = before.get(identity), after.get(identity)
        if pb is None:
            ops.append(EditOp(EditKind.REMOVE_FILTER, before=pa))
        elif pa is None:
            ops.append(EditOp(EditKind.ADD_FILTER, after=pb))
        elif pa != pb:
            ops.append(EditOp(EditKind.MODIFY_FILTER, before=pa, after=pb))

    ops.sort(key=op_sort_key)
    logger.debug("diff: %s", [op.id for op in ops])
    return EditOpSet(tuple(ops), a, b)


# Application

def _inapplicable(op, message):
    raise InapplicableOp(f"{op.id}: {message}", path=op.path)


def check_applicable(spec, op):
    """
    Check that an op's from-state matches a chart.

    Raises:
        InapplicableOp: If it does not
    """
    kind = op.kind
    enc = spec.encodings.get(op.channel) if op.channel else None
    if kind == EditKind.MARK:
        if spec.mark != op.before:
            _inapplicable(op, f"mark is '{spec.mark}'")
    elif kind == EditKind.ADD_ENCODING:
        if enc is not None:
            _inapplicable(op, "channel is already encoded")
    elif kind == EditKind.REMOVE_ENCODING:
        if enc is None or enc.ref != op.before.ref:
            _inapplicable(op, "channel does not encode the expected field")
    elif kind == EditKind.MODIFY_ENCODING:
        if enc is None or enc.ref != op.before:
            _inapplicable(op, "channel does not encode the expected field")
    elif kind == EditKind.MODIFY_SCALE:
        if enc is None:
            _inapplicable(op, "channel is not encoded")
        both_default = is_default_scale(op.before, op.channel) and is_default_scale(enc.scale, op.channel)
        if enc.scale != op.before and not both_default:
            _inapplicable(op, "scale does not match")
    elif kind in FILTER_KINDS:
        current = {p.identity: p for p in spec.filters}
        if kind == EditKind.ADD_FILTER:
            if op.after.identity in current:
                _inapplicable(op, "filter already present")
        elif current.get(op.before.identity) != op.before:
            _inapplicable(op, "filter does not match")
    else:
        for channel, value in op.after or op.before:
            target = spec.encodings.get(channel)
            if target is None:
                _inapplicable(op, f"channel '{channel}' is not encoded")
            if kind == EditKind.ADD_AGGREGATE and target.aggregate:
                _inapplicable(op, f"channel '{channel}' is already aggregated")
            if kind == EditKind.REMOVE_AGGREGATE and target.aggregate != value:
                _inapplicable(op, f"channel '{channel}' is not aggregated by '{value}'")
            if kind == EditKind.ADD_BIN and target.bin:
                _inapplicable(op, f"channel '{channel}' is already binned")
            if kind == EditKind.REMOVE_BIN and not target.bin:
                _inapplicable(op, f"channel '{channel}' is not binned")


def _apply_op(spec, op):
    kind = op.kind
    encodings = dict(spec.encodings)
    if kind == EditKind.MARK:
        return spec.replace(mark=op.after)
    if kind == EditKind.ADD_ENCODING:
        encodings[op.channel] = op.after
    elif kind == EditKind.REMOVE_ENCODING:
        del encodings[op.channel]
    elif kind == EditKind.MODIFY_ENCODING:
        enc = encodings[op.channel]
        encodings[op.channel] = enc.replace(field=op.after.field, type=op.after.type,
                                            scale=implied_scale(enc, op.channel, op.after.type))
    elif kind == EditKind.MODIFY_SCALE:
        encodings[op.channel] = encodings[op.channel].replace(scale=op.after)
    elif kind in FILTER_KINDS:
        removed = op.before.identity if op.before is not None else None
        transforms = [t for t in spec.transforms if t.predicate is None or t.predicate.identity != removed]
        if op.after is not None:
            transforms.append(Transform.filter(op.after))
        return spec.replace(transforms=tuple(transforms))
    else:
        for channel, value in op.after or op.before:
            enc = encodings[channel]
            if kind == EditKind.ADD_AGGREGATE:
                enc = enc.replace(aggregate=value)
            elif kind == EditKind.REMOVE_AGGREGATE:
                enc = enc.replace(aggregate=None)
            elif kind == EditKind.ADD_BIN:
                enc = enc.replace(bin=True, maxbins=value)
            else:
                enc = enc.replace(bin=False, maxbins=None)
            encodings[channel] = enc
    return spec.replace(encodings=encodings)


def apply_block(spec, block):
    """
    Apply a block of edit operations simultaneously.

    Every op is checked against ``spec`` before any is applied, so the order
    of ops within a block does not matter.

    Args:
        spec (ChartSpec): The chart to edit
        block (iterable): EditOps touching disjoint property paths

    Returns:
        ChartSpec: The edited, canonical chart

    Raises:
        InapplicableOp: If an op's from-state does not match ``spec``
        InvalidResult: If the edited chart violates a chart invariant
    """
    block = list(block)
    if not block:
        return spec
    for op in block:
        check_applicable(spec, op)
    result = spec
    for op in sorted(block, key=lambda o: (APPLY_ORDER.index(o.kind), o.id)):
        result = _apply_op(result, op)
    result = canonicalize(result)
    try:
        validate_chart(result)
    except ValidationError as e:
        raise InvalidResult(f"Block {sorted(o.id for o in block)} gives an invalid chart: {e.message}",
                            path=e.path)
    return result


def apply_ops(spec, partition):
    """Apply the blocks of an ordered partition cumulatively, returning every chart."""
    charts = [spec]
    for block in partition:
        charts.append(apply_block(charts[-1], block))
    return charts
