"""
Chart specification types.

A ChartSpec is a single-view chart in a Vega-Lite compatible subset: one mark,
per-channel encodings, filter transforms and an inline dataset. Aggregation and
binning live on the encodings; ``data_pipeline`` derives the full transform
list the data engine evaluates.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Mapping, Optional, Tuple

from .dataset import Dataset, Domain, NOMINAL, ORDINAL, QUANTITATIVE, TEMPORAL

MARKS = ("point", "bar", "line", "tick", "rect", "area")
LAYER_MARKS = MARKS + ("rule",)
BASE_LAYER = "marks"
CHANNELS = ("x", "y", "color", "size", "opacity", "column", "row")
POSITION_CHANNELS = ("x", "y", "column", "row")
LAYER_CHANNELS = ("x", "y", "color", "size", "opacity")
AGGREGATE_OPS = ("mean", "median", "sum", "count", "min", "max")
SCALE_TYPES = ("linear", "log", "ordinal", "band", "time")
PREDICATE_OPS = ("eq", "neq", "lt", "lte", "gt", "gte", "range", "oneOf")

# Marks that cannot draw raw per-point data on two continuous axes
AGGREGATING_MARKS = ("bar", "line", "area")
LENGTH_MARKS = ("bar", "area")

FILTER = "filter"
BIN = "bin"
AGGREGATE = "aggregate"
TRANSFORM_KINDS = (FILTER, BIN, AGGREGATE)

COMPATIBLE_SCALES = {
    QUANTITATIVE: ("linear", "log"),
    TEMPORAL: ("time",),
    NOMINAL: ("band", "ordinal"),
    ORDINAL: ("band", "ordinal"),
}

COUNT_FIELD = "count"


def default_scale_type(channel, data_type):
    """Return the scale type inferred for a channel and data type."""
    if data_type == QUANTITATIVE:
        return "linear"
    if data_type == TEMPORAL:
        return "time"
    return "band" if channel in POSITION_CHANNELS else "ordinal"


def bin_start_field(field_name):
    return f"bin_{field_name}"


def bin_end_field(field_name):
    return f"bin_{field_name}_end"


@dataclass(frozen=True)
class ScaleSpec:
    """Scale type and optional explicit domain; the range is always [0, 1]."""

    type: Optional[str] = None
    domain: Optional[Domain] = None

    def to_document(self):
        doc = {}
        if self.type is not None:
            doc["type"] = self.type
        if self.domain is not None:
            doc["domain"] = self.domain.to_document()
        return doc


def is_default_scale(scale, channel):
    """
    Return True if a scale is the inferred default for its own type family.

    The family is read off the scale type itself, so the answer does not depend
    on which field the channel currently encodes.
    """
    if scale.domain is not None:
        return False
    if scale.type in ("linear", "time"):
        return True
    if scale.type == "band":
        return channel in POSITION_CHANNELS
    if scale.type == "ordinal":
        return channel not in POSITION_CHANNELS
    return False


@dataclass(frozen=True)
class FieldRef:
    """The field and data type an encoding reads."""

    field: Optional[str]
    type: str


@dataclass(frozen=True)
class Encoding:
    """A channel encoding."""

    channel: str
    field: Optional[str]
    type: str
    aggregate: Optional[str] = None
    bin: bool = False
    maxbins: Optional[int] = None
    scale: ScaleSpec = field(default_factory=ScaleSpec)

    @property
    def ref(self):
        return FieldRef(self.field, self.type)

    @property
    def output_field(self):
        """Name of the evaluated column this encoding reads."""
        if self.aggregate == "count" and self.field is None:
            return COUNT_FIELD
        if self.bin:
            return bin_start_field(self.field)
        return self.field

    @property
    def is_continuous(self):
        return self.type in (QUANTITATIVE, TEMPORAL)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class FieldPredicate:
    """A filter predicate on one field."""

    field: str
    op: str
    operand: Any

    @property
    def identity(self):
        """Predicates with the same (field, op) describe the same filter."""
        return (self.field, self.op)

    def sort_key(self):
        return (self.field, self.op, repr(self.operand))


@dataclass(frozen=True)
class AggregateOp:
    """One reduction of an aggregate transform."""

    op: str
    field: Optional[str]
    as_: str


@dataclass(frozen=True)
class Transform:
    """A filter, bin or aggregate step of a data pipeline."""

    kind: str
    predicate: Optional[FieldPredicate] = None
    field: Optional[str] = None
    maxbins: Optional[int] = None
    groupby: Tuple[str, ...] = ()
    ops: Tuple[AggregateOp, ...] = ()

    @classmethod
    def filter(cls, predicate):
        return cls(FILTER, predicate=predicate, field=predicate.field)

    @classmethod
    def binning(cls, field_name, maxbins):
        return cls(BIN, field=field_name, maxbins=maxbins)

    @classmethod
    def aggregate(cls, groupby, ops):
        return cls(AGGREGATE, groupby=tuple(groupby), ops=tuple(ops))

    def sort_key(self):
        rank = TRANSFORM_KINDS.index(self.kind)
        if self.kind == FILTER:
            return (rank,) + self.predicate.sort_key()
        if self.kind == BIN:
            return (rank, self.field or "", "", repr(self.maxbins))
        return (rank, "", "", repr((self.groupby, self.ops)))


@dataclass(frozen=True)
class AnnotationLayer:
    """An extra mark drawn over the base chart, e.g. a median rule."""

    name: str
    mark: str
    encodings: Mapping[str, Encoding]

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


def freeze_encodings(encodings):
    """Return a read-only channel mapping in canonical channel order."""
    ordered = {c: encodings[c] for c in CHANNELS if c in encodings}
    return MappingProxyType(ordered)


@dataclass(frozen=True)
class ChartSpec:
    """A declarative single-view chart."""

    mark: str
    encodings: Mapping[str, Encoding]
    transforms: Tuple[Transform, ...]
    data: Dataset
    layers: Tuple[AnnotationLayer, ...] = ()

    def replace(self, **changes):
        if "encodings" in changes:
            changes["encodings"] = freeze_encodings(changes["encodings"])
        return dataclasses.replace(self, **changes)

    @property
    def filters(self):
        return tuple(t.predicate for t in self.transforms if t.kind == FILTER)

    @property
    def is_aggregated(self):
        return any(e.aggregate for e in self.encodings.values())

    @property
    def is_binned(self):
        return any(e.bin for e in self.encodings.values())

    def encoding(self, channel):
        return self.encodings.get(channel)

    def length_channel(self):
        """
        Return the channel bars and areas measure from zero, if any.

        Returns:
            str or None: 'x' or 'y'
        """
        if self.mark not in LENGTH_MARKS:
            return None
        x, y = self.encodings.get("x"), self.encodings.get("y")

        def measure(enc):
            return enc is not None and enc.type == QUANTITATIVE and not enc.bin

        if measure(y) and not measure(x):
            return "y"
        if measure(x) and not measure(y):
            return "x"
        if measure(x) and measure(y):
            return "y"
        return None


def encoding_pipeline(filters, encodings):
    """
    Derive the data pipeline for a set of encodings after some filters.

    Args:
        filters (tuple): FieldPredicates applied first
        encodings (Mapping): Channel encodings

    Returns:
        tuple: Transforms in evaluation order
    """
    steps = [Transform.filter(p) for p in filters]
    binned = {}
    for enc in encodings.values():
        if enc.bin and enc.field not in binned:
            binned[enc.field] = enc.maxbins
    for name in sorted(binned):
        steps.append(Transform.binning(name, binned[name]))
    if any(e.aggregate for e in encodings.values()):
        groupby = []
        ops = []
        for enc in encodings.values():
            if enc.aggregate:
                op = AggregateOp(enc.aggregate, enc.field, enc.output_field)
                if op not in ops:
                    ops.append(op)
            elif enc.bin:
                for name in (bin_start_field(enc.field), bin_end_field(enc.field)):
                    if name not in groupby:
                        groupby.append(name)
            elif enc.field not in groupby:
                groupby.append(enc.field)
        steps.append(Transform.aggregate(groupby, ops))
    return tuple(steps)


def data_pipeline(spec):
    """Return the full transform list the base mark of ``spec`` evaluates."""
    return encoding_pipeline(spec.filters, spec.encodings)


def layer_pipeline(spec, layer):
    """Return the transform list an annotation layer evaluates."""
    return encoding_pipeline(spec.filters, layer.encodings)
