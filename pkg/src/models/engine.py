"""
Data engine: evaluates transform pipelines over inline datasets and derives
per-channel scale domains.
"""
from __future__ import annotations

import logging
import math

import numpy as np
import pandas as pd

from .chart import (
    AGGREGATE, BIN, COUNT_FIELD, FILTER, bin_end_field, bin_start_field,
    data_pipeline, layer_pipeline,
)
from .dataset import (
    CONTINUOUS, DISCRETE, QUANTITATIVE, TEMPORAL, Dataset, Domain, is_number,
    parse_timestamp,
)
from .errors import EmptyDomain, KindMismatch, TypeMismatch, UnknownField, ValidationError

logger = logging.getLogger(__name__)

NICE_MULTIPLIERS = (1, 2, 5)
NUMERIC_TYPES = (QUANTITATIVE, TEMPORAL)
ORDERED_OPS = ("lt", "lte", "gt", "gte", "range")
_EPSILON = 1e-9


def _plain(value):
    """Convert pandas/numpy scalars to plain Python values, NaN to None."""
    if value is None:
        return None
    if hasattr(value, "item"):
        value = value.item()
    if isinstance(value, float) and math.isnan(value):
        return None
    return value


def _require_field(dataset, name, path):
    if name not in dataset.schema:
        raise UnknownField(f"Unknown field '{name}' in dataset '{dataset.name}'", path=path)
    return dataset.schema[name]


def normalize_operand(value, field_type):
    """Convert a temporal operand given as an ISO string to epoch milliseconds."""
    if field_type == TEMPORAL and isinstance(value, str):
        millis = parse_timestamp(value)
        if millis is not None:
            return millis
    if isinstance(value, (list, tuple)):
        return tuple(normalize_operand(v, field_type) for v in value)
    return value


def check_predicate(predicate, field_type, path="transform"):
    """
    Check a predicate's operand against the type of the field it filters.

    Raises:
        TypeMismatch: If the operand cannot be compared with the field
    """
    operand = normalize_operand(predicate.operand, field_type)
    numeric = field_type in NUMERIC_TYPES

    def scalar_ok(value):
        if numeric:
            return is_number(value)
        return isinstance(value, (str, bool)) or is_number(value)

    if predicate.op in ORDERED_OPS and not numeric:
        raise TypeMismatch(
            f"Predicate '{predicate.op}' needs a quantitative or temporal field, "
            f"'{predicate.field}' is {field_type}", path=path)
    if predicate.op == "range":
        if not (isinstance(operand, tuple) and len(operand) == 2 and all(is_number(v) for v in operand)):
            raise TypeMismatch(f"Range on '{predicate.field}' needs two numbers", path=path)
        if operand[0] > operand[1]:
            raise TypeMismatch(f"Range on '{predicate.field}' has min > max", path=path)
    elif predicate.op == "oneOf":
        if not isinstance(operand, tuple) or not operand or not all(scalar_ok(v) for v in operand):
            raise TypeMismatch(f"oneOf on '{predicate.field}' needs a nonempty list of {field_type} values",
                               path=path)
    elif not scalar_ok(operand):
        raise TypeMismatch(f"Operand {predicate.operand!r} does not match {field_type} field "
                           f"'{predicate.field}'", path=path)
    return operand


def _frame(dataset):
    return pd.DataFrame.from_records([dict(r) for r in dataset.rows], columns=list(dataset.fields))


def _apply_filter(dataset, predicate, path):
    field_type = _require_field(dataset, predicate.field, path)
    operand = check_predicate(predicate, field_type, path)
    if not dataset.rows:
        return dataset
    series = _frame(dataset)[predicate.field]
    present = series.notna()
    if predicate.op == "eq":
        mask = series == operand
    elif predicate.op == "neq":
        mask = (series != operand) & present
    elif predicate.op == "lt":
        mask = series < operand
    elif predicate.op == "lte":
        mask = series <= operand
    elif predicate.op == "gt":
        mask = series > operand
    elif predicate.op == "gte":
        mask = series >= operand
    elif predicate.op == "range":
        mask = series.between(operand[0], operand[1])
    else:
        mask = series.isin(list(operand))
    keep = np.flatnonzero((mask & present).to_numpy())
    return Dataset(dataset.name, dataset.schema, tuple(dataset.rows[i] for i in keep))


def _bin_count(low, high, step):
    first = math.floor(low / step + _EPSILON) * step
    return max(1, math.ceil((high - first) / step - _EPSILON))


def nice_bin_step(low, high, maxbins):
    """
    Return the smallest step from {1, 2, 5} x 10^k giving at most ``maxbins`` bins.

    Args:
        low (float): Extent minimum
        high (float): Extent maximum
        maxbins (int): Bin budget

    Returns:
        float: The bin step
    """
    span = high - low
    if span <= 0:
        span = abs(high) or 1.0
    exponent = math.floor(math.log10(span / maxbins)) - 1
    while True:
        for multiplier in NICE_MULTIPLIERS:
            step = multiplier * 10.0 ** exponent
            if _bin_count(low, high, step) <= maxbins:
                return step
        exponent += 1


def bin_edges(low, high, maxbins):
    """Return (first bin start, step, bin count) for an extent."""
    step = nice_bin_step(low, high, maxbins)
    first = math.floor(low / step + _EPSILON) * step
    return first, step, _bin_count(low, high, step)


def _apply_bin(dataset, transform, path):
    field_type = _require_field(dataset, transform.field, path)
    if field_type not in NUMERIC_TYPES:
        raise TypeMismatch(f"Cannot bin {field_type} field '{transform.field}'", path=path)
    start_name, end_name = bin_start_field(transform.field), bin_end_field(transform.field)
    schema = dict(dataset.schema)
    schema[start_name] = field_type
    schema[end_name] = field_type
    values = [v for v in dataset.column(transform.field) if v is not None]
    rows = []
    if values:
        first, step, count = bin_edges(min(values), max(values), transform.maxbins)
        raw = np.array([np.nan if v is None else v for v in dataset.column(transform.field)], dtype=float)
        index = np.clip(np.floor((raw - first) / step + _EPSILON), 0, count - 1)
        for row, value, i in zip(dataset.rows, raw, index):
            record = dict(row)
            if np.isnan(value):
                record[start_name] = record[end_name] = None
            else:
                start = round(first + float(i) * step, 10)
                record[start_name] = start
                record[end_name] = round(start + step, 10)
            rows.append(record)
    else:
        for row in dataset.rows:
            record = dict(row)
            record[start_name] = record[end_name] = None
            rows.append(record)
    return Dataset.build(dataset.name, schema, rows)


def _output_type(dataset, op):
    if op.op == "count":
        return QUANTITATIVE
    return dataset.schema[op.field]


def _apply_aggregate(dataset, transform, path):
    for name in transform.groupby:
        _require_field(dataset, name, path)
    for op in transform.ops:
        if op.field is None:
            if op.op != "count":
                raise ValidationError(f"Aggregate '{op.op}' needs a field", path=path)
            continue
        field_type = _require_field(dataset, op.field, path)
        if op.op == "sum" and field_type != QUANTITATIVE:
            raise TypeMismatch(f"Cannot sum {field_type} field '{op.field}'", path=path)
        if op.op in ("mean", "median", "min", "max") and field_type not in NUMERIC_TYPES:
            raise TypeMismatch(f"Cannot take {op.op} of {field_type} field '{op.field}'", path=path)

    schema = {name: dataset.schema[name] for name in transform.groupby}
    for op in transform.ops:
        schema[op.as_] = _output_type(dataset, op)
    if not dataset.rows:
        return Dataset.build(dataset.name, schema, [])

    frame = _frame(dataset)
    if not transform.groupby:
        record = {}
        for op in transform.ops:
            if op.op == "count":
                record[op.as_] = len(frame)
            else:
                record[op.as_] = _plain(frame[op.field].agg(op.op))
        return Dataset.build(dataset.name, schema, [record])

    grouped = frame.groupby(list(transform.groupby), sort=False, dropna=False)
    named = {}
    for op in transform.ops:
        if op.op == "count":
            named[op.as_] = (transform.groupby[0], "size")
        else:
            named[op.as_] = (op.field, op.op)
    if named:
        result = grouped.agg(**named).reset_index()
    else:
        result = grouped.size().reset_index().drop(columns=[0])
    rows = [{k: _plain(v) for k, v in record.items()} for record in result.to_dict("records")]
    return Dataset.build(dataset.name, schema, rows)


def evaluate(dataset, transforms):
    """
    Evaluate an ordered transform list over a dataset.

    Args:
        dataset (Dataset): Input rows
        transforms (list): Transforms in evaluation order

    Returns:
        Dataset: The derived dataset
    """
    current = dataset
    for index, transform in enumerate(transforms):
        path = f"transform[{index}]"
        if transform.kind == FILTER:
            current = _apply_filter(current, transform.predicate, path)
        elif transform.kind == BIN:
            current = _apply_bin(current, transform, path)
        elif transform.kind == AGGREGATE:
            current = _apply_aggregate(current, transform, path)
        else:
            raise ValidationError(f"Unknown transform kind '{transform.kind}'", path=path)
    return current


def evaluate_spec(spec, dataset=None):
    """Evaluate the base mark pipeline of a chart."""
    return evaluate(spec.data if dataset is None else dataset, data_pipeline(spec))


def evaluate_layer(spec, layer, dataset=None):
    """Evaluate an annotation layer's pipeline over the chart's data."""
    return evaluate(spec.data if dataset is None else dataset, layer_pipeline(spec, layer))


def channel_values(enc, evaluated):
    """Return the non-null values a channel spans in evaluated data."""
    if enc.bin:
        names = (bin_start_field(enc.field), bin_end_field(enc.field))
    else:
        names = (enc.output_field,)
    values = []
    for row in evaluated.rows:
        for name in names:
            if name not in row:
                raise UnknownField(f"Unknown field '{name}'", path=f"encoding.{enc.channel}.field")
            if row[name] is not None:
                values.append(row[name])
    return values


def compute_domain(spec, channel, dataset=None, evaluated=None):
    """
    Compute the scale domain of an encoded channel.

    Args:
        spec (ChartSpec): The chart
        channel (str): An encoded channel
        dataset (Dataset, optional): Data to use instead of the chart's own
        evaluated (Dataset, optional): Already evaluated pipeline output

    Returns:
        Domain: Explicit domain if set, otherwise derived from evaluated data
    """
    enc = spec.encodings.get(channel)
    if enc is None:
        raise ValidationError(f"Channel '{channel}' is not encoded", path=f"encoding.{channel}")
    if enc.scale.domain is not None:
        return enc.scale.domain
    if evaluated is None:
        evaluated = evaluate_spec(spec, dataset)
    values = channel_values(enc, evaluated)
    if not values:
        raise EmptyDomain(f"Channel '{channel}' has no values", path=f"encoding.{channel}")
    if enc.is_continuous:
        low, high = min(values), max(values)
        if channel == spec.length_channel():
            low, high = min(low, 0), max(high, 0)
        return Domain.continuous(low, high)
    distinct = []
    seen = set()
    for value in values:
        if value not in seen:
            seen.add(value)
            distinct.append(value)
    return Domain.discrete(distinct)


def union_domains(a, b):
    """
    Union two domains of the same kind.

    Continuous domains take the hull; discrete domains keep ``a``'s order and
    append values only ``b`` has.
    """
    if a.kind != b.kind:
        raise KindMismatch(f"Cannot union {a.kind} and {b.kind} domains")
    if a.kind == CONTINUOUS:
        return Domain.continuous(min(a.low, b.low), max(a.high, b.high))
    extra = [v for v in b.values if v not in set(a.values)]
    return Domain.discrete(tuple(a.values) + tuple(extra))


def domain_kind(enc):
    return CONTINUOUS if enc.is_continuous else DISCRETE
