"""
Semantic validation of chart specifications.

The JSON schema checks document shape; the checks here cover the invariants
that need the dataset schema or several properties at once.
"""
from __future__ import annotations

import logging

from .chart import (
    AGGREGATING_MARKS, BASE_LAYER, COMPATIBLE_SCALES, LAYER_MARKS, MARKS, data_pipeline,
    layer_pipeline,
)
from .dataset import CONTINUOUS, DISCRETE, QUANTITATIVE, TEMPORAL
from .engine import check_predicate, compute_domain, domain_kind, evaluate
from .errors import EmptyDomain, TypeMismatch, UnknownField, ValidationError

logger = logging.getLogger(__name__)


def _check_encoding(enc, schema, path):
    if enc.aggregate and enc.bin:
        raise ValidationError("aggregate and bin are mutually exclusive on one channel", path=path)
    if enc.field is None:
        if enc.aggregate != "count":
            raise ValidationError("Encoding needs a field unless it is a count", path=path)
    elif enc.field not in schema:
        raise UnknownField(f"Unknown field '{enc.field}'", path=f"{path}.field")
    else:
        field_type = schema[enc.field]
        if enc.bin and field_type not in (QUANTITATIVE, TEMPORAL):
            raise TypeMismatch(f"Cannot bin {field_type} field '{enc.field}'", path=f"{path}.bin")
        if enc.aggregate == "sum" and field_type != QUANTITATIVE:
            raise TypeMismatch(f"Cannot sum {field_type} field '{enc.field}'", path=f"{path}.aggregate")
        if enc.aggregate in ("mean", "median", "min", "max") and field_type not in (QUANTITATIVE, TEMPORAL):
            raise TypeMismatch(f"Cannot take {enc.aggregate} of {field_type} field '{enc.field}'",
                               path=f"{path}.aggregate")
        if enc.is_continuous and field_type not in (QUANTITATIVE, TEMPORAL) and not enc.aggregate:
            raise TypeMismatch(f"Field '{enc.field}' is {field_type} and cannot be encoded as {enc.type}",
                               path=f"{path}.type")
    if enc.aggregate == "count" and enc.type != QUANTITATIVE:
        raise TypeMismatch("A count encoding must be quantitative", path=f"{path}.type")
    if enc.maxbins is not None and enc.maxbins < 1:
        raise ValidationError("maxbins must be positive", path=f"{path}.bin")

    scale = enc.scale
    if scale.type is not None and scale.type not in COMPATIBLE_SCALES[enc.type]:
        raise ValidationError(f"Scale type '{scale.type}' is not compatible with {enc.type} data",
                              path=f"{path}.scale.type")
    if scale.domain is not None:
        expected = CONTINUOUS if enc.is_continuous else DISCRETE
        if scale.domain.kind != expected:
            raise ValidationError(f"A {enc.type} scale needs a {expected} domain", path=f"{path}.scale.domain")
        if scale.domain.is_continuous and not scale.domain.low < scale.domain.high:
            raise ValidationError("A continuous scale domain needs min < max", path=f"{path}.scale.domain")
        if scale.type == "log" and scale.domain.low <= 0:
            raise ValidationError("A log scale domain must be strictly positive", path=f"{path}.scale.domain")


def _check_outputs(encodings, prefix):
    """Binned fields agree on maxbins and aggregate outputs do not collide."""
    maxbins = {}
    outputs = {}
    for channel, enc in encodings.items():
        path = f"{prefix}.{channel}"
        if enc.bin:
            if maxbins.setdefault(enc.field, enc.maxbins) != enc.maxbins:
                raise ValidationError(f"Field '{enc.field}' is binned twice with different maxbins", path=path)
            continue
        role = (enc.aggregate,)
        previous = outputs.setdefault(enc.output_field, role)
        if previous != role:
            raise ValidationError(f"Field '{enc.output_field}' is both grouped and aggregated, "
                                  f"or aggregated twice", path=path)


def _check_raw_mark(spec):
    x, y = spec.encodings.get("x"), spec.encodings.get("y")
    if spec.mark not in AGGREGATING_MARKS or x is None or y is None:
        return
    raw = [e for e in (x, y) if e.is_continuous and not e.aggregate and not e.bin]
    if len(raw) == 2:
        raise ValidationError(f"Mark '{spec.mark}' cannot draw raw data on two continuous axes",
                              path="mark")


def _check_log_domains(spec, evaluated):
    for channel, enc in spec.encodings.items():
        if enc.scale.type != "log" or enc.scale.domain is not None:
            continue
        try:
            domain = compute_domain(spec, channel, evaluated=evaluated)
        except EmptyDomain:
            continue
        if domain.low <= 0:
            raise ValidationError("A log scale needs strictly positive data", path=f"encoding.{channel}.scale.type")


def validate_chart(spec):
    """
    Check every chart invariant, raising on the first violation.

    Args:
        spec (ChartSpec): The chart to check

    Raises:
        ValidationError: With the path of the offending property
    """
    if spec.mark not in MARKS:
        raise ValidationError(f"Unknown mark '{spec.mark}'", path="mark")
    schema = spec.data.schema
    for channel, enc in spec.encodings.items():
        if enc.channel != channel:
            raise ValidationError(f"Encoding for '{enc.channel}' stored under '{channel}'",
                                  path=f"encoding.{channel}")
        _check_encoding(enc, schema, f"encoding.{channel}")
    _check_outputs(spec.encodings, "encoding")

    seen = set()
    for index, predicate in enumerate(spec.filters):
        path = f"transform[{index}].filter"
        if predicate.field not in schema:
            raise UnknownField(f"Unknown field '{predicate.field}'", path=f"{path}.field")
        if predicate.identity in seen:
            raise ValidationError(f"Duplicate '{predicate.op}' filter on '{predicate.field}'", path=path)
        seen.add(predicate.identity)
        check_predicate(predicate, schema[predicate.field], path)

    _check_raw_mark(spec)

    names = set()
    for index, layer in enumerate(spec.layers):
        path = f"layers[{index}]"
        if layer.name in names:
            raise ValidationError(f"Duplicate layer name '{layer.name}'", path=f"{path}.name")
        if layer.name == BASE_LAYER:
            raise ValidationError(f"Layer name '{BASE_LAYER}' is reserved for the base marks",
                                  path=f"{path}.name")
        names.add(layer.name)
        if layer.mark not in LAYER_MARKS:
            raise ValidationError(f"Unknown layer mark '{layer.mark}'", path=f"{path}.mark")
        for channel, enc in layer.encodings.items():
            if channel not in spec.encodings:
                raise ValidationError(f"Layer channel '{channel}' is not encoded by the base chart",
                                      path=f"{path}.encoding.{channel}")
            _check_encoding(enc, schema, f"{path}.encoding.{channel}")
            if domain_kind(enc) != domain_kind(spec.encodings[channel]):
                raise ValidationError(f"Layer channel '{channel}' must share the base chart's scale kind",
                                      path=f"{path}.encoding.{channel}.type")
        _check_outputs(layer.encodings, f"{path}.encoding")
        evaluate(spec.data, layer_pipeline(spec, layer))

    evaluated = evaluate(spec.data, data_pipeline(spec))
    _check_log_domains(spec, evaluated)
    logger.debug("Chart valid: %s with %d encodings", spec.mark, len(spec.encodings))
    return spec
