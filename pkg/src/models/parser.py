"""
Parsing, canonicalization and serialization of chart specification documents.

Documents follow a Vega-Lite compatible subset described by
``schema/chart_spec.schema.json``. Constructs Vega-Lite has but this subset
does not are reported as UnsupportedFeature; anything else the schema does not
allow is a ValidationError.
"""
from __future__ import annotations

import copy
import json
import logging
import os

from jsonschema import Draft7Validator
from jsonschema.exceptions import best_match

from .chart import (
    CHANNELS, LAYER_CHANNELS, MARKS, AnnotationLayer, ChartSpec, Encoding,
    FieldPredicate, ScaleSpec, Transform, default_scale_type, freeze_encodings,
)
from .config import DEFAULT_MAXBINS
from .dataset import TEMPORAL, Dataset, Domain, format_timestamp, is_number, parse_timestamp
from .engine import normalize_operand
from .errors import ChartSyntaxError, UnsupportedFeature, ValidationError
from .validation import validate_chart

logger = logging.getLogger(__name__)

SCHEMA_PATH = os.path.join(os.path.dirname(__file__), "schema", "chart_spec.schema.json")

PREDICATE_KEYS = {
    "equal": "eq",
    "notEqual": "neq",
    "lt": "lt",
    "lte": "lte",
    "gt": "gt",
    "gte": "gte",
    "range": "range",
    "oneOf": "oneOf",
}
PREDICATE_NAMES = {op: key for key, op in PREDICATE_KEYS.items()}

# Vega-Lite constructs that exist but are outside the supported subset
COMPOSITION_KEYS = ("concat", "hconcat", "vconcat", "facet", "repeat", "layer", "spec", "resolve")
UNSUPPORTED_TOP_KEYS = COMPOSITION_KEYS + (
    "params", "selection", "projection", "datasets", "width", "height", "title",
    "config", "autosize", "background", "padding", "usermeta", "view", "align",
    "bounds", "center", "spacing", "name",
)
VEGA_LITE_MARKS = (
    "arc", "text", "geoshape", "boxplot", "errorbar", "errorband", "trail",
    "square", "circle", "image", "rule",
)
VEGA_LITE_CHANNELS = (
    "x2", "y2", "xOffset", "yOffset", "theta", "theta2", "radius", "radius2",
    "shape", "text", "tooltip", "href", "detail", "key", "order", "facet",
    "latitude", "longitude", "latitude2", "longitude2", "strokeDash",
    "strokeWidth", "fill", "stroke", "angle", "description", "url",
    "fillOpacity", "strokeOpacity", "xError", "xError2", "yError", "yError2",
)
UNSUPPORTED_ENCODING_KEYS = (
    "sort", "title", "axis", "legend", "timeUnit", "stack", "value", "datum",
    "condition", "impute", "band", "bandPosition", "format", "formatType",
    "header", "spacing",
)
UNSUPPORTED_SCALE_KEYS = (
    "range", "zero", "nice", "padding", "paddingInner", "paddingOuter",
    "reverse", "scheme", "clamp", "base", "exponent", "constant", "interpolate",
    "round", "align", "domainMid", "domainMin", "domainMax", "rangeMin", "rangeMax",
)
VEGA_LITE_SCALES = (
    "pow", "sqrt", "symlog", "utc", "point", "quantile", "quantize",
    "threshold", "bin-ordinal", "identity", "sequential",
)
UNSUPPORTED_BIN_KEYS = ("step", "steps", "extent", "nice", "base", "anchor", "minstep", "divide", "binned")
VEGA_LITE_TRANSFORMS = (
    "calculate", "fold", "window", "joinaggregate", "lookup", "impute",
    "timeUnit", "pivot", "regression", "loess", "density", "stack", "flatten",
    "sample", "quantile", "extent",
)
VEGA_LITE_AGGREGATES = (
    "average", "distinct", "valid", "missing", "variance", "variancep",
    "stdev", "stdevp", "stderr", "q1", "q3", "ci0", "ci1", "argmin", "argmax",
    "values", "product", "exponential", "exponentialb",
)

_validator = None


def chart_schema():
    """Return the chart specification JSON schema."""
    with open(SCHEMA_PATH) as f:
        return json.load(f)


def _schema_validator():
    global _validator
    if _validator is None:
        _validator = Draft7Validator(chart_schema())
    return _validator


def format_path(parts, prefix="$"):
    """Render a jsonschema path deque as ``encoding.x.scale[0]``."""
    text = "" if prefix == "$" else prefix
    for part in parts:
        if isinstance(part, int):
            text += f"[{part}]"
        else:
            text = f"{text}.{part}" if text else str(part)
    return text or "$"


# Unsupported construct detection

def _unsupported(message, path):
    raise UnsupportedFeature(message, path=path)


def _check_encoding_doc(channel, doc, path, allowed_channels):
    if channel in VEGA_LITE_CHANNELS or (channel in CHANNELS and channel not in allowed_channels):
        _unsupported(f"Channel '{channel}' is not supported", path)
    if not isinstance(doc, dict):
        return
    for key in doc:
        if key in UNSUPPORTED_ENCODING_KEYS:
            _unsupported(f"Encoding property '{key}' is not supported", f"{path}.{key}")
    if isinstance(doc.get("aggregate"), str) and doc["aggregate"] in VEGA_LITE_AGGREGATES:
        _unsupported(f"Aggregate '{doc['aggregate']}' is not supported", f"{path}.aggregate")
    if isinstance(doc.get("aggregate"), dict):
        _unsupported("Argmin/argmax aggregates are not supported", f"{path}.aggregate")
    bin_doc = doc.get("bin")
    if isinstance(bin_doc, dict):
        for key in bin_doc:
            if key in UNSUPPORTED_BIN_KEYS:
                _unsupported(f"Bin property '{key}' is not supported", f"{path}.bin.{key}")
    if bin_doc == "binned":
        _unsupported("Pre-binned data is not supported", f"{path}.bin")
    scale = doc.get("scale")
    if isinstance(scale, dict):
        for key in scale:
            if key in UNSUPPORTED_SCALE_KEYS:
                _unsupported(f"Scale property '{key}' is not supported", f"{path}.scale.{key}")
        if scale.get("type") in VEGA_LITE_SCALES:
            _unsupported(f"Scale type '{scale['type']}' is not supported", f"{path}.scale.type")
    if scale is None and "scale" in doc:
        _unsupported("Disabling a scale is not supported", f"{path}.scale")


def _check_mark_doc(mark, path, allowed):
    name = mark.get("type") if isinstance(mark, dict) else mark
    if isinstance(name, str) and name not in allowed and (name in VEGA_LITE_MARKS or name in MARKS):
        _unsupported(f"Mark '{name}' is not supported; only single-view Cartesian marks are", path)
    if isinstance(mark, dict):
        for key in mark:
            if key != "type":
                _unsupported(f"Mark property '{key}' is not supported", f"{path}.{key}")


def _check_transform_doc(doc, path):
    if not isinstance(doc, dict):
        return
    for key in doc:
        if key in VEGA_LITE_TRANSFORMS:
            _unsupported(f"Transform '{key}' is not supported", path)
    if "filter" in doc:
        predicate = doc["filter"]
        if isinstance(predicate, str):
            _unsupported("Expression filters are not supported", f"{path}.filter")
        if isinstance(predicate, dict):
            for key in ("and", "or", "not", "param", "selection", "timeUnit", "valid"):
                if key in predicate:
                    _unsupported(f"Filter '{key}' is not supported", f"{path}.filter.{key}")
    if "aggregate" in doc and isinstance(doc["aggregate"], list):
        for index, entry in enumerate(doc["aggregate"]):
            if isinstance(entry, dict) and entry.get("op") in VEGA_LITE_AGGREGATES:
                _unsupported(f"Aggregate '{entry['op']}' is not supported", f"{path}.aggregate[{index}].op")
    if "bin" in doc and isinstance(doc["bin"], dict):
        for key in doc["bin"]:
            if key in UNSUPPORTED_BIN_KEYS:
                _unsupported(f"Bin property '{key}' is not supported", f"{path}.bin.{key}")


def check_supported(document):
    """
    Reject Vega-Lite constructs outside the supported subset.

    Raises:
        UnsupportedFeature: With the path of the first unsupported construct
    """
    if not isinstance(document, dict):
        return
    for key in document:
        if key in UNSUPPORTED_TOP_KEYS:
            kind = "Multi-view composition" if key in COMPOSITION_KEYS else f"Property '{key}'"
            _unsupported(f"{kind} is not supported", key)
    if "mark" in document:
        _check_mark_doc(document["mark"], "mark", MARKS)
    data = document.get("data")
    if isinstance(data, dict):
        for key in ("url", "sequence", "sphere", "graticule", "format"):
            if key in data:
                _unsupported(f"Data '{key}' is not supported; use inline values", f"data.{key}")
    encoding = document.get("encoding")
    if isinstance(encoding, dict):
        for channel, doc in encoding.items():
            _check_encoding_doc(channel, doc, f"encoding.{channel}", CHANNELS)
    transforms = document.get("transform")
    if isinstance(transforms, list):
        for index, doc in enumerate(transforms):
            _check_transform_doc(doc, f"transform[{index}]")
    layers = document.get("layers")
    if isinstance(layers, list):
        for index, layer in enumerate(layers):
            if not isinstance(layer, dict):
                continue
            if "mark" in layer:
                _check_mark_doc(layer["mark"], f"layers[{index}].mark", MARKS + ("rule",))
            for channel, doc in (layer.get("encoding") or {}).items():
                _check_encoding_doc(channel, doc, f"layers[{index}].encoding.{channel}", LAYER_CHANNELS)


# Lowering of top-level aggregate and bin transforms onto encodings

def _lower_aggregate(encoding, doc, path):
    for entry in doc["aggregate"]:
        op = entry["op"]
        source = entry.get("field")
        default_name = "count" if op == "count" and source is None else f"{op}_{source}"
        output = entry.get("as", default_name)
        matched = False
        for enc in encoding.values():
            if enc.get("field") == output and not enc.get("aggregate"):
                enc["aggregate"] = op
                if source is None:
                    enc.pop("field", None)
                else:
                    enc["field"] = source
                matched = True
        if not matched:
            _unsupported(f"Aggregate output '{output}' is not encoded by any channel", path)
    grouped = {enc.get("field") for enc in encoding.values() if not enc.get("aggregate")}
    if grouped != set(doc.get("groupby", [])):
        _unsupported("Aggregate groupby must match the encoded fields", f"{path}.groupby")


def _lower_bin(encoding, doc, path):
    output = doc.get("as", doc["field"])
    bin_doc = doc["bin"]
    if bin_doc is False:
        return
    maxbins = bin_doc.get("maxbins", DEFAULT_MAXBINS) if isinstance(bin_doc, dict) else DEFAULT_MAXBINS
    matched = False
    for enc in encoding.values():
        if enc.get("field") == output and not enc.get("aggregate") and not enc.get("bin"):
            enc["field"] = doc["field"]
            enc["bin"] = {"maxbins": maxbins}
            matched = True
    if not matched:
        _unsupported("Bin output is not encoded by any channel", path)


def lower_transforms(document):
    """
    Move top-level aggregate and bin transforms onto the encodings that read them.

    Returns:
        dict: A copy of the document whose transforms are filters only
    """
    document = copy.deepcopy(document)
    transforms = document.get("transform", [])
    encoding = document.get("encoding", {})
    filters = []
    aggregates = []
    bins = []
    for index, doc in enumerate(transforms):
        path = f"transform[{index}]"
        if "filter" in doc:
            if aggregates or bins:
                _unsupported("Filters after an aggregate or bin transform are not supported", path)
            filters.append(doc)
        elif "aggregate" in doc:
            aggregates.append((path, doc))
        else:
            bins.append((path, doc))
    if len(aggregates) > 1:
        _unsupported("Only one aggregate transform is supported", aggregates[1][0])
    for path, doc in aggregates:
        _lower_aggregate(encoding, doc, path)
    for path, doc in bins:
        _lower_bin(encoding, doc, path)
    if aggregates or bins:
        logger.debug("Lowered %d aggregate and %d bin transforms", len(aggregates), len(bins))
    document["transform"] = filters
    return document


# Building

def _build_domain(values, enc_type, continuous, path):
    if enc_type == TEMPORAL:
        values = [parse_timestamp(v) if isinstance(v, str) else v for v in values]
    try:
        if continuous:
            if len(values) != 2 or not all(is_number(v) for v in values):
                raise ValidationError("A continuous domain needs [min, max] numbers", path=path)
            return Domain.continuous(values[0], values[1])
        return Domain.discrete(values)
    except ValidationError as e:
        raise ValidationError(e.message, path=path)


def _build_encoding(channel, doc, path):
    bin_doc = doc.get("bin", False)
    binned = bin_doc is True or isinstance(bin_doc, dict)
    maxbins = None
    if binned:
        maxbins = bin_doc.get("maxbins", DEFAULT_MAXBINS) if isinstance(bin_doc, dict) else DEFAULT_MAXBINS
    scale_doc = doc.get("scale", {})
    enc_type = doc["type"]
    domain = None
    if "domain" in scale_doc:
        continuous = enc_type in ("quantitative", "temporal")
        domain = _build_domain(scale_doc["domain"], enc_type, continuous, f"{path}.scale.domain")
    return Encoding(
        channel=channel,
        field=doc.get("field"),
        type=enc_type,
        aggregate=doc.get("aggregate"),
        bin=binned,
        maxbins=maxbins,
        scale=ScaleSpec(scale_doc.get("type"), domain),
    )


def _build_predicate(doc, dataset):
    key = next(k for k in doc if k != "field")
    operand = doc[key]
    if isinstance(operand, list):
        operand = tuple(operand)
    field_type = dataset.schema.get(doc["field"])
    if field_type == TEMPORAL:
        operand = normalize_operand(operand, field_type)
    return FieldPredicate(doc["field"], PREDICATE_KEYS[key], operand)


def build_chart_spec(document):
    """
    Build a ChartSpec from a schema-valid, lowered document.

    Returns:
        ChartSpec: The chart, not yet validated
    """
    data = document["data"]
    dataset = Dataset.from_values(data["values"], name=data.get("name", "source"))
    mark = document["mark"]
    if isinstance(mark, dict):
        mark = mark["type"]
    encodings = {
        channel: _build_encoding(channel, doc, f"encoding.{channel}")
        for channel, doc in document["encoding"].items()
    }
    transforms = tuple(Transform.filter(_build_predicate(t["filter"], dataset))
                       for t in document.get("transform", []))
    layers = []
    for index, layer in enumerate(document.get("layers", [])):
        layer_encodings = {
            channel: _build_encoding(channel, doc, f"layers[{index}].encoding.{channel}")
            for channel, doc in layer["encoding"].items()
        }
        layers.append(AnnotationLayer(layer["name"], layer["mark"], freeze_encodings(layer_encodings)))
    return ChartSpec(
        mark=mark,
        encodings=freeze_encodings(encodings),
        transforms=transforms,
        data=dataset,
        layers=tuple(layers),
    )


def load_chart_spec(document, prefix="$"):
    """
    Validate a decoded chart document and build its canonical ChartSpec.

    Args:
        document (dict): Decoded JSON document
        prefix (str): Path of the document inside an enclosing document

    Returns:
        ChartSpec: The canonical, validated chart

    Raises:
        UnsupportedFeature: For constructs outside the supported subset
        ValidationError: For schema or invariant violations
    """
    try:
        check_supported(document)
        error = best_match(_schema_validator().iter_errors(document))
        if error is not None:
            raise ValidationError(error.message, path=format_path(error.absolute_path))
        spec = canonicalize(build_chart_spec(lower_transforms(document)))
        validate_chart(spec)
    except (UnsupportedFeature, ValidationError) as e:
        if prefix == "$":
            raise
        path = prefix if e.path == "$" else f"{prefix}.{e.path}"
        raise type(e)(e.message, path=path)
    return spec


def parse_chart_spec(text):
    """
    Parse a chart specification from JSON text.

    Args:
        text (str): The document

    Returns:
        ChartSpec: The canonical, validated chart
    """
    try:
        document = json.loads(text)
    except (TypeError, ValueError) as e:
        raise ChartSyntaxError(f"Malformed JSON: {e}")
    return load_chart_spec(document)


def read_chart_spec(filename):
    """Parse the chart specification stored in ``filename``."""
    with open(filename) as f:
        return parse_chart_spec(f.read())


# Canonical form

def _canonical_operand(predicate):
    operand = predicate.operand
    if predicate.op == "oneOf":
        return tuple(sorted(operand, key=lambda v: (type(v).__name__, v)))
    if isinstance(operand, list):
        return tuple(operand)
    return operand


def canonical_encoding(enc):
    """Materialize an encoding's defaults: scale type and maxbins."""
    scale_type = enc.scale.type or default_scale_type(enc.channel, enc.type)
    maxbins = (enc.maxbins or DEFAULT_MAXBINS) if enc.bin else None
    return enc.replace(maxbins=maxbins, scale=ScaleSpec(scale_type, enc.scale.domain))


def canonicalize(spec):
    """
    Return the deterministic normal form of a chart.

    Channels are put in fixed order, transforms sorted by kind and field and
    defaults materialized. The function is idempotent.
    """
    encodings = {c: canonical_encoding(e) for c, e in spec.encodings.items()}
    transforms = []
    for transform in spec.transforms:
        if transform.predicate is not None:
            predicate = FieldPredicate(transform.predicate.field, transform.predicate.op,
                                       _canonical_operand(transform.predicate))
            transform = Transform.filter(predicate)
        transforms.append(transform)
    transforms.sort(key=lambda t: t.sort_key())
    layers = tuple(
        layer.replace(encodings=freeze_encodings({c: canonical_encoding(e) for c, e in layer.encodings.items()}))
        for layer in spec.layers
    )
    return spec.replace(encodings=encodings, transforms=tuple(transforms), layers=layers)


def specs_equal(a, b):
    """Return True if two charts have structurally identical canonical forms."""
    return canonicalize(a) == canonicalize(b)


# Serialization

def _operand_document(operand, field_type):
    if field_type == TEMPORAL:
        if isinstance(operand, tuple):
            return [format_timestamp(v) if is_number(v) else v for v in operand]
        return format_timestamp(operand) if is_number(operand) else operand
    if isinstance(operand, tuple):
        return list(operand)
    return operand


def encoding_document(enc):
    """Serialize one encoding."""
    doc = {"type": enc.type}
    if enc.field is not None:
        doc["field"] = enc.field
    if enc.aggregate:
        doc["aggregate"] = enc.aggregate
    if enc.bin:
        doc["bin"] = {"maxbins": enc.maxbins or DEFAULT_MAXBINS}
    scale = enc.scale.to_document()
    if enc.type == TEMPORAL and "domain" in scale:
        scale["domain"] = [format_timestamp(v) for v in scale["domain"]]
    if scale:
        doc["scale"] = scale
    return doc


def predicate_document(predicate, field_type=None):
    return {
        "field": predicate.field,
        PREDICATE_NAMES[predicate.op]: _operand_document(predicate.operand, field_type),
    }


def serialize(spec):
    """
    Return the canonical JSON document of a chart.

    Temporal values are written as ISO-8601 UTC strings.
    """
    spec = canonicalize(spec)
    schema = spec.data.schema
    doc = {
        "mark": spec.mark,
        "encoding": {c: encoding_document(e) for c, e in spec.encodings.items()},
        "transform": [{"filter": predicate_document(p, schema.get(p.field))} for p in spec.filters],
        "data": {"name": spec.data.name, "values": spec.data.to_values()},
    }
    if spec.layers:
        doc["layers"] = [
            {
                "name": layer.name,
                "mark": layer.mark,
                "encoding": {c: encoding_document(e) for c, e in layer.encodings.items()},
            }
            for layer in spec.layers
        ]
    return doc


def spec_key(spec):
    """Compact canonical serialization used for deterministic ordering."""
    return json.dumps(serialize(spec), sort_keys=True, separators=(",", ":"))
