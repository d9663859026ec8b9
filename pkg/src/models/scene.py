"""
Static scenes: the visual elements a keyframe draws.

Positions, sizes and opacities are normalized to [0, 1]; colors are RGB
triples of floats in [0, 1].
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Mapping, Tuple

from .engine import compute_domain, evaluate_layer, evaluate_spec
from .errors import EmptyDomain
from .chart import BASE_LAYER, bin_end_field, bin_start_field

GUIDES = {"axis.x": "x", "axis.y": "y", "legend.color": "color", "legend.size": "size"}

MARK_ATTRIBUTES = ("x", "y", "color", "size", "opacity", "mark")
GUIDE_ATTRIBUTES = ("field", "domain", "lo", "hi", "opacity")
CATEGORICAL_ATTRIBUTES = ("mark", "field", "domain")
COLOR_ATTRIBUTES = ("color",)

DEFAULT_COLOR = (76 / 255, 120 / 255, 168 / 255)
BLUES = ((222 / 255, 235 / 255, 247 / 255), (8 / 255, 48 / 255, 107 / 255))
TABLEAU10 = tuple(
    (r / 255, g / 255, b / 255) for r, g, b in (
        (76, 120, 168), (245, 133, 24), (228, 87, 86), (114, 183, 178), (84, 162, 75),
        (238, 202, 59), (178, 121, 162), (255, 157, 166), (157, 117, 93), (186, 176, 172),
    )
)
DEFAULT_SIZE = 0.5
DEFAULT_OPACITY = 1.0
MIN_OPACITY = 0.2


@dataclass(frozen=True)
class MarkElement:
    """One drawn mark: its layer, the evaluated row it draws and its attributes."""

    layer: str
    index: int
    row: Mapping[str, Any]
    attrs: Mapping[str, Any]


@dataclass(frozen=True)
class Scene:
    marks: Tuple[MarkElement, ...]
    guides: Mapping[str, Mapping[str, Any]]
    schemas: Mapping[str, Mapping[str, str]]


def lerp(a, b, t):
    return a + (b - a) * t


def lerp_color(a, b, t):
    return tuple(lerp(x, y, t) for x, y in zip(a, b))


def scale_position(value, domain, scale_type):
    """Map a data value into [0, 1] through a domain."""
    if domain.is_continuous:
        low, high = domain.low, domain.high
        if scale_type == "log":
            value, low, high = math.log10(value), math.log10(low), math.log10(high)
        if high == low:
            return 0.5
        return (value - low) / (high - low)
    if value not in domain.values:
        return 0.5
    return (domain.values.index(value) + 0.5) / len(domain.values)


def _channel_value(enc, row):
    if enc.bin:
        start, end = row.get(bin_start_field(enc.field)), row.get(bin_end_field(enc.field))
        if start is None or end is None:
            return None
        return (start + end) / 2
    return row.get(enc.output_field)


class ChannelScales:
    """The scale domains of a chart, looked up by channel."""

    def __init__(self, spec, evaluated):
        self.spec = spec
        self.domains = {}
        for channel in spec.encodings:
            try:
                self.domains[channel] = compute_domain(spec, channel, evaluated=evaluated)
            except EmptyDomain:
                self.domains[channel] = None

    def position(self, channel, value):
        domain = self.domains.get(channel)
        if domain is None:
            return 0.5
        return scale_position(value, domain, self.spec.encodings[channel].scale.type)

    def color(self, value):
        domain = self.domains.get("color")
        if domain is None:
            return DEFAULT_COLOR
        if domain.is_continuous:
            return lerp_color(BLUES[0], BLUES[1], self.position("color", value))
        index = domain.values.index(value) if value in domain.values else 0
        return TABLEAU10[index % len(TABLEAU10)]


def _mark_attributes(mark, encodings, row, scales):
    values = {}
    for channel, enc in encodings.items():
        value = _channel_value(enc, row)
        if value is None:
            return None
        values[channel] = value
    attrs = {}
    for axis, facet in (("x", "column"), ("y", "row")):
        position = scales.position(axis, values[axis]) if axis in values else 0.5
        if facet in values and scales.domains.get(facet) is not None:
            cells = scales.domains[facet].values
            cell = cells.index(values[facet]) if values[facet] in cells else 0
            position = (cell + position) / len(cells)
        attrs[axis] = position
    attrs["color"] = scales.color(values["color"]) if "color" in values else DEFAULT_COLOR
    attrs["size"] = scales.position("size", values["size"]) if "size" in values else DEFAULT_SIZE
    if "opacity" in values:
        attrs["opacity"] = MIN_OPACITY + (1 - MIN_OPACITY) * scales.position("opacity", values["opacity"])
    else:
        attrs["opacity"] = DEFAULT_OPACITY
    attrs["mark"] = mark
    return attrs


def _guide_attributes(enc, domain):
    if domain is None:
        values, low, high = [], 0, 0
    elif domain.is_continuous:
        values, low, high = list(domain.values), domain.low, domain.high
    else:
        values, low, high = list(domain.values), 0, len(domain.values)
    return {
        "field": enc.field if enc.field is not None else "*",
        "domain": json.dumps(values),
        "lo": low,
        "hi": high,
        "opacity": 1.0,
    }


def build_scene(spec):
    """
    Compute the elements a chart draws, base marks first then each layer.

    Returns:
        Scene: Mark elements and guides
    """
    evaluated = evaluate_spec(spec)
    scales = ChannelScales(spec, evaluated)
    marks = []
    schemas = {BASE_LAYER: evaluated.schema}
    for index, row in enumerate(evaluated.rows):
        attrs = _mark_attributes(spec.mark, spec.encodings, row, scales)
        if attrs is not None:
            marks.append(MarkElement(BASE_LAYER, index, row, attrs))
    for layer in spec.layers:
        layer_data = evaluate_layer(spec, layer)
        schemas[layer.name] = layer_data.schema
        for index, row in enumerate(layer_data.rows):
            attrs = _mark_attributes(layer.mark, layer.encodings, row, scales)
            if attrs is not None:
                marks.append(MarkElement(layer.name, index, row, attrs))
    guides = {
        guide: _guide_attributes(spec.encodings[channel], scales.domains[channel])
        for guide, channel in GUIDES.items() if channel in spec.encodings
    }
    return Scene(tuple(marks), guides, schemas)


def render_scene(spec):
    """
    Render a chart's static scene.

    Returns:
        dict: Element id to attribute map; marks are ``<layer>/#<row>``
    """
    scene = build_scene(spec)
    elements = {f"{m.layer}/#{m.index}": dict(m.attrs) for m in scene.marks}
    elements.update({name: dict(attrs) for name, attrs in scene.guides.items()})
    return elements
