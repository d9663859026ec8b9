"""
Timeline compilation and sampling.

``compile_timeline`` joins the elements of adjacent keyframes, lays the stages
of every animation step out on one time axis and emits a tween track for each
attribute that changes. ``sample`` evaluates a timeline at a normalized time.
"""
from __future__ import annotations

import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Any, Mapping, Tuple

from .animation import DATA, MARKS, changed_components
from .dataset import NOMINAL, ORDINAL, is_number
from .errors import CoverageMismatch, JoinAmbiguity, OutOfRange, ValidationError
from .scene import (
    CATEGORICAL_ATTRIBUTES, COLOR_ATTRIBUTES, GUIDES, build_scene, lerp, lerp_color,
)

logger = logging.getLogger(__name__)

STAGGER_ORDERS = ("data", "value")
KEY_TYPES = (NOMINAL, ORDINAL)
_SNAP = 1e-9


def linear(t):
    return t


def cubic_in_out(t):
    t *= 2
    if t <= 1:
        return t * t * t / 2
    t -= 2
    return (t * t * t + 2) / 2


EASING_FUNCTIONS = {"linear": linear, "cubic-in-out": cubic_in_out}


def attribute_kind(attribute):
    if attribute in CATEGORICAL_ATTRIBUTES:
        return "category"
    if attribute in COLOR_ATTRIBUTES:
        return "color"
    return "number"


@dataclass(frozen=True)
class Track:
    """One attribute of one element changing over [start, end] ms."""

    element: str
    attribute: str
    start: float
    end: float
    from_value: Any
    to_value: Any
    easing: str = "linear"
    offset: float = 0.0

    def value_at(self, time):
        if time >= self.end:
            return self.to_value
        if time <= self.start:
            return self.from_value
        fraction = (time - self.start) / (self.end - self.start)
        kind = attribute_kind(self.attribute)
        if kind == "category":
            return self.to_value if fraction >= 0.5 else self.from_value
        eased = EASING_FUNCTIONS[self.easing](fraction)
        if kind == "color":
            return lerp_color(self.from_value, self.to_value, eased)
        return lerp(self.from_value, self.to_value, eased)

    def to_document(self):
        return {
            "element": self.element,
            "attribute": self.attribute,
            "start": self.start,
            "end": self.end,
            "from": _plain(self.from_value),
            "to": _plain(self.to_value),
            "easing": self.easing,
            "offset": self.offset,
        }


@dataclass(frozen=True)
class Segment:
    """One stage of one keyframe pair: a pause of ``delay`` ms, then the stage."""

    pair_index: int
    stage_index: int
    start: float
    end: float
    delay: float
    components: Tuple[str, ...]

    def to_document(self):
        return {
            "pair_index": self.pair_index,
            "stage_index": self.stage_index,
            "start": self.start,
            "end": self.end,
            "delay": self.delay,
            "components": list(self.components),
        }


@dataclass(frozen=True)
class Timeline:
    """Compiled tracks over [0, duration] ms and the elements' values at time 0."""

    duration: float
    segments: Tuple[Segment, ...]
    tracks: Tuple[Track, ...]
    initial: Mapping[str, Mapping[str, Any]]
    keyframe_times: Tuple[float, ...]

    def to_document(self):
        return {
            "duration": self.duration,
            "keyframe_times": list(self.keyframe_times),
            "segments": [s.to_document() for s in self.segments],
            "tracks": [t.to_document() for t in self.tracks],
            "elements": {eid: {k: _plain(v) for k, v in attrs.items()} for eid, attrs in self.initial.items()},
        }


@dataclass(frozen=True)
class SceneSample:
    """Every element's attributes at normalized time t."""

    t: float
    elements: Mapping[str, Mapping[str, Any]]

    def visible(self):
        return {eid: attrs for eid, attrs in self.elements.items() if attrs.get("opacity", 0) > 0}

    def to_document(self):
        return {
            "t": self.t,
            "elements": {eid: {k: _plain(v) for k, v in attrs.items()} for eid, attrs in self.elements.items()},
        }


def _plain(value):
    return list(value) if isinstance(value, tuple) else value


# Data join

@dataclass
class _Live:
    """An element on stage: its id and the keyframe mark it currently draws."""

    id: str
    mark: Any


def _key_fields(schema_a, schema_b, key):
    if key is not None and key in schema_a and key in schema_b:
        return (key,)
    shared = [f for f in schema_a if f in schema_b and schema_a[f] in KEY_TYPES and schema_b[f] in KEY_TYPES]
    return tuple(sorted(shared))


def _keys(elements, fields):
    if fields:
        return [tuple(e.mark.row.get(f) for f in fields) for e in elements]
    return [("#", position) for position in range(len(elements))]


def _key_label(key):
    if key and key[0] == "#":
        return f"#{key[1]}"
    return "|".join(str(v) for v in key)


class _Compiler:
    def __init__(self, key, stagger_order):
        if stagger_order not in STAGGER_ORDERS:
            raise ValidationError(f"Unknown stagger order '{stagger_order}'", path="stagger_order")
        self.key = key
        self.stagger_order = stagger_order
        self.initial = {}
        self.state = {}
        self.tracks = []
        self.used = set()

    def new_element(self, layer, key, attrs):
        base = f"{layer}/{_key_label(key)}"
        eid = base
        suffix = 1
        while eid in self.used:
            suffix += 1
            eid = f"{base}~{suffix}"
        self.used.add(eid)
        self.initial[eid] = dict(attrs)
        self.state[eid] = dict(attrs)
        return eid

    def join(self, current, marks, schemas_a, schemas_b, pair_index):
        """
        Match the live elements against the next keyframe's marks.

        Returns:
            tuple: (moves, next live elements); a move is
            (element id, target attributes, order, exit flag, enter flag)
        """
        layers = []
        for element in current:
            if element.mark.layer not in layers:
                layers.append(element.mark.layer)
        for mark in marks:
            if mark.layer not in layers:
                layers.append(mark.layer)

        moves = []
        live = []
        for layer in layers:
            old = [e for e in current if e.mark.layer == layer]
            new = [m for m in marks if m.layer == layer]
            fields = _key_fields(schemas_a.get(layer, {}), schemas_b.get(layer, {}), self.key)
            old_keys = _keys(old, fields)
            new_keys = [tuple(m.row.get(f) for f in fields) for m in new] if fields else \
                [("#", p) for p in range(len(new))]
            dup_old = [k for k, n in Counter(old_keys).items() if n > 1]
            dup_new = [k for k, n in Counter(new_keys).items() if n > 1]
            if dup_old and dup_new:
                offending = sorted({_key_label(k) for k in dup_old} & {_key_label(k) for k in dup_new}) \
                    or sorted(_key_label(k) for k in dup_old + dup_new)
                raise JoinAmbiguity(f"Layer '{layer}' has duplicate join keys {offending[:5]} "
                                    f"on both sides of pair {pair_index}", path=f"keyframes[{pair_index}]")
            groups = defaultdict(list)
            for element, key in zip(old, old_keys):
                groups[key].append(element)
            taken = set()
            for mark, key in zip(new, new_keys):
                order = (0, len(moves), mark.attrs["x"])
                group = groups.get(key)
                if group and key not in taken:
                    taken.add(key)
                    rep = group[0]
                    moves.append((rep.id, dict(mark.attrs), order, False, False))
                    live.append(_Live(rep.id, mark))
                    for surplus in group[1:]:
                        moves.append((surplus.id, dict(mark.attrs, opacity=0.0), (1, len(moves), mark.attrs["x"]),
                                      False, False))
                elif group:
                    split = self.new_element(layer, key, dict(self.state[group[0].id], opacity=0.0))
                    moves.append((split, dict(mark.attrs), order, False, False))
                    live.append(_Live(split, mark))
                else:
                    born = self.new_element(layer, key, dict(mark.attrs, opacity=0.0))
                    moves.append((born, {"opacity": mark.attrs["opacity"]}, order, False, True))
                    live.append(_Live(born, mark))
            for element, key in zip(old, old_keys):
                if key not in groups or key in taken:
                    continue
                for gone in groups[key]:
                    moves.append((gone.id, {"opacity": 0.0}, (1, len(moves), self.state[gone.id]["x"]), True, False))
                groups[key] = []
        return moves, live

    def emit(self, eid, target, window, timing, offset, duration):
        for attribute, value in target.items():
            before = self.state[eid].get(attribute)
            if before == value:
                continue
            start = window + offset
            self.tracks.append(Track(eid, attribute, start, start + duration, before, value,
                                     timing.easing, offset))
            self.state[eid][attribute] = value

    def stagger(self, moves, window, timing):
        if self.stagger_order == "value":
            moves = sorted(moves, key=lambda m: (m[2][2], m[2][0], m[2][1]))
        else:
            moves = sorted(moves, key=lambda m: (m[2][0], m[2][1]))
        n = len(moves)
        spread = timing.stagger * timing.duration if n > 1 else 0.0
        duration = timing.duration - spread
        for index, (eid, target, _, _, _) in enumerate(moves):
            offset = index * spread / (n - 1) if n > 1 else 0.0
            self.emit(eid, target, window, timing, offset, duration)


def compile_timeline(keyframes, steps, key=None, stagger_order="data"):
    """
    Compile keyframes and their animation steps into a timeline.

    Args:
        keyframes (KeyframeSequence or list): Keyframe charts k_1..k_N
        steps (list): N-1 AnimStepSpecs
        key (str, optional): Join key field overriding the shared nominal fields
        stagger_order (str): 'data' or 'value' (target x position)

    Returns:
        Timeline: The compiled timeline

    Raises:
        CoverageMismatch: If a step does not stage exactly the changed components
        JoinAmbiguity: If join keys repeat on both sides of a pair
    """
    charts = list(getattr(keyframes, "keyframes", keyframes))
    steps = list(getattr(steps, "steps", steps))
    if len(charts) < 2:
        raise ValidationError("A timeline needs at least two keyframes", path="keyframes")
    if len(steps) != len(charts) - 1:
        raise ValidationError(f"{len(charts)} keyframes need {len(charts) - 1} steps, got {len(steps)}",
                              path="steps")

    compiler = _Compiler(key, stagger_order)
    scenes = [build_scene(c) for c in charts]
    current = []
    for mark in scenes[0].marks:
        fields = _key_fields(scenes[0].schemas[mark.layer], scenes[0].schemas[mark.layer], key)
        label = tuple(mark.row.get(f) for f in fields) if fields else ("#", mark.index)
        current.append(_Live(compiler.new_element(mark.layer, label, mark.attrs), mark))
    for guide, attrs in scenes[0].guides.items():
        compiler.used.add(guide)
        compiler.initial[guide] = dict(attrs)
        compiler.state[guide] = dict(attrs)

    segments = []
    cursor = 0.0
    times = [0.0]
    for index, step in enumerate(steps):
        a, b = charts[index], charts[index + 1]
        changed = changed_components(a, b)
        if changed != step.components:
            missing = sorted(changed - step.components)
            extra = sorted(step.components - changed)
            raise CoverageMismatch(f"Pair {index} changes {sorted(changed)}; missing {missing}, extra {extra}",
                                   path=f"steps[{index}]")
        windows = []
        for stage_index, stage in enumerate(step.stages):
            active = cursor + stage.timing.delay
            end = active + stage.timing.duration
            segments.append(Segment(index, stage_index, cursor, end, stage.timing.delay, stage.components))
            windows.append((active, stage.timing))
            cursor = end
        times.append(cursor)

        last = step.stage_count - 1
        mark_stage = step.stage_of(MARKS)
        if mark_stage is None:
            mark_stage = step.stage_of(DATA)
        if mark_stage is None:
            mark_stage = last

        before, after = scenes[index], scenes[index + 1]
        moves, current = compiler.join(current, after.marks, before.schemas, after.schemas, index)
        staged = defaultdict(list)
        for move in moves:
            _, _, _, exiting, entering = move
            staged[0 if exiting else last if entering else mark_stage].append(move)
        for stage_index, stage_moves in sorted(staged.items()):
            window, timing = windows[stage_index]
            compiler.stagger(stage_moves, window, timing)

        for guide in GUIDES:
            old, new = before.guides.get(guide), after.guides.get(guide)
            if old is None and new is None:
                continue
            stage_index = step.stage_of(guide)
            if stage_index is None:
                stage_index = mark_stage
            window, timing = windows[stage_index]
            if new is None:
                target = {"opacity": 0.0}
            else:
                if guide not in compiler.state:
                    compiler.used.add(guide)
                    compiler.initial[guide] = dict(new, opacity=0.0)
                    compiler.state[guide] = dict(new, opacity=0.0)
                target = dict(new)
            compiler.emit(guide, target, window, timing, 0.0, timing.duration)

    tracks = sorted(compiler.tracks, key=lambda t: (t.start, t.element, t.attribute))
    logger.info("Compiled %d tracks over %d elements in %.0f ms", len(tracks), len(compiler.initial), cursor)
    return Timeline(cursor, tuple(segments), tuple(tracks), compiler.initial, tuple(times))


def sample_at(timeline, time):
    """Sample a timeline at ``time`` ms."""
    elements = {eid: dict(attrs) for eid, attrs in timeline.initial.items()}
    for track in timeline.tracks:
        if time < track.start:
            break
        elements[track.element][track.attribute] = track.value_at(time)
    return elements


def sample(timeline, t):
    """
    Sample a timeline at normalized time t.

    Args:
        timeline (Timeline): A compiled timeline
        t (float): Time in [0, 1]

    Returns:
        SceneSample: Every element's attribute values

    Raises:
        OutOfRange: If t lies outside [0, 1]
    """
    if not is_number(t) or math.isnan(t) or not 0 <= t <= 1:
        raise OutOfRange(f"Sample time {t!r} lies outside [0, 1]", path="t")
    time = t * timeline.duration
    for boundary in timeline.keyframe_times:
        if abs(time - boundary) <= _SNAP * max(1.0, timeline.duration):
            time = boundary
    return SceneSample(t, sample_at(timeline, time))


def keyframe_t(timeline, index):
    """Normalized time at which keyframe ``index`` is on screen."""
    return timeline.keyframe_times[index] / timeline.duration
