"""
Staged animation recommendation.

For each adjacent keyframe pair the visual components that change are split
into ordered stages; the per-pair options are cross-joined into whole-plan
candidates with a fixed total number of stages and ranked by complexity.
"""
from __future__ import annotations

import dataclasses
import json
import logging
from dataclasses import dataclass, field
from typing import Tuple

from .chart import ScaleSpec, data_pipeline
from .combinatorics import compositions, ordered_set_partitions
from .config import DEFAULT_EASING, DEFAULT_STAGE_DURATION, DEFAULT_TOP_K
from .dataset import is_number
from .engine import compute_domain
from .errors import EmptyDomain, InfeasibleBudget, ValidationError

logger = logging.getLogger(__name__)

DATA = "data"
MARKS = "marks"
GUIDES = ("axis.x", "axis.y", "legend.color", "legend.size")
COMPONENTS = (DATA, MARKS) + GUIDES
GUIDE_CHANNELS = {"axis.x": "x", "axis.y": "y", "legend.color": "color", "legend.size": "size"}

COMPONENT_WEIGHTS = {DATA: 3.0, MARKS: 2.0, "axis.x": 1.0, "axis.y": 1.0, "legend.color": 1.0, "legend.size": 1.0}
SIMULTANEITY = 0.5

EASINGS = ("linear", "cubic-in-out")


def component_order(component):
    return COMPONENTS.index(component)


@dataclass(frozen=True)
class Timing:
    """Timing of one stage: duration and delay in ms, stagger as a fraction of the duration."""

    duration: float = DEFAULT_STAGE_DURATION
    delay: float = 0.0
    stagger: float = 0.0
    easing: str = DEFAULT_EASING

    def __post_init__(self):
        if not is_number(self.duration) or self.duration <= 0:
            raise ValidationError(f"Stage duration must be positive, got {self.duration!r}", path="duration")
        if not is_number(self.delay) or self.delay < 0:
            raise ValidationError(f"Stage delay must not be negative, got {self.delay!r}", path="delay")
        if not is_number(self.stagger) or not 0 <= self.stagger <= 1:
            raise ValidationError(f"Stagger must lie in [0, 1], got {self.stagger!r}", path="stagger")
        if self.easing not in EASINGS:
            raise ValidationError(f"Unknown easing '{self.easing}'", path="easing")


@dataclass(frozen=True)
class Stage:
    """The components that animate together, with their timing."""

    components: Tuple[str, ...]
    timing: Timing = field(default_factory=Timing)

    def to_document(self):
        return {
            "components": list(self.components),
            "duration": self.timing.duration,
            "delay": self.timing.delay,
            "stagger": self.timing.stagger,
            "easing": self.timing.easing,
        }


@dataclass(frozen=True)
class AnimStepSpec:
    """The staged animation of one adjacent keyframe pair."""

    stages: Tuple[Stage, ...]

    def __post_init__(self):
        if not self.stages:
            raise ValidationError("An animation step needs at least one stage", path="stages")
        seen = set()
        for stage in self.stages:
            for component in stage.components:
                if component not in COMPONENTS:
                    raise ValidationError(f"Unknown component '{component}'", path="stages")
                if component in seen:
                    raise ValidationError(f"Component '{component}' appears in two stages", path="stages")
                seen.add(component)

    @property
    def stage_count(self):
        return len(self.stages)

    @property
    def components(self):
        return frozenset(c for stage in self.stages for c in stage.components)

    def stage_of(self, component):
        """Index of the stage animating ``component``, None if no stage does."""
        for index, stage in enumerate(self.stages):
            if component in stage.components:
                return index
        return None

    @property
    def duration(self):
        return sum(s.timing.duration + s.timing.delay for s in self.stages)

    def to_document(self, pair_index=None):
        doc = {"stages": [s.to_document() for s in self.stages]}
        if pair_index is not None:
            doc["pair_index"] = pair_index
        return doc


@dataclass(frozen=True)
class AnimationPlanCandidate:
    """One AnimStepSpec per keyframe pair."""

    steps: Tuple[AnimStepSpec, ...]
    total_complexity: float
    total_stages: int

    @classmethod
    def of(cls, steps):
        steps = tuple(steps)
        return cls(steps, sum(complexity(s) for s in steps), sum(s.stage_count for s in steps))

    def to_document(self, rank=None):
        doc = {
            "total_complexity": self.total_complexity,
            "total_stages": self.total_stages,
            "steps": [s.to_document(i) for i, s in enumerate(self.steps)],
        }
        if rank is not None:
            doc["rank"] = rank
        return doc

    @property
    def sort_key(self):
        return (self.total_complexity, json.dumps(self.to_document(), sort_keys=True))


def _effective_domain(spec, channel):
    try:
        return compute_domain(spec, channel)
    except EmptyDomain:
        return None


def _guide_changed(a, b, channel):
    ea, eb = a.encodings.get(channel), b.encodings.get(channel)
    if ea is None or eb is None:
        return ea is not eb
    if ea.ref != eb.ref or ea.scale.type != eb.scale.type:
        return True
    return _effective_domain(a, channel) != _effective_domain(b, channel)


def _visual(enc):
    """An encoding without its explicit domain, which is compared in effect instead."""
    return None if enc is None else enc.replace(scale=ScaleSpec(enc.scale.type))


def changed_components(a, b):
    """
    Return the visual components that differ between two keyframes.

    Returns:
        frozenset: Names from data, marks, axis.x, axis.y, legend.color, legend.size
    """
    changed = set()
    if data_pipeline(a) != data_pipeline(b):
        changed.add(DATA)
    for component, channel in GUIDE_CHANNELS.items():
        if _guide_changed(a, b, channel):
            changed.add(component)
    channels = set(a.encodings) | set(b.encodings)
    if (DATA in changed or a.mark != b.mark or a.layers != b.layers
            or any(_visual(a.encodings.get(c)) != _visual(b.encodings.get(c)) for c in channels)
            or any(_effective_domain(a, c) != _effective_domain(b, c) for c in channels
                   if c in a.encodings and c in b.encodings)):
        changed.add(MARKS)
    return frozenset(changed)


def _respects_apprehension(blocks, components):
    """Guides may not move before the data (or marks) they describe."""
    anchor = DATA if DATA in components else MARKS if MARKS in components else None
    if anchor is None:
        return True
    index = {c: i for i, block in enumerate(blocks) for c in block}
    return all(index[g] >= index[anchor] for g in GUIDES if g in index)


def enumerate_pair_specs(a, b, timing=None):
    """
    Enumerate the staged animations of one keyframe pair.

    Args:
        a (ChartSpec): Keyframe before
        b (ChartSpec): Keyframe after
        timing (Timing, optional): Timing given to every stage

    Returns:
        list: AnimStepSpecs, fewest stages first
    """
    timing = timing or Timing()
    components = sorted(changed_components(a, b), key=component_order)
    if not components:
        return [AnimStepSpec((Stage((), timing),))]
    specs = []
    for blocks in ordered_set_partitions(components):
        if _respects_apprehension(blocks, components):
            specs.append(AnimStepSpec(tuple(Stage(tuple(block), timing) for block in blocks)))
    specs.sort(key=lambda s: (s.stage_count, json.dumps(s.to_document())))
    return specs


def complexity(step):
    """
    Complexity of a staged animation: per stage, the component weights times
    a factor growing with the number of simultaneous components.
    """
    total = 0.0
    for stage in step.stages:
        n = len(stage.components)
        if n:
            total += sum(COMPONENT_WEIGHTS[c] for c in stage.components) * (1 + SIMULTANEITY * (n - 1))
    return total


def _keyframe_charts(keyframes):
    charts = getattr(keyframes, "keyframes", keyframes)
    return list(charts)


def recommend_animations(keyframes, stages, top_k=DEFAULT_TOP_K, timing=None):
    """
    Recommend whole-plan staged animations with exactly ``stages`` stages.

    Args:
        keyframes (KeyframeSequence or list): Keyframe charts
        stages (int): Total stage budget M
        top_k (int): Number of candidates to return
        timing (Timing, optional): Timing given to every stage

    Returns:
        list: AnimationPlanCandidates, lowest total complexity first

    Raises:
        InfeasibleBudget: If no plan can have exactly ``stages`` stages
    """
    charts = _keyframe_charts(keyframes)
    if len(charts) < 2:
        raise ValidationError("A keyframe sequence needs at least two charts", path="keyframes")
    pairs = [enumerate_pair_specs(a, b, timing) for a, b in zip(charts, charts[1:])]
    by_count = []
    for options in pairs:
        grouped = {}
        for spec in options:
            grouped.setdefault(spec.stage_count, []).append(spec)
        by_count.append(grouped)
    low = [min(g) for g in by_count]
    high = [max(g) for g in by_count]
    if stages < len(pairs) or stages < sum(low) or stages > sum(high):
        raise InfeasibleBudget(
            f"{stages} stages cannot animate {len(charts)} keyframes; "
            f"feasible totals are {sum(low)} to {sum(high)}", path="stages")

    candidates = []
    for counts in compositions(stages, len(pairs), low, high):
        candidates.extend(_cross_join([g[c] for g, c in zip(by_count, counts)]))
    candidates.sort(key=lambda c: c.sort_key)
    logger.info("%d plans with %d stages over %d pairs", len(candidates), stages, len(pairs))
    return candidates[:top_k]


def _cross_join(options):
    plans = [()]
    for specs in options:
        plans = [plan + (spec,) for plan in plans for spec in specs]
    return [AnimationPlanCandidate.of(plan) for plan in plans]


def retime(step, stage_index, duration=None, delay=None, stagger=None, easing=None):
    """
    Return a copy of ``step`` with one stage's timing edited.

    Raises:
        ValidationError: If the stage index or a timing value is out of range
    """
    if not 0 <= stage_index < step.stage_count:
        raise ValidationError(f"Stage {stage_index} does not exist; the step has {step.stage_count}",
                              path="stage")
    stage = step.stages[stage_index]
    changes = {k: v for k, v in (("duration", duration), ("delay", delay), ("stagger", stagger),
                                 ("easing", easing)) if v is not None}
    timing = dataclasses.replace(stage.timing, **changes)
    stages = list(step.stages)
    stages[stage_index] = Stage(stage.components, timing)
    return AnimStepSpec(tuple(stages))
