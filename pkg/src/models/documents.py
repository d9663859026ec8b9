"""
Reading and writing the structured documents the command line exchanges.
"""
import json
import logging

from .animation import AnimStepSpec, AnimationPlanCandidate, Stage, Timing
from .errors import ChartSyntaxError, KeyframerError, ValidationError
from .parser import load_chart_spec, serialize
from .timeline import Segment, Timeline, Track

logger = logging.getLogger(__name__)


def read_document(filename):
    """
    Read and decode a JSON document.

    Raises:
        ValidationError: If the file cannot be read
        ChartSyntaxError: If the file is not well-formed JSON
    """
    try:
        with open(filename) as f:
            text = f.read()
    except OSError as e:
        raise ValidationError(f"Cannot read '{filename}': {e.strerror}", path=filename)
    try:
        return json.loads(text)
    except ValueError as e:
        raise ChartSyntaxError(f"Malformed JSON in '{filename}': {e}", path=filename)


def dump_document(document):
    """Pretty-printed JSON with sorted keys, newline terminated."""
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


def _pick_ranked(document, rank, what):
    if not document:
        raise ValidationError(f"The {what} document is empty")
    if not 1 <= rank <= len(document):
        raise ValidationError(f"Rank {rank} is out of range; the document holds {len(document)} {what}s",
                              path="rank")
    return document[rank - 1], f"[{rank - 1}]"


def keyframes_from_document(document, rank=1):
    """
    Load a keyframe sequence.

    Accepts a ranked recommendation array (picking ``rank``, 1-based), a single
    sequence object with a ``keyframes`` key, or a bare array of chart documents.

    Returns:
        list: ChartSpecs
    """
    prefix = "$"
    if isinstance(document, list) and document and isinstance(document[0], dict) and "keyframes" in document[0]:
        document, index = _pick_ranked(document, rank, "sequence")
        prefix = f"${index}"
    if isinstance(document, dict):
        if "keyframes" not in document:
            raise ValidationError("A sequence document needs a 'keyframes' array")
        charts, prefix = document["keyframes"], f"{prefix}.keyframes"
    else:
        charts = document
    if not isinstance(charts, list) or len(charts) < 2:
        raise ValidationError("A keyframe sequence needs at least two charts", path=prefix)
    return [load_chart_spec(chart, prefix=f"{prefix}[{i}]") for i, chart in enumerate(charts)]


def keyframes_document(charts):
    return {"keyframes": [serialize(c) for c in charts]}


def _timing(doc, path):
    try:
        return Timing(
            duration=doc.get("duration", Timing.duration),
            delay=doc.get("delay", Timing.delay),
            stagger=doc.get("stagger", Timing.stagger),
            easing=doc.get("easing", Timing.easing),
        )
    except ValidationError as e:
        raise ValidationError(e.message, path=f"{path}.{e.path}")


def step_from_document(doc, path="$"):
    if not isinstance(doc, dict) or not isinstance(doc.get("stages"), list):
        raise ValidationError("A step needs a 'stages' array", path=path)
    stages = []
    for i, stage in enumerate(doc["stages"]):
        stage_path = f"{path}.stages[{i}]"
        if not isinstance(stage, dict) or not isinstance(stage.get("components", []), list):
            raise ValidationError("A stage needs a 'components' array", path=stage_path)
        stages.append(Stage(tuple(stage.get("components", [])), _timing(stage, stage_path)))
    try:
        return AnimStepSpec(tuple(stages))
    except ValidationError as e:
        raise ValidationError(e.message, path=f"{path}.{e.path}")


def plan_from_document(document, rank=1):
    """
    Load an animation plan from a ranked plan array or a single plan object.

    Returns:
        AnimationPlanCandidate
    """
    prefix = "$"
    if isinstance(document, list):
        document, index = _pick_ranked(document, rank, "plan")
        prefix = f"${index}"
    if not isinstance(document, dict) or not isinstance(document.get("steps"), list):
        raise ValidationError("A plan document needs a 'steps' array", path=prefix)
    steps = [step_from_document(s, f"{prefix}.steps[{i}]") for i, s in enumerate(document["steps"])]
    return AnimationPlanCandidate.of(steps)


def _value(value):
    return tuple(value) if isinstance(value, list) else value


def timeline_from_document(document):
    """Rebuild a Timeline from its document."""
    try:
        tracks = tuple(
            Track(t["element"], t["attribute"], float(t["start"]), float(t["end"]),
                  _value(t["from"]), _value(t["to"]), t.get("easing", "linear"), float(t.get("offset", 0.0)))
            for t in document["tracks"]
        )
        segments = tuple(
            Segment(s["pair_index"], s["stage_index"], float(s["start"]), float(s["end"]),
                    float(s.get("delay", 0.0)), tuple(s["components"]))
            for s in document["segments"]
        )
        initial = {eid: {k: _value(v) for k, v in attrs.items()} for eid, attrs in document["elements"].items()}
        return Timeline(float(document["duration"]), segments, tracks, initial,
                        tuple(float(t) for t in document["keyframe_times"]))
    except (KeyError, TypeError, AttributeError, ValueError) as e:
        raise ValidationError(f"Malformed timeline document: {e!r}")


def error_document(error):
    if isinstance(error, KeyframerError):
        return error.to_document()
    return {"error": {"type": type(error).__name__, "message": str(error), "path": "$"}}
