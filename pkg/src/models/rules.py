"""
Prioritization rules for ordering edit operations.

Each rule is a boolean condition over an ordered partition of edit operations
and contributes its score once when the condition holds.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

from .edit_ops import EditKind, FILTER_KINDS

logger = logging.getLogger(__name__)

ADD_AGGREGATE = EditKind.ADD_AGGREGATE
REMOVE_AGGREGATE = EditKind.REMOVE_AGGREGATE
ADD_BIN = EditKind.ADD_BIN
REMOVE_BIN = EditKind.REMOVE_BIN


def _indices(partition, kinds):
    return [i for i, block in enumerate(partition.blocks) for op in block if op.kind in kinds]


def earlier(partition, first, then):
    """True if an op of a ``first`` kind sits in a strictly earlier block than one of a ``then`` kind."""
    a, b = _indices(partition, first), _indices(partition, then)
    return bool(a and b and min(a) < max(b))


def together(partition, kinds_a, kinds_b):
    """True if one block holds an op of each of two kind sets."""
    for block in partition.blocks:
        present = {op.kind for op in block}
        if present & set(kinds_a) and present & set(kinds_b):
            return True
    return False


def filter_before_transform(p):
    return (earlier(p, (EditKind.ADD_FILTER,), (ADD_AGGREGATE, ADD_BIN))
            or earlier(p, (REMOVE_AGGREGATE, REMOVE_BIN), FILTER_KINDS))


def aggregate_before_bin(p):
    return earlier(p, (ADD_AGGREGATE,), (ADD_BIN,)) or earlier(p, (REMOVE_BIN,), (REMOVE_AGGREGATE,))


def mark_before_aggregate(p):
    return earlier(p, (EditKind.MARK,), (ADD_AGGREGATE,)) or earlier(p, (REMOVE_AGGREGATE,), (EditKind.MARK,))


def encoding_before_aggregate(p):
    return (earlier(p, (EditKind.ADD_ENCODING, EditKind.MODIFY_ENCODING), (ADD_AGGREGATE,))
            or earlier(p, (REMOVE_AGGREGATE,), (EditKind.REMOVE_ENCODING,)))


def encoding_with_scale(p):
    for block in p.blocks:
        encoded = {op.channel for op in block if op.kind == EditKind.MODIFY_ENCODING}
        scaled = {op.channel for op in block if op.kind == EditKind.MODIFY_SCALE}
        if encoded & scaled:
            return True
    return False


def filters_together(p):
    return any(sum(op.kind in FILTER_KINDS for op in block) >= 2 for block in p.blocks)


def bin_with_aggregate(p):
    return together(p, (ADD_BIN,), (ADD_AGGREGATE,)) or together(p, (REMOVE_BIN,), (REMOVE_AGGREGATE,))


@dataclass(frozen=True)
class PrioritizationRule:
    """A scored condition over an ordered partition."""

    rule_id: str
    description: str
    score: int
    condition: Callable

    def applies(self, partition):
        return bool(self.condition(partition))


DEFAULT_RULES = (
    PrioritizationRule("R1", "Filter before aggregate or bin", 1, filter_before_transform),
    PrioritizationRule("R2", "Aggregate before bin", -1, aggregate_before_bin),
    PrioritizationRule("R3", "Marktype before aggregate", -1, mark_before_aggregate),
    PrioritizationRule("R4", "Add, remove or modify encoding before aggregate", 1, encoding_before_aggregate),
    PrioritizationRule("R5", "Modify encoding with its scale", 1, encoding_with_scale),
    PrioritizationRule("R6", "Multiple filters together", -1, filters_together),
    PrioritizationRule("R7", "Bin together with aggregate", 1, bin_with_aggregate),
)


def score_partition(partition, rules=DEFAULT_RULES):
    """
    Score an ordered partition.

    Args:
        partition (OrderedPartition): The partition to score
        rules (sequence): Rules to apply

    Returns:
        tuple: (total score, {rule id: contribution})
    """
    breakdown = {}
    for rule in rules:
        contribution = rule.score if rule.applies(partition) else 0
        breakdown[rule.rule_id] = contribution
        if contribution:
            logger.debug("%s %+d on %s", rule.rule_id, contribution, partition.ids)
    return sum(breakdown.values()), breakdown
