"""
Keyframe recommendation.

Diffs two charts into edit operations, enumerates ordered recombinations of
the operations, synthesizes the intermediate keyframes each recombination
implies, scores the sequences with the prioritization rules and ranks them.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from functools import reduce
from typing import Mapping, Tuple

from .chart import ChartSpec, ScaleSpec
from .combinatorics import ordered_bell, ordered_set_partitions
from .config import DEFAULT_MAX_KEYFRAMES, DEFAULT_TOP_K, op_cap
from .edit_ops import EditOp, apply_ops, diff, op_sort_key
from .engine import compute_domain, domain_kind, union_domains
from .errors import (
    CombinatorialLimit, EmptyDomain, InapplicableOp, InvalidIntermediate,
    InvalidResult, NoValidSequence, ValidationError,
)
from .parser import serialize, specs_equal
from .rules import DEFAULT_RULES, score_partition

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OrderedPartition:
    """An ordered sequence of disjoint, nonempty blocks of edit operations."""

    blocks: Tuple[Tuple[EditOp, ...], ...]

    @classmethod
    def of(cls, blocks):
        """Build a partition, sorting ops within each block by id."""
        return cls(tuple(tuple(sorted(block, key=op_sort_key)) for block in blocks))

    @property
    def ids(self):
        return tuple(tuple(op.id for op in block) for block in self.blocks)

    @property
    def ops(self):
        return tuple(op for block in self.blocks for op in block)

    def __len__(self):
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def to_document(self):
        return [list(block) for block in self.ids]


@dataclass(frozen=True)
class KeyframeSequence:
    """Keyframes k_1..k_N with the partition that produced them and its score."""

    keyframes: Tuple[ChartSpec, ...]
    partition: OrderedPartition
    score: int = 0
    breakdown: Mapping[str, int] = field(default_factory=dict)

    def __len__(self):
        return len(self.keyframes)

    @property
    def sort_key(self):
        """Score descending, then fewer keyframes, then canonical keyframes ascending."""
        keyframes = json.dumps([serialize(k) for k in self.keyframes], sort_keys=True)
        return (-self.score, len(self.keyframes), keyframes, json.dumps(self.partition.ids))

    def to_document(self, rank=None):
        doc = {
            "score": self.score,
            "rule_breakdown": dict(self.breakdown),
            "partition": self.partition.to_document(),
            "keyframes": [serialize(k) for k in self.keyframes],
        }
        if rank is not None:
            doc["rank"] = rank
        return doc


def enumerate_partitions(ops, max_blocks=None, cap=None):
    """
    Enumerate the ordered partitions of an edit-op set.

    Args:
        ops (iterable): The edit operations
        max_blocks (int, optional): Largest number of blocks
        cap (int, optional): Largest accepted number of ops; read from the
            environment when omitted

    Returns:
        list: OrderedPartitions sorted by block count then op ids

    Raises:
        CombinatorialLimit: If there are more ops than the cap
    """
    ops = sorted(ops, key=op_sort_key)
    if not ops:
        raise ValidationError("Cannot enumerate partitions of an empty op set")
    if max_blocks is not None and max_blocks < 1:
        raise ValidationError("max_blocks must be positive")
    cap = op_cap() if cap is None else cap
    if len(ops) > cap:
        raise CombinatorialLimit(f"{len(ops)} edit operations ({ordered_bell(len(ops))} ordered partitions) "
                                 f"exceed the enumeration cap of {cap}")
    partitions = [OrderedPartition.of(p) for p in ordered_set_partitions(ops, max_blocks)]
    partitions.sort(key=lambda p: (len(p), p.ids))
    logger.debug("Enumerated %d partitions of %d ops", len(partitions), len(ops))
    return partitions


def _endpoint_domain(endpoint, channel, enc):
    other = endpoint.encodings.get(channel)
    if other is None or other.field != enc.field or domain_kind(other) != domain_kind(enc):
        return None
    return compute_domain(endpoint, channel)


def union_intermediate_domains(chart, start, end):
    """
    Pin an intermediate chart's scale domains to the union of the endpoints'.

    Only endpoint domains of channels that encode the same field with the
    same domain kind take part; a channel neither endpoint matches keeps its
    own computed domain.
    """
    encodings = {}
    for channel, enc in chart.encodings.items():
        domains = [d for d in (_endpoint_domain(start, channel, enc), _endpoint_domain(end, channel, enc))
                   if d is not None]
        domain = reduce(union_domains, domains) if domains else compute_domain(chart, channel)
        if domain.is_continuous and domain.low == domain.high:
            encodings[channel] = enc
            continue
        encodings[channel] = enc.replace(scale=ScaleSpec(enc.scale.type, domain))
    return chart.replace(encodings=encodings)


def synthesize_sequence(start, end, partition, rules=DEFAULT_RULES):
    """
    Apply a partition's blocks cumulatively and score the resulting sequence.

    Args:
        start (ChartSpec): First keyframe
        end (ChartSpec): Last keyframe
        partition (OrderedPartition): Blocks of diff(start, end)
        rules (sequence): Prioritization rules

    Returns:
        KeyframeSequence: With intermediate domains unioned

    Raises:
        InvalidIntermediate: If a block is inapplicable or gives an invalid chart
    """
    try:
        charts = apply_ops(start, partition)
    except (InapplicableOp, InvalidResult) as e:
        raise InvalidIntermediate(f"Partition {list(partition.ids)} is invalid: {e.message}", path=e.path)
    if not specs_equal(charts[-1], end):
        raise InvalidIntermediate(f"Partition {list(partition.ids)} does not reach the end chart")
    charts[-1] = end
    try:
        for index in range(1, len(charts) - 1):
            charts[index] = union_intermediate_domains(charts[index], start, end)
    except EmptyDomain as e:
        raise InvalidIntermediate(f"Partition {list(partition.ids)} empties a channel: {e.message}", path=e.path)
    score, breakdown = score_partition(partition, rules)
    return KeyframeSequence(tuple(charts), partition, score, breakdown)


def recommend_keyframes(start, end, max_keyframes=DEFAULT_MAX_KEYFRAMES, top_k=DEFAULT_TOP_K,
                        rules=DEFAULT_RULES, cap=None):
    """
    Recommend ranked keyframe sequences between two charts.

    Args:
        start (ChartSpec): First keyframe
        end (ChartSpec): Last keyframe
        max_keyframes (int): Largest number of intermediate keyframes
        top_k (int): Number of sequences to return
        rules (sequence): Prioritization rules
        cap (int, optional): Op cap for the enumerator

    Returns:
        list: KeyframeSequences, best first
    """
    ops = diff(start, end)
    if not ops.ops:
        logger.info("Charts are equal; returning the direct transition")
        return [KeyframeSequence((ops.source, ops.target), OrderedPartition(()), 0,
                                 {rule.rule_id: 0 for rule in rules})]

    sequences = []
    dropped = 0
    for partition in enumerate_partitions(ops, max_blocks=max_keyframes + 1, cap=cap):
        try:
            sequences.append(synthesize_sequence(ops.source, ops.target, partition, rules))
        except InvalidIntermediate as e:
            dropped += 1
            logger.debug("Dropped %s", e)
    logger.info("Synthesized %d keyframe sequences, dropped %d invalid", len(sequences), dropped)
    if not sequences:
        raise NoValidSequence("Every keyframe sequence has an invalid intermediate chart")
    sequences.sort(key=lambda s: s.sort_key)
    return sequences[:top_k]
