"""
Ordered set partitions.
"""


def ordered_set_partitions(items, max_blocks=None):
    """
    Generate every ordered partition of ``items`` into nonempty blocks.

    Blocks are tuples keeping the input order of their items. The first item
    is inserted into each block of each partition of the rest, or as a new
    block at every position.

    Args:
        items (sequence): Distinct items
        max_blocks (int, optional): Skip partitions with more blocks

    Yields:
        tuple: A tuple of blocks
    """
    items = tuple(items)
    for partition in _partitions(items):
        if max_blocks is None or len(partition) <= max_blocks:
            yield partition


def _partitions(items):
    if not items:
        yield ()
        return
    first, rest = items[0], items[1:]
    for partition in _partitions(rest):
        for index, block in enumerate(partition):
            yield partition[:index] + ((first,) + block,) + partition[index + 1:]
        for index in range(len(partition) + 1):
            yield partition[:index] + ((first,),) + partition[index:]


def ordered_bell(n):
    """Number of ordered set partitions of n items (the Fubini number)."""
    counts = [1]
    for m in range(1, n + 1):
        total = 0
        binomial = 1
        for k in range(1, m + 1):
            binomial = binomial * (m - k + 1) // k
            total += binomial * counts[m - k]
        counts.append(total)
    return counts[n]


def compositions(total, parts, low, high):
    """
    Yield tuples of ``parts`` integers in [low[i], high[i]] summing to ``total``.

    Args:
        total (int): Required sum
        parts (int): Number of terms
        low (sequence): Per-term minimum
        high (sequence): Per-term maximum
    """
    if parts == 0:
        if total == 0:
            yield ()
        return
    rest_low = sum(low[1:parts])
    rest_high = sum(high[1:parts])
    for value in range(low[0], high[0] + 1):
        remaining = total - value
        if rest_low <= remaining <= rest_high:
            for tail in compositions(remaining, parts - 1, low[1:], high[1:]):
                yield (value,) + tail
