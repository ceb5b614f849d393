"""Replacement policy primitives.

The simulation kernels keep policy state in flat arrays (one row per
skew-set); these helpers define the per-row update rules in plain Python so
the pure backend can call them directly and the compiled backend can mirror
them statement for statement. Tests exercise the helpers in isolation.

Policies:

* random: victim drawn from the kernel's policy stream, no state.
* fifo: per-way install stamps, evict the oldest install; hits do not touch.
* treeplru: classic tree pseudo-LRU, one bit per internal node packed into
  an int, root at bit 0, children of node i at 2i+1 and 2i+2.
* weightedlru: per-way last-access stamps, evict the least recent.
* rrip: 2-bit re-reference counters, insert at 2, promote to 0 on hit,
  evict the first way at 3 after aging rounds.
"""

from __future__ import annotations

POLICY_CODES = {"random": 0, "fifo": 1, "treeplru": 2, "weightedlru": 3, "rrip": 4}

SRRIP_MAX = 3
SRRIP_INSERT = 2


def tree_levels(ways: int) -> int:
    """Depth of the PLRU tree covering ``ways`` (rounded up to a power of two)."""
    levels = 0
    while (1 << levels) < ways:
        levels += 1
    return levels


def tree_plru_select(bits: int, ways: int) -> int:
    """Walk the tree following the stored bits; reduce mod ways when the
    tree is wider than the set (over-provisioned tag stores)."""
    levels = tree_levels(ways)
    idx = 0
    way = 0
    for lvl in range(levels):
        b = (bits >> idx) & 1
        way |= b << lvl
        idx = 2 * idx + 1 + b
    return way % ways


def tree_plru_touch(bits: int, way: int, ways: int) -> int:
    """Point every node on the path away from ``way``."""
    levels = tree_levels(ways)
    idx = 0
    for lvl in range(levels):
        b = (way >> lvl) & 1
        if b:
            bits &= ~(1 << idx)
        else:
            bits |= 1 << idx
        idx = 2 * idx + 1 + b
    return bits


def oldest_way(stamps) -> int:
    """Way with the smallest stamp; lowest index wins ties. Shared by fifo
    (install stamps) and weighted_lru (access stamps)."""
    best = 0
    best_stamp = stamps[0]
    for w in range(1, len(stamps)):
        if stamps[w] < best_stamp:
            best = w
            best_stamp = stamps[w]
    return best


def srrip_select(rrpv) -> int:
    """First way at the max re-reference value, aging the row until one
    exists. Mutates ``rrpv``."""
    while True:
        for w in range(len(rrpv)):
            if rrpv[w] >= SRRIP_MAX:
                return w
        for w in range(len(rrpv)):
            rrpv[w] += 1
