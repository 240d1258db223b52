"""Level-synchronous traversal operator.

Each iteration scans the full source column in equal logical partitions,
collects matching edge positions, invalidates them, and materializes the
next working set from the target column. Partition results are merged in
partition order so the outcome is independent of scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import Counters, LevelMap, PreparedConfig
from .predicate import ActiveEdgeList
from .storage import EdgeColumnGroup

# Crossover from sorted-array membership to a dense bitset over codes.
BITSET_CROSSOVER_DIVISOR = 64


@dataclass
class ScanPartitioning:
    """n contiguous, equally sized ranges covering [0, edge_count)."""

    partition_count: int
    boundaries: list

    @classmethod
    def equal(cls, n: int, total: int) -> "ScanPartitioning":
        if n < 1:
            raise ValueError("partition count must be >= 1")
        cuts = np.linspace(0, total, n + 1).astype(np.int64)
        return cls(n, [(int(cuts[i]), int(cuts[i + 1])) for i in range(n)])


class WorkingSet:
    """Membership test over vertex codes; representation picked by size."""

    def __init__(self, codes: np.ndarray, vertex_count: int):
        self.codes = codes
        if len(codes) > vertex_count // BITSET_CROSSOVER_DIVISOR:
            self._mask = np.zeros(vertex_count, dtype=bool)
            self._mask[codes] = True
            self._sorted = None
        else:
            self._mask = None
            self._sorted = np.sort(codes)

    def __len__(self):
        return len(self.codes)

    def contains(self, values: np.ndarray) -> np.ndarray:
        if self._mask is not None:
            return self._mask[values]
        idx = np.searchsorted(self._sorted, values)
        idx[idx == len(self._sorted)] = 0
        return self._sorted[idx] == values if len(self._sorted) else \
            np.zeros(len(values), dtype=bool)


def ls_scan(g: EdgeColumnGroup, working: WorkingSet, ea: ActiveEdgeList,
            part: ScanPartitioning, counters: Counters,
            direction: str = "forward") -> np.ndarray:
    """Positions of active edges whose source is in the working set.

    Matched positions are invalidated in the active-edge list. Per-partition
    hits are concatenated in partition order, which keeps the merged list
    position-sorted.
    """
    src, _ = g.oriented(direction)
    hits = []
    for lo, hi in part.boundaries:
        if lo == hi:
            continue
        match = ea.bits[lo:hi] & working.contains(src[lo:hi])
        local = np.flatnonzero(match) + lo
        ea.bits[local] = False
        hits.append(local)
        counters.edges_read += hi - lo
    if not hits:
        return np.empty(0, dtype=np.int64)
    return np.concatenate(hits)


def ls_materialize(g: EdgeColumnGroup, positions: np.ndarray,
                   direction: str = "forward") -> np.ndarray:
    """Deduplicated target codes of the matched positions."""
    _, tgt = g.oriented(direction)
    return np.unique(tgt[positions])


def ls_traverse(pc: PreparedConfig, g: EdgeColumnGroup,
                part: ScanPartitioning, counters: Counters) -> LevelMap:
    """Breadth-first expansion, one full partitioned scan per level."""
    nv = len(g.vertex_dictionary)
    levels = LevelMap()
    discovered = np.zeros(nv, dtype=bool)
    for code in pc.encoded_starts:
        levels.min_level[int(code)] = 0
        discovered[code] = True

    ea = pc.active_edges
    working = pc.encoded_starts
    p = 1
    while p <= pc.recursion_boundary:
        if len(working) == 0:
            break
        positions = ls_scan(g, WorkingSet(working, nv), ea, part, counters,
                            pc.direction)
        found = ls_materialize(g, positions, pc.direction)
        # first discovery is minimal in a level-synchronous expansion
        fresh = found[~discovered[found]]
        discovered[fresh] = True
        for code in fresh:
            levels.min_level[int(code)] = p
        working = fresh
        p += 1
    return levels
