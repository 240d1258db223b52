"""Fragmented-incremental traversal operator.

The edge column is tiled into contiguous fragments, each carrying a bloom
filter over its distinct source codes. A transition graph index (TGI) links
fragment F_a to F_b whenever some edge in F_a ends at a vertex whose
outgoing edges start in F_b. Traversal walks fragment-at-a-time, scheduling
candidate fragments through a priority queue fed by frontier-synopsis
probes.

Fragment order can discover a vertex on a long path before a short one;
to keep results exact the operator tracks minimal levels, re-frontiers a
vertex whose level improves, and re-activates that vertex's already
consumed outgoing edges so the improvement propagates.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .engine import Counters, LevelMap, PreparedConfig
from .errors import ClusteringError, ConfigurationError
from .predicate import ActiveEdgeList
from .storage import TYPE_EDGE_CLUSTERED, EdgeColumnGroup

_LN2 = math.log(2.0)
_MIX1 = np.uint64(0x9E3779B97F4A7C15)
_MIX2 = np.uint64(0xBF58476D1CE4E5B9)
_MIX3 = np.uint64(0x94D049BB133111EB)
_SEED2 = np.uint64(0xC2B2AE3D27D4EB4F)


def _mix64(x: np.ndarray) -> np.ndarray:
    z = x + _MIX1
    z ^= z >> np.uint64(30)
    z *= _MIX2
    z ^= z >> np.uint64(27)
    z *= _MIX3
    z ^= z >> np.uint64(31)
    return z


class BloomFilter:
    """Standard bloom filter sized for a target false-positive rate.

    bit_count = ceil(-n ln p / (ln 2)^2), hash_count = round(bit_count/n *
    ln 2); double hashing over a 64-bit integer mix. Never false-negative.
    """

    def __init__(self, distinct_count: int, p: float):
        n = max(1, distinct_count)
        self.bit_count = max(8, int(math.ceil(-n * math.log(p) / (_LN2 ** 2))))
        self.hash_count = max(1, round(self.bit_count / n * _LN2))
        self._words = np.zeros((self.bit_count + 63) // 64, dtype=np.uint64)
        self._m = np.uint64(self.bit_count)

    @property
    def size_bytes(self) -> int:
        return (self.bit_count + 7) // 8

    def _hashes(self, codes: np.ndarray):
        x = codes.astype(np.uint64)
        h1 = _mix64(x)
        h2 = _mix64(x ^ _SEED2) | np.uint64(1)
        return h1, h2

    def add_many(self, codes: np.ndarray):
        if len(codes) == 0:
            return
        h1, h2 = self._hashes(codes)
        for i in range(self.hash_count):
            idx = (h1 + np.uint64(i) * h2) % self._m
            np.bitwise_or.at(self._words, idx >> np.uint64(6),
                             np.uint64(1) << (idx & np.uint64(63)))

    def contains_many(self, codes: np.ndarray) -> np.ndarray:
        if len(codes) == 0:
            return np.zeros(0, dtype=bool)
        h1, h2 = self._hashes(codes)
        out = np.ones(len(codes), dtype=bool)
        for i in range(self.hash_count):
            idx = (h1 + np.uint64(i) * h2) % self._m
            bit = (self._words[idx >> np.uint64(6)]
                   >> (idx & np.uint64(63))) & np.uint64(1)
            out &= bit.astype(bool)
        return out

    def contains(self, code: int) -> bool:
        return bool(self.contains_many(np.array([code], dtype=np.uint64))[0])


@dataclass
class Fragment:
    id: int
    start: int
    end: int
    synopsis: BloomFilter

    @property
    def size(self) -> int:
        return self.end - self.start


class TransitionGraphIndex:
    """Fragments, their synopses and the fragment transition adjacency."""

    def __init__(self, fragments, neighbors, direction, size_policy, p,
                 edge_count):
        self.fragments = fragments
        self.neighbors = neighbors          # list of np.ndarray fragment ids
        self.direction = direction
        self.size_policy = size_policy
        self.false_positive_rate = p
        self.edge_count = edge_count
        self._build_arena()

    def _build_arena(self):
        """Concatenate all synopses into one word array so that many
        (fragment, code) membership probes run as one vectorized lookup."""
        f = len(self.fragments)
        self._syn_base = np.empty(f, dtype=np.uint64)   # bit offset (aligned)
        self._syn_m = np.empty(f, dtype=np.uint64)
        self._syn_k = np.empty(f, dtype=np.int64)
        words = []
        base = 0
        for i, frag in enumerate(self.fragments):
            syn = frag.synopsis
            self._syn_base[i] = base
            self._syn_m[i] = syn.bit_count
            self._syn_k[i] = syn.hash_count
            words.append(syn._words)
            base += len(syn._words) * 64
        self._syn_words = (np.concatenate(words) if words
                           else np.zeros(0, dtype=np.uint64))

    def probe_pairs(self, fids: np.ndarray, codes: np.ndarray):
        """Return (fragment id, code) pairs whose synopsis reports the code.

        Probes every candidate synopsis with every code in blocks; false
        positives are possible, false negatives are not.
        """
        fids = np.asarray(fids, dtype=np.int64)
        if len(fids) == 0 or len(codes) == 0:
            return (np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64))
        x = codes.astype(np.uint64)
        h1 = _mix64(x)
        h2 = _mix64(x ^ _SEED2) | np.uint64(1)
        nv = len(codes)
        block = max(1, 2_000_000 // nv)
        out_f, out_v = [], []
        for lo in range(0, len(fids), block):
            chunk = fids[lo:lo + block]
            m = self._syn_m[chunk][:, None]
            base = self._syn_base[chunk][:, None]
            kk = self._syn_k[chunk]
            hit = np.ones((len(chunk), nv), dtype=bool)
            for i in range(int(kk.max())):
                idx = (h1[None, :] + np.uint64(i) * h2[None, :]) % m + base
                bit = (self._syn_words[(idx >> np.uint64(6)).astype(np.int64)]
                       >> (idx & np.uint64(63))) & np.uint64(1)
                if (kk <= i).any():
                    hit &= bit.astype(bool) | (kk <= i)[:, None]
                else:
                    hit &= bit.astype(bool)
            fi_idx, v_idx = np.nonzero(hit)
            out_f.append(chunk[fi_idx])
            out_v.append(codes[v_idx])
        return np.concatenate(out_f), np.concatenate(out_v)

    @property
    def fragment_count(self) -> int:
        return len(self.fragments)

    @property
    def transition_count(self) -> int:
        return int(sum(len(n) for n in self.neighbors))

    def accounted_bytes(self) -> dict:
        """Memory accounting model for the index.

        Transitions are priced at the cheaper of a 4-byte-per-entry
        adjacency list and a dense fragment-pair bitmap; fragment ranges at
        16 bytes each. Edge columns are priced as two 4-byte code columns.
        """
        f = self.fragment_count
        synopsis = sum(frag.synopsis.size_bytes for frag in self.fragments)
        adjacency_list = 4 * self.transition_count
        bitmap = (f * f + 7) // 8
        transitions = min(adjacency_list, bitmap) if f else 0
        meta = 16 * f
        total = synopsis + transitions + meta
        edge_columns = 8 * self.edge_count
        return {
            "total_synopsis_bytes": synopsis,
            "transition_bytes": transitions,
            "fragment_meta_bytes": meta,
            "tgi_bytes": total,
            "edge_column_bytes": edge_columns,
        }

    def report(self) -> dict:
        acc = self.accounted_bytes()
        edge_bytes = acc["edge_column_bytes"]
        policy, value = self.size_policy
        return {
            "fragment_count": self.fragment_count,
            "size_policy": f"{policy}:{value}",
            "p": self.false_positive_rate,
            "total_synopsis_bytes": acc["total_synopsis_bytes"],
            "total_transition_count": self.transition_count,
            "tgi_bytes": acc["tgi_bytes"],
            "bytes_ratio_vs_edge_columns":
                acc["tgi_bytes"] / edge_bytes if edge_bytes else 0.0,
        }


def _fragment_bounds(g: EdgeColumnGroup, src: np.ndarray, size_policy):
    policy, value = size_policy
    n = len(src)
    if policy == "fixed":
        xi = int(value)
        if xi < 1:
            raise ValueError("fragment size must be >= 1")
        starts = list(range(0, n, xi))
        return [(s, min(s + xi, n)) for s in starts]
    if policy == "adaptive":
        if g.layout != TYPE_EDGE_CLUSTERED:
            raise ClusteringError(
                "degree-adaptive fragments require an edge-clustered group")
        xi_min = int(value)
        if xi_min < 1:
            raise ValueError("minimum fragment size must be >= 1")
        if n == 0:
            return []
        # cut only where the source code (or type range) changes
        change = np.flatnonzero(np.diff(src)) + 1
        range_starts = np.array(
            sorted(s for s, _ in g.type_ranges.values()), dtype=np.int64)
        group_starts = np.unique(np.concatenate(
            ([0], change, range_starts[range_starts < n])))
        bounds = []
        frag_start = 0
        for gs in group_starts[1:]:
            if gs - frag_start >= xi_min:
                bounds.append((frag_start, int(gs)))
                frag_start = int(gs)
        bounds.append((frag_start, n))
        return bounds
    raise ValueError(f"unknown size policy {policy!r}")


def _transitions(src, tgt, frag_of_pos, fragment_count):
    """Exact fragment transitions by joining targets against source sets."""
    if len(src) == 0 or fragment_count == 0:
        return [np.empty(0, dtype=np.int64) for _ in range(fragment_count)]
    # distinct (target code, fragment of edge) on the left
    left = np.unique(tgt.astype(np.int64) * fragment_count + frag_of_pos)
    left_code = left // fragment_count
    left_frag = left % fragment_count
    # distinct (source code, fragment of position) on the right, code-sorted
    right = np.unique(src.astype(np.int64) * fragment_count + frag_of_pos)
    right_code = right // fragment_count
    right_frag = right % fragment_count

    lo = np.searchsorted(right_code, left_code, side="left")
    hi = np.searchsorted(right_code, left_code, side="right")
    counts = hi - lo
    total = int(counts.sum())
    if total == 0:
        return [np.empty(0, dtype=np.int64) for _ in range(fragment_count)]
    csum = np.cumsum(counts)
    gather = (np.arange(total, dtype=np.int64)
              - np.repeat(csum - counts, counts) + np.repeat(lo, counts))
    pairs = np.unique(np.repeat(left_frag, counts) * fragment_count
                      + right_frag[gather])
    from_frag = pairs // fragment_count
    to_frag = pairs % fragment_count
    neighbors = []
    splits = np.searchsorted(from_frag, np.arange(fragment_count + 1))
    for f in range(fragment_count):
        neighbors.append(to_frag[splits[f]:splits[f + 1]].copy())
    return neighbors


def build_tgi(g: EdgeColumnGroup, size_policy, p: float,
              direction: str = "forward") -> TransitionGraphIndex:
    """Build fragments, per-fragment synopses and exact transitions.

    size_policy is ("fixed", xi) or ("adaptive", xi_min); the adaptive
    policy cuts only between source-code groups and therefore requires an
    edge-clustered layout.
    """
    if not 0 < p < 1:
        raise ValueError("false positive rate must be in (0, 1)")
    src, tgt = g.oriented(direction)
    bounds = _fragment_bounds(g, src, size_policy)
    fragments = []
    frag_of_pos = np.empty(len(src), dtype=np.int64)
    for fid, (s, e) in enumerate(bounds):
        distinct = np.unique(src[s:e])
        synopsis = BloomFilter(len(distinct), p)
        synopsis.add_many(distinct)
        fragments.append(Fragment(fid, s, e, synopsis))
        frag_of_pos[s:e] = fid
    neighbors = _transitions(src, tgt, frag_of_pos, len(fragments))
    return TransitionGraphIndex(fragments, neighbors, direction, size_policy,
                                p, g.edge_count)


@dataclass
class FiRuntimeState:
    """Per-query mutable state of one FI execution."""

    level_array: np.ndarray                      # code -> min level, -1 unseen
    frontiers: set = field(default_factory=set)  # codes found since last pick
    chain: list = field(default_factory=list)    # processed fragment ids
    queued: set = field(default_factory=set)
    priority: dict = field(default_factory=dict)
    heap: list = field(default_factory=list)
    invalidated: dict = field(default_factory=dict)  # code -> set of frag ids
    consumed: dict = field(default_factory=dict)     # code -> [edge positions]
    s_factor: int = 1
    m_factor: int = 1

    def levels(self) -> LevelMap:
        found = np.flatnonzero(self.level_array >= 0)
        return LevelMap({int(v): int(self.level_array[v]) for v in found})


def _bump(state: FiRuntimeState, tgi: TransitionGraphIndex, fid: int):
    """Insert-or-increase a fragment's queue priority (lazy heap entries)."""
    if fid in state.queued:
        state.priority[fid] += 1
    else:
        state.queued.add(fid)
        state.priority[fid] = 1
    heapq.heappush(state.heap,
                   (-state.priority[fid], tgi.fragments[fid].start, fid))


def _probe(state: FiRuntimeState, tgi: TransitionGraphIndex,
           candidates, codes: np.ndarray):
    """Probe candidate synopses with codes; queue unrecorded matches."""
    pair_f, pair_v = tgi.probe_pairs(candidates, codes)
    for fid, v in zip(pair_f.tolist(), pair_v.tolist()):
        seen = state.invalidated.setdefault(v, set())
        if fid not in seen:
            seen.add(fid)
            _bump(state, tgi, fid)


def get_next_fragment(state: FiRuntimeState,
                      tgi: TransitionGraphIndex) -> Fragment | None:
    """Queue candidates reached by current frontiers, then pop the best.

    Highest accumulated match count wins; ties break to the lower start
    position. Returns None once the queue is exhausted.
    """
    if state.chain and state.frontiers:
        last = state.chain[-1]
        codes = np.fromiter(state.frontiers, dtype=np.int64,
                            count=len(state.frontiers))
        _probe(state, tgi, tgi.neighbors[last], codes)
    state.frontiers.clear()

    while state.heap:
        neg_prio, _, fid = heapq.heappop(state.heap)
        if fid in state.queued and -neg_prio == state.priority[fid]:
            state.queued.remove(fid)
            del state.priority[fid]
            state.chain.append(fid)
            return tgi.fragments[fid]
    return None


def n_way_scan(g: EdgeColumnGroup, frag: Fragment, state: FiRuntimeState,
               ea: ActiveEdgeList, counters: Counters, r: float,
               direction: str) -> dict:
    """Scan one fragment against all working sets at once.

    An active position matches when its source already carries a level
    below s_factor and the discovery would stay within the recursion
    boundary. Matches are invalidated and grouped per discovery level.
    """
    src, _ = g.oriented(direction)
    s, e = frag.start, frag.end
    counters.edges_read += e - s
    srcs = src[s:e]
    lev = state.level_array[srcs]
    match = ea.bits[s:e] & (lev >= 0) & (lev < state.s_factor)
    if r != math.inf:
        match &= lev + 1 <= r
    local = np.flatnonzero(match)
    if len(local) == 0:
        return {}
    positions = local + s
    ea.bits[positions] = False
    matched_src = srcs[local]
    for code, pos in zip(matched_src.tolist(), positions.tolist()):
        state.consumed.setdefault(code, []).append(pos)
    matched_lev = lev[local] + 1
    lists = {}
    for level in np.unique(matched_lev):
        lists[int(level)] = positions[matched_lev == level]
    return lists


def n_way_materialize(g: EdgeColumnGroup, lists: dict, state: FiRuntimeState,
                      ea: ActiveEdgeList, direction: str):
    """Record discovered targets, repairing non-minimal levels.

    A vertex whose level improves is re-frontiered, its synopsis
    invalidations are forgotten and its consumed outgoing edges are
    re-activated so shorter-path consequences are replayed.
    """
    _, tgt = g.oriented(direction)
    for level in sorted(lists):
        codes = np.unique(tgt[lists[level]])
        cur = state.level_array[codes]
        fresh = codes[cur < 0]
        state.level_array[fresh] = level
        state.frontiers.update(fresh.tolist())
        for v in codes[cur > level].tolist():  # non-minimal: repair
            state.level_array[v] = level
            state.frontiers.add(v)
            stale = state.consumed.pop(v, None)
            if stale:
                ea.bits[stale] = True
            state.invalidated.pop(v, None)


def fi_traverse(pc: PreparedConfig, g: EdgeColumnGroup,
                tgi: TransitionGraphIndex, counters: Counters) -> LevelMap:
    """Run the fragment-at-a-time traversal to queue exhaustion."""
    if tgi.direction != pc.direction:
        raise ConfigurationError(
            f"transition graph index was built for {tgi.direction} traversal")
    nv = len(g.vertex_dictionary)
    state = FiRuntimeState(level_array=np.full(nv, -1, dtype=np.int64))
    state.level_array[pc.encoded_starts] = 0

    # The candidate-selection procedure probes neighbors of the chain's
    # last fragment, but the chain starts empty: seed by probing every
    # fragment's synopsis with the encoded start set.
    if len(pc.encoded_starts):
        _probe(state, tgi, range(tgi.fragment_count), pc.encoded_starts)

    ea = pc.active_edges
    r = pc.recursion_boundary
    while True:
        frag = get_next_fragment(state, tgi)
        if frag is None:
            break
        counters.fragments_read += 1
        lists = n_way_scan(g, frag, state, ea, counters, r, pc.direction)
        n_way_materialize(g, lists, state, ea, pc.direction)
        if state.s_factor <= r:
            state.s_factor += 1
        if state.m_factor < r:
            state.m_factor += 1
    return state.levels()
