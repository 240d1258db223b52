"""Traversal semantics and orchestration.

Holds the traversal configuration, the three-phase pipeline
(prepare / traverse / decode), the set-algebra reference oracle, the
per-operator cost models and the controller that picks between the
level-synchronous and fragmented-incremental operators.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .predicate import ActiveEdgeList, Predicate, evaluate
from .storage import Dictionary, EdgeColumnGroup, GraphStats

INF = math.inf

FORWARD = "forward"
BACKWARD = "backward"

OP_LS = "ls"
OP_FI = "fi"
OP_ORACLE = "oracle"


@dataclass
class TraversalConfig:
    """The query tuple: start set, edge predicate, collection boundary c,
    recursion boundary r (may be math.inf) and direction."""

    start_vertices: set
    predicate: Predicate
    collection_boundary: int
    recursion_boundary: float
    direction: str = FORWARD

    def __post_init__(self):
        c, r = self.collection_boundary, self.recursion_boundary
        if c < 0:
            raise ConfigurationError("collection boundary must be >= 0")
        if c > r:
            raise ConfigurationError(
                f"collection boundary {c} exceeds recursion boundary {r}")
        if self.direction not in (FORWARD, BACKWARD):
            raise ConfigurationError(f"unknown direction {self.direction!r}")


@dataclass
class PreparedConfig:
    encoded_starts: np.ndarray       # sorted vertex codes
    active_edges: ActiveEdgeList
    collection_boundary: int
    recursion_boundary: float
    direction: str


@dataclass
class LevelMap:
    """Smallest discovery level per vertex code; level 0 = start vertices."""

    min_level: dict = field(default_factory=dict)

    def record(self, code: int, level: int):
        cur = self.min_level.get(code)
        if cur is None or level < cur:
            self.min_level[code] = level


@dataclass
class CostParams:
    edge_read_cost: float = 1.0
    false_positive_rate: float = 0.01
    fragment_size: int = 64

    def __post_init__(self):
        if not 0 < self.false_positive_rate < 1:
            raise ValueError("false_positive_rate must be in (0, 1)")
        if self.fragment_size < 1:
            raise ValueError("fragment_size must be >= 1")
        if self.edge_read_cost <= 0:
            raise ValueError("edge_read_cost must be > 0")


@dataclass
class Counters:
    edges_read: int = 0
    fragments_read: int = 0


@dataclass
class ExecutionReport:
    operator: str
    phase_times_us: dict
    edges_read: int
    fragments_read: int
    result_size: int
    cost_predicted: float

    def to_json(self) -> str:
        return json.dumps({
            "operator": self.operator,
            "phase_times_us": self.phase_times_us,
            "edges_read": self.edges_read,
            "fragments_read": self.fragments_read,
            "result_size": self.result_size,
            "cost_predicted": self.cost_predicted,
        })


def prepare(cfg: TraversalConfig, g: EdgeColumnGroup) -> PreparedConfig:
    """Encode start vertices and push the edge predicate down to a bitset."""
    vdict = g.vertex_dictionary
    codes = []
    for vid in cfg.start_vertices:
        if vid not in vdict:
            raise ConfigurationError(f"unknown start vertex {vid!r}")
        codes.append(vdict.encode(vid))
    starts = np.array(sorted(codes), dtype=np.int64)
    active = evaluate(cfg.predicate, g)
    return PreparedConfig(starts, active, cfg.collection_boundary,
                          cfg.recursion_boundary, cfg.direction)


def oracle_traverse(pc: PreparedConfig, g: EdgeColumnGroup) -> set:
    """Reference semantics by naive per-level set expansion.

    Each level re-enumerates every active edge (no invalidation). Returns
    the union of levels c..r minus the union of levels 0..c-1, stopping
    when a level adds no vertex never seen before (safe: a stale level can
    only generate already-seen vertices afterwards).
    """
    src, tgt = g.oriented(pc.direction)
    active = pc.active_edges.bits
    nv = len(g.vertex_dictionary)
    c, r = pc.collection_boundary, pc.recursion_boundary

    current = set(int(x) for x in pc.encoded_starts)
    seen = set(current)
    target_union = set(current) if c == 0 else set()
    visited_union = set(current) if c > 0 else set()

    level = 0
    while level < r and current:
        member = np.zeros(nv, dtype=bool)
        member[list(current)] = True
        nxt = set(np.unique(tgt[active & member[src]]).tolist())
        level += 1
        if level >= c:
            target_union |= nxt
        else:
            visited_union |= nxt
        new = nxt - seen
        seen |= new
        if not new:
            break
        current = nxt
    return target_union - visited_union


def generate_result(levels: LevelMap, c: int, r: float) -> set:
    """Vertices whose minimal discovery level lies within [c, r].

    Equal to the union-minus-visited result set: a vertex appears in the
    level it was first discovered at, and in no earlier one.
    """
    return {v for v, lvl in levels.min_level.items() if c <= lvl <= r}


def decode(result: set, dictionary: Dictionary) -> set:
    return {dictionary.decode(code) for code in result}


def cost_ls(r: float, stats: GraphStats, cp: CostParams) -> float:
    """Level-synchronous cost: min(r, est_diameter) full-column scans."""
    depth = min(r, stats.est_diameter)
    return depth * stats.edge_count * cp.edge_read_cost


def cost_fi(r: float, stats: GraphStats, cp: CostParams) -> float:
    """Fragmented-incremental cost: per-level expected fragment reads.

    Sum over levels i = 0..floor(min(r, est_diameter)) of
    (1 + p) * avg_outdegree^i * fragment_size * edge_read_cost.
    """
    depth = int(min(r, stats.est_diameter))
    p = cp.false_positive_rate
    total = 0.0
    for i in range(depth + 1):
        total += (1 + p) * stats.avg_outdegree ** i
    return total * cp.fragment_size * cp.edge_read_cost


def choose_operator(r: float, stats: GraphStats, cp: CostParams) -> str:
    """Pick the cheaper operator; LS wins ties (the robust default)."""
    return OP_LS if cost_ls(r, stats, cp) <= cost_fi(r, stats, cp) else OP_FI


def traverse(cfg: TraversalConfig, g: EdgeColumnGroup,
             stats: GraphStats | None = None,
             cost_params: CostParams | None = None,
             operator_override: str | None = None,
             tgi=None, partitioning=None):
    """Full pipeline: prepare, operator execution, result generation, decode.

    Returns (set of vertex ids, ExecutionReport). The controller picks the
    cost-minimal operator unless operator_override is given. A transition
    graph index is built on demand when the FI operator runs without one.
    """
    from . import fi, ls  # local import: operators depend on engine types

    cp = cost_params or CostParams()

    t0 = time.perf_counter_ns()
    pc = prepare(cfg, g)
    t1 = time.perf_counter_ns()

    if operator_override is not None:
        operator = operator_override
    else:
        if stats is None:
            raise ConfigurationError(
                "operator selection requires graph stats; pass stats or an "
                "operator_override")
        operator = choose_operator(cfg.recursion_boundary, stats, cp)

    counters = Counters()
    if operator == OP_ORACLE:
        result_codes = oracle_traverse(pc, g)
        cost = float("nan")
    elif operator == OP_LS:
        part = partitioning or ls.ScanPartitioning.equal(1, g.edge_count)
        levels = ls.ls_traverse(pc, g, part, counters)
        result_codes = generate_result(levels, pc.collection_boundary,
                                       pc.recursion_boundary)
        cost = (cost_ls(cfg.recursion_boundary, stats, cp)
                if stats is not None else float("nan"))
    elif operator == OP_FI:
        if tgi is None:
            tgi = fi.build_tgi(g, ("fixed", cp.fragment_size),
                               cp.false_positive_rate,
                               direction=cfg.direction)
        levels = fi.fi_traverse(pc, g, tgi, counters)
        result_codes = generate_result(levels, pc.collection_boundary,
                                       pc.recursion_boundary)
        cost = (cost_fi(cfg.recursion_boundary, stats, cp)
                if stats is not None else float("nan"))
    else:
        raise ConfigurationError(f"unknown operator {operator!r}")
    t2 = time.perf_counter_ns()

    result = decode(result_codes, g.vertex_dictionary)
    t3 = time.perf_counter_ns()

    report = ExecutionReport(
        operator=operator,
        phase_times_us={
            "prepare": (t1 - t0) / 1000.0,
            "traverse": (t2 - t1) / 1000.0,
            "decode": (t3 - t2) / 1000.0,
        },
        edges_read=counters.edges_read,
        fragments_read=counters.fragments_read,
        result_size=len(result),
        cost_predicted=cost,
    )
    return result, report
