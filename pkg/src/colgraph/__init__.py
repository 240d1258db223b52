"""In-memory columnar graph traversal engine.

Two traversal operators over dictionary-encoded edge column groups: a
level-synchronous full-scan operator and a fragmented-incremental operator
scheduled through a bloom-filter transition graph index, with a cost-based
controller choosing between them.
"""

from .engine import (
    CostParams,
    ExecutionReport,
    TraversalConfig,
    cost_fi,
    cost_ls,
    oracle_traverse,
    prepare,
    traverse,
)
from .fi import BloomFilter, TransitionGraphIndex, build_tgi
from .predicate import ActiveEdgeList, Predicate, evaluate, parse
from .storage import (
    EdgeColumnGroup,
    GraphStats,
    VertexColumnGroup,
    build_graph,
    cluster_by_edge,
    cluster_by_type,
    compute_stats,
    load_tsv,
)

__all__ = [
    "ActiveEdgeList",
    "BloomFilter",
    "CostParams",
    "EdgeColumnGroup",
    "ExecutionReport",
    "GraphStats",
    "Predicate",
    "TransitionGraphIndex",
    "TraversalConfig",
    "VertexColumnGroup",
    "build_graph",
    "build_tgi",
    "cluster_by_edge",
    "cluster_by_type",
    "compute_stats",
    "cost_fi",
    "cost_ls",
    "evaluate",
    "load_tsv",
    "oracle_traverse",
    "parse",
    "prepare",
    "traverse",
]

__version__ = "0.1.0"
