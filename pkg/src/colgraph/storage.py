"""Columnar property-graph storage.

Vertices and edges live in two column groups. Every column is
dictionary-encoded: the column stores dense integer value codes, the
dictionary maps codes back to the original string values. Source and target
columns of the edge group share a single vertex dictionary so that a code
denotes the same vertex in both columns.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ClusteringError, GraphBuildError, ParseError

UNCLUSTERED = "unclustered"
TYPE_CLUSTERED = "type-clustered"
TYPE_EDGE_CLUSTERED = "type-then-edge-clustered"


class Dictionary:
    """Sorted, duplicate-free value dictionary with dense codes 0..n-1."""

    def __init__(self, values):
        self.values = sorted(set(values))
        self._index = {v: i for i, v in enumerate(self.values)}

    def __len__(self):
        return len(self.values)

    def encode(self, value: str) -> int:
        return self._index[value]

    def decode(self, code: int) -> str:
        return self.values[code]

    def __contains__(self, value: str) -> bool:
        return value in self._index

    def encode_array(self, values) -> np.ndarray:
        return np.fromiter((self._index[v] for v in values), dtype=np.int32,
                           count=len(values))


@dataclass
class Column:
    """One attribute column: codes plus an optional presence bitmap.

    Positions where ``present`` is False hold code -1 and decode to null.
    A ``present`` of None means the column has no nulls.
    """

    codes: np.ndarray
    dictionary: Dictionary
    present: np.ndarray | None = None

    def __len__(self):
        return len(self.codes)

    def present_mask(self) -> np.ndarray:
        if self.present is None:
            return np.ones(len(self.codes), dtype=bool)
        return self.present

    def take(self, order: np.ndarray) -> "Column":
        present = None if self.present is None else self.present[order]
        return Column(self.codes[order], self.dictionary, present)


@dataclass
class VertexColumnGroup:
    ids: Column                      # mandatory, unique, no nulls
    attributes: dict = field(default_factory=dict)

    @property
    def vertex_count(self) -> int:
        return len(self.ids)

    @property
    def dictionary(self) -> Dictionary:
        return self.ids.dictionary


@dataclass
class EdgeColumnGroup:
    source: np.ndarray               # vertex codes
    target: np.ndarray               # vertex codes
    vertex_dictionary: Dictionary    # shared by source and target
    attributes: dict = field(default_factory=dict)
    layout: str = UNCLUSTERED
    type_ranges: dict | None = None  # type code -> (start, end), iff type-clustered

    @property
    def edge_count(self) -> int:
        return len(self.source)

    def oriented(self, direction: str):
        """Source/target views for the given traversal direction."""
        if direction == "backward":
            return self.target, self.source
        return self.source, self.target

    def records(self):
        """Edge records as comparable tuples (for multiset checks)."""
        attr_names = sorted(self.attributes)
        out = []
        for i in range(self.edge_count):
            attrs = []
            for name in attr_names:
                col = self.attributes[name]
                if col.present is not None and not col.present[i]:
                    attrs.append(None)
                else:
                    attrs.append(col.dictionary.decode(int(col.codes[i])))
            out.append((int(self.source[i]), int(self.target[i]), tuple(attrs)))
        return out


@dataclass
class GraphStats:
    vertex_count: int
    edge_count: int
    avg_outdegree: float
    max_outdegree: int
    est_diameter: float


def _build_attr_columns(rows: list, n: int) -> dict:
    """rows: list of attr dicts (str -> str), one per record."""
    names = set()
    for attrs in rows:
        names.update(attrs)
    columns = {}
    for name in sorted(names):
        values = [attrs.get(name) for attrs in rows]
        dictionary = Dictionary([v for v in values if v is not None])
        codes = np.full(n, -1, dtype=np.int32)
        present = np.zeros(n, dtype=bool)
        for i, v in enumerate(values):
            if v is not None:
                codes[i] = dictionary.encode(v)
                present[i] = True
        columns[name] = Column(codes, dictionary,
                               None if present.all() else present)
    return columns


def build_graph(vertices, edges):
    """Build vertex and edge column groups from raw records.

    ``vertices`` is a list of (id, attrs) pairs, ``edges`` a list of
    (src_id, dst_id, attrs) triples; attrs are str->str dicts. Record order
    is preserved (unclustered layout).
    """
    seen = set()
    for vid, _ in vertices:
        if vid in seen:
            raise GraphBuildError(f"duplicate vertex id {vid!r}")
        seen.add(vid)
    for src, dst, _ in edges:
        if src not in seen:
            raise GraphBuildError(f"edge references unknown vertex {src!r}")
        if dst not in seen:
            raise GraphBuildError(f"edge references unknown vertex {dst!r}")

    vertex_dict = Dictionary([vid for vid, _ in vertices])
    id_codes = vertex_dict.encode_array([vid for vid, _ in vertices])
    vgroup = VertexColumnGroup(
        ids=Column(id_codes, vertex_dict),
        attributes=_build_attr_columns([a for _, a in vertices], len(vertices)),
    )

    source = vertex_dict.encode_array([src for src, _, _ in edges])
    target = vertex_dict.encode_array([dst for _, dst, _ in edges])
    egroup = EdgeColumnGroup(
        source=source,
        target=target,
        vertex_dictionary=vertex_dict,
        attributes=_build_attr_columns([a for _, _, a in edges], len(edges)),
    )
    return vgroup, egroup


def _permute(g: EdgeColumnGroup, order: np.ndarray, layout: str,
             type_ranges: dict | None) -> EdgeColumnGroup:
    return EdgeColumnGroup(
        source=g.source[order],
        target=g.target[order],
        vertex_dictionary=g.vertex_dictionary,
        attributes={name: col.take(order) for name, col in g.attributes.items()},
        layout=layout,
        type_ranges=type_ranges,
    )


def cluster_by_type(g: EdgeColumnGroup) -> EdgeColumnGroup:
    """Stable permutation grouping edges by type code; fills type_ranges."""
    if g.edge_count == 0:
        return _permute(g, np.empty(0, dtype=np.int64), TYPE_CLUSTERED, {})
    if "type" not in g.attributes:
        raise ClusteringError("edge group has no 'type' attribute column")
    type_col = g.attributes["type"]
    if type_col.present is not None and not type_col.present.all():
        raise ClusteringError("'type' column contains nulls")
    order = np.argsort(type_col.codes, kind="stable")
    sorted_types = type_col.codes[order]
    ranges = {}
    if len(sorted_types):
        boundaries = np.flatnonzero(np.diff(sorted_types)) + 1
        starts = np.concatenate(([0], boundaries))
        ends = np.concatenate((boundaries, [len(sorted_types)]))
        for s, e in zip(starts, ends):
            ranges[int(sorted_types[s])] = (int(s), int(e))
    return _permute(g, order, TYPE_CLUSTERED, ranges)


def cluster_by_edge(g: EdgeColumnGroup) -> EdgeColumnGroup:
    """Within each type range, stably sort edges by source code."""
    if g.layout == TYPE_EDGE_CLUSTERED:
        return replace(g)
    if g.layout != TYPE_CLUSTERED or g.type_ranges is None:
        raise ClusteringError(
            "edge clustering requires a type-clustered group; "
            "run cluster_by_type first")
    order = np.arange(g.edge_count, dtype=np.int64)
    for start, end in g.type_ranges.values():
        local = np.argsort(g.source[start:end], kind="stable")
        order[start:end] = start + local
    return _permute(g, order, TYPE_EDGE_CLUSTERED, dict(g.type_ranges))


def out_adjacency(source: np.ndarray, target: np.ndarray, vertex_count: int):
    """CSR adjacency (indptr, neighbors) over the given edge columns."""
    order = np.argsort(source, kind="stable")
    neighbors = target[order]
    counts = np.bincount(source, minlength=vertex_count)
    indptr = np.concatenate(([0], np.cumsum(counts)))
    return indptr, neighbors


def bfs_levels(indptr: np.ndarray, neighbors: np.ndarray, start: int,
               vertex_count: int) -> np.ndarray:
    """Hop distance from ``start`` over the adjacency; -1 for unreachable."""
    dist = np.full(vertex_count, -1, dtype=np.int64)
    dist[start] = 0
    frontier = deque([start])
    while frontier:
        u = frontier.popleft()
        for v in neighbors[indptr[u]:indptr[u + 1]]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                frontier.append(int(v))
    return dist


def compute_stats(g: EdgeColumnGroup, v: VertexColumnGroup,
                  sample_size: int = 64, seed: int = 0) -> GraphStats:
    """Exact counts and degrees plus a sampled effective diameter.

    est_diameter is the 90th-percentile of BFS eccentricities over
    min(sample_size, |V|) uniformly sampled source vertices. The upper
    ('higher') percentile method is used so that exact small-graph cases
    (paths, stars) report their true diameter.
    """
    if sample_size < 1:
        raise ValueError("sample_size must be >= 1")
    nv = v.vertex_count
    ne = g.edge_count
    if nv == 0:
        return GraphStats(0, 0, 0.0, 0, 0.0)
    outdeg = np.bincount(g.source, minlength=nv)
    max_out = int(outdeg.max()) if ne else 0
    if ne == 0:
        return GraphStats(nv, 0, 0.0, 0, 0.0)

    indptr, neighbors = out_adjacency(g.source, g.target, nv)
    rng = np.random.default_rng(seed)
    k = min(sample_size, nv)
    sources = rng.choice(nv, size=k, replace=False) if k < nv else np.arange(nv)
    eccs = np.empty(k, dtype=np.int64)
    for i, s in enumerate(sources):
        dist = bfs_levels(indptr, neighbors, int(s), nv)
        eccs[i] = dist.max()
    est = float(np.percentile(eccs, 90, method="higher"))
    return GraphStats(nv, ne, ne / nv, max_out, est)


def _parse_attrs(fields, lineno):
    attrs = {}
    for f in fields:
        if "=" not in f:
            raise ParseError(f"expected key=value, got {f!r}", lineno)
        key, _, value = f.partition("=")
        if not key:
            raise ParseError(f"empty attribute key in {f!r}", lineno)
        attrs[key] = value
    return attrs


def load_tsv(edge_path, vertex_path=None):
    """Load a graph from the TSV ingestion format.

    Edge lines: ``source_id <TAB> target_id <TAB> type [<TAB> key=value]*``.
    Optional vertex file lines: ``id [<TAB> key=value]*``. Lines starting
    with '#' are comments. Vertices are implied by edge endpoints unless a
    vertex file is given.
    """
    edges = []
    with open(edge_path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) < 3:
                raise ParseError(
                    "edge line needs source, target and type columns", lineno)
            src, dst, etype = fields[0], fields[1], fields[2]
            if not src or not dst or not etype:
                raise ParseError("empty source/target/type field", lineno)
            attrs = _parse_attrs(fields[3:], lineno)
            attrs["type"] = etype
            edges.append((src, dst, attrs))

    if vertex_path is not None:
        vertices = []
        with open(vertex_path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                fields = line.split("\t")
                vertices.append((fields[0], _parse_attrs(fields[1:], lineno)))
    else:
        ids = sorted({e[0] for e in edges} | {e[1] for e in edges})
        vertices = [(vid, {}) for vid in ids]
    return build_graph(vertices, edges)


def save_tsv(g: EdgeColumnGroup, path):
    """Write the edge group back out in ingestion format, preserving order."""
    attr_names = [n for n in sorted(g.attributes) if n != "type"]
    dec = g.vertex_dictionary.decode
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(g.edge_count):
            type_col = g.attributes["type"]
            parts = [dec(int(g.source[i])), dec(int(g.target[i])),
                     type_col.dictionary.decode(int(type_col.codes[i]))]
            for name in attr_names:
                col = g.attributes[name]
                if col.present is None or col.present[i]:
                    parts.append(f"{name}={col.dictionary.decode(int(col.codes[i]))}")
            fh.write("\t".join(parts) + "\n")
