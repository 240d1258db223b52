"""Synthetic graph generators for the benchmark harness.

All generators are deterministic under a seed and emit (vertices, edges)
lists in the shape build_graph expects. Vertex ids are zero-padded so the
lexicographic dictionary order matches the generation order.
"""

from __future__ import annotations

import string

import numpy as np

from .storage import build_graph

TYPE_LETTERS = string.ascii_lowercase


def _vid(i: int) -> str:
    return f"v{i:07d}"


def _edge_attrs(rng, count, type_count, weight_zipf_s, weight_max):
    types = (["a"] * count if type_count <= 1 else
             [TYPE_LETTERS[t] for t in rng.integers(0, type_count, count)])
    weights = None
    if weight_zipf_s is not None:
        weights = np.clip(rng.zipf(weight_zipf_s, count), 1, weight_max)
    attrs = []
    for i in range(count):
        a = {"type": types[i]}
        if weights is not None:
            a["weight"] = str(int(weights[i]))
        attrs.append(a)
    return attrs


def path(n: int, seed: int = 0, **attr_opts):
    """Directed path v0 -> v1 -> ... -> v(n-1)."""
    if n < 1:
        raise ValueError("path needs at least one vertex")
    rng = np.random.default_rng(seed)
    vertices = [(_vid(i), {}) for i in range(n)]
    pairs = [(_vid(i), _vid(i + 1)) for i in range(n - 1)]
    return vertices, _attach(rng, pairs, attr_opts)


def star(n: int, seed: int = 0, **attr_opts):
    """Center v0 with n outward spokes."""
    if n < 1:
        raise ValueError("star needs at least one leaf")
    rng = np.random.default_rng(seed)
    vertices = [(_vid(i), {}) for i in range(n + 1)]
    pairs = [(_vid(0), _vid(i)) for i in range(1, n + 1)]
    return vertices, _attach(rng, pairs, attr_opts)


def grid(w: int, h: int, seed: int = 0, **attr_opts):
    """4-neighbor grid with bidirectional edges (road-network analog)."""
    if w < 1 or h < 1:
        raise ValueError("grid dimensions must be positive")
    rng = np.random.default_rng(seed)
    vertices = [(_vid(i * h + j), {}) for i in range(w) for j in range(h)]
    pairs = []
    for i in range(w):
        for j in range(h):
            u = i * h + j
            if i + 1 < w:
                pairs.append((_vid(u), _vid(u + h)))
                pairs.append((_vid(u + h), _vid(u)))
            if j + 1 < h:
                pairs.append((_vid(u), _vid(u + 1)))
                pairs.append((_vid(u + 1), _vid(u)))
    return vertices, _attach(rng, pairs, attr_opts)


def powerlaw(alpha: float, avg_outdegree: float, n: int, seed: int = 0,
             **attr_opts):
    """Power-law outdegree graph (social-network analog).

    Outdegrees follow a zipf(alpha) sample scaled to the requested average;
    targets are uniform with self-loops and duplicate edges dropped, so the
    realized edge count can fall slightly below avg_outdegree * n.
    """
    if alpha <= 1 or avg_outdegree <= 0 or n < 2:
        raise ValueError("powerlaw needs alpha > 1, positive degree, n >= 2")
    rng = np.random.default_rng(seed)
    raw = rng.zipf(alpha, n).astype(np.float64)
    raw = np.minimum(raw, n - 1)
    total = int(round(avg_outdegree * n))
    deg = np.minimum(np.floor(raw * total / raw.sum()).astype(np.int64), n - 1)
    short = total - int(deg.sum())
    if short > 0:
        room = np.flatnonzero(deg < n - 1)
        bump = rng.choice(room, size=min(short, len(room)), replace=False)
        deg[bump] += 1

    src = np.repeat(np.arange(n, dtype=np.int64), deg)
    tgt = rng.integers(0, n, len(src), dtype=np.int64)
    keep = src != tgt
    src, tgt = src[keep], tgt[keep]
    uniq = np.unique(src * n + tgt)
    src, tgt = uniq // n, uniq % n
    order = rng.permutation(len(src))  # drop the sorted artifact of unique
    src, tgt = src[order], tgt[order]

    vertices = [(_vid(i), {}) for i in range(n)]
    pairs = [(_vid(int(s)), _vid(int(t))) for s, t in zip(src, tgt)]
    return vertices, _attach(rng, pairs, attr_opts)


def _attach(rng, pairs, attr_opts):
    type_count = attr_opts.pop("type_count", 1)
    weight_zipf_s = attr_opts.pop("weight_zipf_s", None)
    weight_max = attr_opts.pop("weight_max", 100)
    shuffle = attr_opts.pop("shuffle", False)
    if attr_opts:
        raise ValueError(f"unknown generator options {sorted(attr_opts)}")
    attrs = _edge_attrs(rng, len(pairs), type_count, weight_zipf_s, weight_max)
    edges = [(s, t, a) for (s, t), a in zip(pairs, attrs)]
    if shuffle:
        order = rng.permutation(len(edges))
        edges = [edges[i] for i in order]
    return edges


GENERATORS = {
    "path": path,
    "star": star,
    "grid": grid,
    "powerlaw": powerlaw,
}


def generate(kind: str, seed: int = 0, **params):
    """Dispatch to a named generator; returns (vertices, edges) lists."""
    if kind not in GENERATORS:
        raise ValueError(f"unknown generator {kind!r}; "
                         f"choose from {sorted(GENERATORS)}")
    return GENERATORS[kind](seed=seed, **params)


def generate_graph(kind: str, seed: int = 0, **params):
    """Generate and build the column groups in one step."""
    vertices, edges = generate(kind, seed=seed, **params)
    return build_graph(vertices, edges)
