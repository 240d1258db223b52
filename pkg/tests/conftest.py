"""Shared fixtures: the six-vertex example graph and a two-digit-vertex
graph laid out so that fragment scheduling follows a known chain."""

from __future__ import annotations

import pytest

from colgraph.storage import build_graph

# Six vertices, four type-a edges and two type-b edges. Every frozen
# result-set expectation in the test suite is stated against this graph.
FIXTURE_VERTICES = [(v, {}) for v in "ABCDEF"]
FIXTURE_EDGES = [
    ("A", "B", {"type": "a"}),
    ("A", "C", {"type": "a"}),
    ("A", "D", {"type": "a"}),
    ("D", "F", {"type": "a"}),
    ("D", "C", {"type": "b"}),
    ("C", "E", {"type": "b"}),
]


@pytest.fixture
def fixture_graph():
    return build_graph(FIXTURE_VERTICES, FIXTURE_EDGES)


# Sixteen edges arranged so that with fragment size 4 the four fragments
# have source synopses {10,11}, {13,14}, {15,16}, {12,15}. Starting at
# vertex "13" the scheduler must walk fragments [1, 3, 2, 3].
FIG6_EDGES = [
    ("10", "26"), ("10", "27"), ("11", "28"), ("11", "29"),   # fragment 0
    ("13", "12"), ("14", "13"), ("14", "15"), ("14", "18"),   # fragment 1
    ("15", "22"), ("16", "23"), ("16", "24"), ("15", "25"),   # fragment 2
    ("12", "15"), ("15", "19"), ("12", "20"), ("15", "21"),   # fragment 3
]


@pytest.fixture
def fig6_graph():
    ids = sorted({v for e in FIG6_EDGES for v in e})
    vertices = [(v, {}) for v in ids]
    edges = [(s, t, {"type": "a"}) for s, t in FIG6_EDGES]
    return build_graph(vertices, edges)
