"""Storage layer: dictionaries, column groups, clustering, stats, TSV."""

from collections import Counter

import pytest

from colgraph import generate
from colgraph.errors import ClusteringError, GraphBuildError, ParseError
from colgraph.storage import (
    TYPE_CLUSTERED,
    TYPE_EDGE_CLUSTERED,
    UNCLUSTERED,
    Dictionary,
    build_graph,
    cluster_by_edge,
    cluster_by_type,
    compute_stats,
    load_tsv,
    save_tsv,
)

class TestDictionary:
    def test_sorted_dense_codes(self):
        d = Dictionary(["b", "a", "c", "a"])
        assert d.values == ["a", "b", "c"]
        assert [d.encode(v) for v in d.values] == [0, 1, 2]

    def test_roundtrip(self):
        d = Dictionary("fedcba")
        for code in range(len(d)):
            assert d.encode(d.decode(code)) == code
        for value in d.values:
            assert d.decode(d.encode(value)) == value

    def test_contains(self):
        d = Dictionary(["x"])
        assert "x" in d and "y" not in d


class TestBuildGraph:
    def test_fixture_shape(self, fixture_graph):
        vgroup, g = fixture_graph
        assert vgroup.vertex_count == 6
        assert g.edge_count == 6
        assert g.layout == UNCLUSTERED
        # source and target columns share one vertex dictionary
        assert g.vertex_dictionary is vgroup.dictionary

    def test_empty_edge_list(self):
        vgroup, g = build_graph([("A", {}), ("B", {})], [])
        assert vgroup.vertex_count == 2
        assert g.edge_count == 0

    def test_duplicate_vertex_id_rejected(self):
        with pytest.raises(GraphBuildError, match="'A'"):
            build_graph([("A", {}), ("A", {})], [])

    def test_unknown_endpoint_rejected(self):
        with pytest.raises(GraphBuildError, match="'Z'"):
            build_graph([("A", {})], [("A", "Z", {"type": "a"})])

    def test_null_attribute_column(self):
        _, g = build_graph(
            [("A", {}), ("B", {})],
            [("A", "B", {"type": "a", "w": "1"}), ("B", "A", {"type": "a"})])
        col = g.attributes["w"]
        assert col.present_mask().tolist() == [True, False]


class TestClustering:
    def test_type_clustering_ranges(self, fixture_graph):
        _, g = fixture_graph
        tc = cluster_by_type(g)
        assert tc.layout == TYPE_CLUSTERED
        type_col = tc.attributes["type"]
        decoded = [type_col.dictionary.decode(int(c)) for c in type_col.codes]
        assert decoded == ["a"] * 4 + ["b"] * 2
        a = type_col.dictionary.encode("a")
        b = type_col.dictionary.encode("b")
        assert tc.type_ranges == {a: (0, 4), b: (4, 6)}

    def test_type_clustering_single_type(self):
        _, g = build_graph([("A", {}), ("B", {})],
                           [("A", "B", {"type": "a"}),
                            ("B", "A", {"type": "a"})])
        tc = cluster_by_type(g)
        assert tc.records() == g.records()
        assert list(tc.type_ranges.values()) == [(0, 2)]

    def test_type_clustering_empty(self):
        _, g = build_graph([("A", {})], [])
        tc = cluster_by_type(g)
        assert tc.edge_count == 0 and tc.type_ranges == {}

    def test_type_clustering_requires_type_column(self):
        _, g = build_graph([("A", {}), ("B", {})], [("A", "B", {})])
        with pytest.raises(ClusteringError):
            cluster_by_type(g)

    def test_edge_clustering_source_order(self, fixture_graph):
        _, g = fixture_graph
        ec = cluster_by_edge(cluster_by_type(g))
        assert ec.layout == TYPE_EDGE_CLUSTERED
        dec = ec.vertex_dictionary.decode
        pairs = [(dec(int(s)), dec(int(t)))
                 for s, t in zip(ec.source, ec.target)]
        # within type a: the three A-source edges contiguous, then (D,F)
        assert pairs[:4] == [("A", "B"), ("A", "C"), ("A", "D"), ("D", "F")]
        # within type b: stable sort by source code
        assert pairs[4:] == [("C", "E"), ("D", "C")]

    def test_edge_clustering_idempotent(self, fixture_graph):
        _, g = fixture_graph
        ec = cluster_by_edge(cluster_by_type(g))
        again = cluster_by_edge(ec)
        assert again.records() == ec.records()
        assert again.layout == TYPE_EDGE_CLUSTERED

    def test_edge_clustering_requires_type_clustered(self, fixture_graph):
        _, g = fixture_graph
        with pytest.raises(ClusteringError):
            cluster_by_edge(g)

    def test_clustering_preserves_edge_multiset(self):
        _, g = generate.generate_graph("powerlaw", alpha=2.0, avg_outdegree=4,
                                       n=200, seed=7, type_count=3,
                                       weight_zipf_s=2)
        ec = cluster_by_edge(cluster_by_type(g))
        assert Counter(ec.records()) == Counter(g.records())

    def test_type_ranges_partition_positions(self):
        _, g = generate.generate_graph("powerlaw", alpha=2.0, avg_outdegree=4,
                                       n=100, seed=3, type_count=4)
        tc = cluster_by_type(g)
        spans = sorted(tc.type_ranges.values())
        assert spans[0][0] == 0 and spans[-1][1] == tc.edge_count
        for (_, e0), (s1, _) in zip(spans, spans[1:]):
            assert e0 == s1


class TestComputeStats:
    def test_path5(self):
        vgroup, g = generate.generate_graph("path", n=5)
        stats = compute_stats(g, vgroup)
        assert stats.avg_outdegree == pytest.approx(0.8)
        assert stats.max_outdegree == 1
        assert stats.est_diameter == 4.0

    def test_fixture(self, fixture_graph):
        vgroup, g = fixture_graph
        stats = compute_stats(g, vgroup)
        assert stats.avg_outdegree == pytest.approx(1.0)
        assert stats.max_outdegree == 3

    def test_star(self):
        vgroup, g = generate.generate_graph("star", n=4)
        stats = compute_stats(g, vgroup)
        assert stats.max_outdegree == 4
        assert stats.est_diameter == 1.0

    def test_empty_graph(self):
        vgroup, g = build_graph([], [])
        stats = compute_stats(g, vgroup)
        assert (stats.vertex_count, stats.edge_count) == (0, 0)
        assert stats.est_diameter == 0.0

    def test_bounds(self):
        vgroup, g = generate.generate_graph("grid", w=6, h=6)
        stats = compute_stats(g, vgroup)
        assert 0 <= stats.est_diameter <= vgroup.vertex_count - 1


class TestTsv:
    def test_roundtrip(self, tmp_path, fixture_graph):
        _, g = fixture_graph
        path = tmp_path / "g.tsv"
        save_tsv(g, path)
        vgroup2, g2 = load_tsv(path)
        assert vgroup2.vertex_count == 6
        assert Counter(g2.records()) == Counter(g.records())

    def test_comments_and_blank_lines(self, tmp_path):
        path = tmp_path / "g.tsv"
        path.write_text("# header\n\nA\tB\ta\n")
        vgroup, g = load_tsv(path)
        assert (vgroup.vertex_count, g.edge_count) == (2, 1)

    def test_malformed_line_cites_lineno(self, tmp_path):
        path = tmp_path / "g.tsv"
        path.write_text("A\tB\ta\nA\tB\ta\nA\tB\n")
        with pytest.raises(ParseError) as exc:
            load_tsv(path)
        assert exc.value.line == 3

    def test_vertex_file(self, tmp_path):
        (tmp_path / "e.tsv").write_text("A\tB\ta\n")
        (tmp_path / "v.tsv").write_text("A\tkind=x\nB\nC\n")
        vgroup, g = load_tsv(tmp_path / "e.tsv", tmp_path / "v.tsv")
        assert vgroup.vertex_count == 3
        assert "kind" in vgroup.attributes


def test_traversal_invariant_under_layout_permutation():
    """Identical queries on unclustered vs clustered layouts agree."""
    from colgraph import engine
    from colgraph.predicate import parse

    vgroup, g = generate.generate_graph("powerlaw", alpha=2.0, avg_outdegree=5,
                                        n=150, seed=11, type_count=3)
    layouts = [g, cluster_by_type(g), cluster_by_edge(cluster_by_type(g))]
    start = vgroup.dictionary.decode(int(g.source[0]))
    for pred in ("*", "type=a", "type=a or type=b"):
        cfg = engine.TraversalConfig({start}, parse(pred), 1, 3)
        results = []
        for layout in layouts:
            for op in ("oracle", "ls", "fi"):
                result, _ = engine.traverse(cfg, layout,
                                            operator_override=op)
                results.append(result)
        assert all(r == results[0] for r in results)
