"""End-to-end checks of the command-line harness."""

import json

import pytest
from click.testing import CliRunner

from colgraph.cli import main
from colgraph.storage import save_tsv


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def fixture_tsv(tmp_path, fixture_graph):
    _, g = fixture_graph
    path = tmp_path / "fixture.tsv"
    save_tsv(g, path)
    return path


class TestLoad:
    def test_summary_line(self, runner, fixture_tsv):
        result = runner.invoke(main, ["load", str(fixture_tsv)])
        assert result.exit_code == 0
        assert "|V|=6 |E|=6" in result.output

    def test_empty_file(self, runner, tmp_path):
        path = tmp_path / "empty.tsv"
        path.write_text("")
        result = runner.invoke(main, ["load", str(path)])
        assert result.exit_code == 0
        assert "|V|=0 |E|=0" in result.output

    def test_malformed_line_cited(self, runner, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("A\tB\ta\nA\tB\ta\nA\tB\n")
        result = runner.invoke(main, ["load", str(path)])
        assert result.exit_code == 1
        assert "3" in result.output


class TestGenerate:
    def test_grid_edge_count(self, runner, tmp_path):
        out = tmp_path / "grid.tsv"
        result = runner.invoke(main, [
            "generate", "grid", "--out", str(out), "--param", "w=10",
            "--param", "h=10"])
        assert result.exit_code == 0
        assert "360 edges" in result.output

    def test_deterministic_under_seed(self, runner, tmp_path):
        a, b = tmp_path / "a.tsv", tmp_path / "b.tsv"
        for out in (a, b):
            result = runner.invoke(main, [
                "generate", "powerlaw", "--out", str(out), "--seed", "5",
                "--param", "alpha=2.2", "--param", "avg_outdegree=4",
                "--param", "n=200"])
            assert result.exit_code == 0
        assert a.read_bytes() == b.read_bytes()

    def test_invalid_parameters(self, runner, tmp_path):
        result = runner.invoke(main, [
            "generate", "path", "--out", str(tmp_path / "p.tsv"),
            "--param", "n=0"])
        assert result.exit_code == 1


class TestCluster:
    def test_type_then_edge(self, runner, fixture_tsv, tmp_path):
        typed = tmp_path / "typed.tsv"
        result = runner.invoke(main, ["cluster", str(fixture_tsv),
                                      "--by", "type", "--out", str(typed)])
        assert result.exit_code == 0
        lines = typed.read_text().splitlines()
        assert [ln.split("\t")[2] for ln in lines] == ["a"] * 4 + ["b"] * 2
        edged = tmp_path / "edged.tsv"
        result = runner.invoke(main, ["cluster", str(fixture_tsv),
                                      "--by", "edge", "--out", str(edged)])
        assert result.exit_code == 0


class TestQuery:
    def test_result_and_report(self, runner, fixture_tsv):
        result = runner.invoke(main, [
            "query", "--graph", str(fixture_tsv), "--start", "A",
            "--predicate", "type=a", "--collect", "2", "--recurse", "2",
            "--operator", "ls"])
        assert result.exit_code == 0
        lines = result.output.strip().splitlines()
        assert json.loads(lines[0]) == ["F"]
        report = json.loads(lines[1])
        assert report["operator"] == "ls"
        assert report["result_size"] == 1

    def test_operators_agree(self, runner, fixture_tsv):
        outputs = []
        for op in ("oracle", "ls", "fi", "auto"):
            result = runner.invoke(main, [
                "query", "--graph", str(fixture_tsv), "--start", "A",
                "--predicate", "type=a or type=b", "--collect", "2",
                "--recurse", "2", "--operator", op, "--xi", "2"])
            assert result.exit_code == 0
            outputs.append(result.output.strip().splitlines()[0])
        assert all(o == outputs[0] for o in outputs)
        assert json.loads(outputs[0]) == ["E", "F"]

    def test_backward_infinite(self, runner, fixture_tsv):
        result = runner.invoke(main, [
            "query", "--graph", str(fixture_tsv), "--start", "E",
            "--recurse", "inf", "--direction", "bwd", "--operator", "ls"])
        assert result.exit_code == 0
        assert json.loads(result.output.strip().splitlines()[0]) == [
            "A", "C", "D", "E"]

    def test_unknown_start_fails(self, runner, fixture_tsv):
        result = runner.invoke(main, [
            "query", "--graph", str(fixture_tsv), "--start", "Z",
            "--operator", "ls"])
        assert result.exit_code == 1
        assert "Z" in result.output


class TestBench:
    def test_outputs_and_figures(self, runner, fixture_tsv, tmp_path):
        spec = tmp_path / "spec.json"
        spec.write_text(json.dumps({
            "graph": {"generator": "grid", "params": {"w": 5, "h": 5}},
            "query": {"predicate": "*", "recurse": [1, 2, 3]},
            "repetitions": 2,
            "operators": ["ls", "fi"],
            "xi": [4],
            "seed": 1,
        }))
        outdir = tmp_path / "out"
        result = runner.invoke(main, ["bench", "--spec", str(spec),
                                      "--out", str(outdir)])
        assert result.exit_code == 0
        assert (outdir / "results.csv").exists()
        assert (outdir / "results.json").exists()
        assert (outdir / "edges_read_vs_r.png").exists()
        assert (outdir / "cost_model_fit.png").exists()
        assert "R2=" in result.output

    def test_no_plots_flag(self, runner, tmp_path):
        spec = tmp_path / "spec.json"
        spec.write_text(json.dumps({
            "graph": {"generator": "path", "params": {"n": 20}},
            "query": {"recurse": [1, 2]},
            "repetitions": 1,
            "operators": ["ls"],
            "seed": 0,
        }))
        outdir = tmp_path / "out"
        result = runner.invoke(main, ["bench", "--spec", str(spec),
                                      "--out", str(outdir), "--no-plots"])
        assert result.exit_code == 0
        assert not list(outdir.glob("*.png"))


class TestTgiReport:
    def test_fixed_policy_json(self, runner, fixture_tsv):
        result = runner.invoke(main, ["tgi-report", "--graph",
                                      str(fixture_tsv), "--xi", "2"])
        assert result.exit_code == 0
        payload = json.loads(result.output)
        assert payload["fragment_count"] == 3
        assert payload["size_policy"] == "fixed:2"
        assert 0 < payload["bytes_ratio_vs_edge_columns"]

    def test_adaptive_policy(self, runner, fixture_tsv):
        result = runner.invoke(main, ["tgi-report", "--graph",
                                      str(fixture_tsv), "--min-xi", "2"])
        assert result.exit_code == 0
        assert json.loads(result.output)["size_policy"] == "adaptive:2"

    def test_adaptive_needs_clustered_layout(self, runner, fixture_tsv):
        result = runner.invoke(main, ["tgi-report", "--graph",
                                      str(fixture_tsv), "--cluster", "none",
                                      "--min-xi", "2"])
        assert result.exit_code == 1
