"""Benchmark harness: sweeps, counter collection, cost-model validation.

A BenchmarkSpec describes one graph, one query template and the sweep axes
(operators, fragment sizes, false-positive rates, recursion boundaries).
Every cell is cross-checked against the set-algebra oracle on graphs small
enough to afford it; any mismatch aborts with a minimized reproduction.
"""

from __future__ import annotations

import csv
import json
import math
import statistics
from dataclasses import dataclass, field

import numpy as np

from . import engine, fi, generate, ls, storage
from .errors import ColgraphError
from .predicate import parse

ORACLE_CHECK_MAX_VERTICES = 10_000

# wall-time record keys; excluded from determinism comparisons
TIME_KEYS = ("prepare_us_median", "traverse_us_median", "decode_us_median",
             "prepare_us_mean", "traverse_us_mean", "decode_us_mean")

CSV_COLUMNS = (
    "graph", "clustering", "operator", "xi", "fpr", "c", "r", "direction",
    "partitions", "repetitions", "edges_read", "fragments_read",
    "result_size", "tgi_bytes", "predicted_cost",
) + TIME_KEYS


class BenchmarkMismatchError(ColgraphError):
    """An operator disagreed with the oracle; message carries the repro."""


@dataclass
class BenchmarkSpec:
    graph: dict
    clustering: str = "none"            # none | type | edge
    predicate: str = "*"
    collect: int = 0
    recurse: list = field(default_factory=lambda: [3])
    direction: str = "forward"
    repetitions: int = 5
    operators: list = field(default_factory=lambda: ["ls", "fi"])
    xi: list = field(default_factory=lambda: [64])
    fpr: list = field(default_factory=lambda: [0.01])
    partitions: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        for axis, name in ((self.recurse, "recurse"), (self.xi, "xi"),
                           (self.fpr, "fpr"), (self.operators, "operators")):
            if not axis:
                raise ValueError(f"sweep axis {name!r} must be non-empty")

    @classmethod
    def from_json(cls, path) -> "BenchmarkSpec":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        query = data.pop("query", {})
        spec = cls(
            graph=data["graph"],
            clustering=data.get("clustering", "none"),
            predicate=query.get("predicate", "*"),
            collect=query.get("collect", 0),
            recurse=_as_list(query.get("recurse", 3)),
            direction=query.get("direction", "forward"),
            repetitions=data.get("repetitions", 5),
            operators=data.get("operators", ["ls", "fi"]),
            xi=data.get("xi", [64]),
            fpr=data.get("fpr", [0.01]),
            partitions=data.get("partitions", 1),
            seed=data.get("seed", 0),
        )
        return spec

    def graph_label(self) -> str:
        if "file" in self.graph:
            return str(self.graph["file"])
        gen = self.graph["generator"]
        params = self.graph.get("params", {})
        inner = ",".join(f"{k}={v}" for k, v in sorted(params.items()))
        return f"{gen}({inner})"


def _as_list(value):
    if isinstance(value, list):
        return [_as_r(v) for v in value]
    return [_as_r(value)]


def _as_r(value):
    if value in ("inf", math.inf):
        return math.inf
    return int(value)


@dataclass
class BenchmarkReport:
    spec: BenchmarkSpec
    records: list
    sweeps: list                      # per-sweep R2 of predicted vs measured
    vertex_count: int
    edge_count: int

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
            writer.writeheader()
            for rec in self.records:
                writer.writerow({k: rec.get(k, "") for k in CSV_COLUMNS})

    def to_json(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump({
                "graph": self.spec.graph_label(),
                "vertex_count": self.vertex_count,
                "edge_count": self.edge_count,
                "records": self.records,
                "sweeps": self.sweeps,
            }, fh, indent=2, default=str)


def compute_r2(predicted, measured) -> float:
    """Coefficient of determination of a linear fit in log space.

    Cost predictions span orders of magnitude along an r sweep, so the fit
    quality is judged on log-transformed values; non-positive pairs are
    dropped first.
    """
    x = np.asarray(predicted, dtype=float)
    y = np.asarray(measured, dtype=float)
    ok = (x > 0) & (y > 0)
    x, y = np.log(x[ok]), np.log(y[ok])
    if len(x) < 2 or np.all(x == x[0]) or np.all(y == y[0]):
        return float("nan")
    return float(np.corrcoef(x, y)[0, 1] ** 2)


def load_spec_graph(spec: BenchmarkSpec):
    if "file" in spec.graph:
        return storage.load_tsv(spec.graph["file"],
                                spec.graph.get("vertex_file"))
    params = dict(spec.graph.get("params", {}))
    seed = spec.graph.get("seed", spec.seed)
    return generate.generate_graph(spec.graph["generator"], seed=seed,
                                   **params)


def apply_clustering(g, mode: str):
    if mode == "none":
        return g
    g = storage.cluster_by_type(g)
    if mode == "type":
        return g
    if mode == "edge":
        return storage.cluster_by_edge(g)
    raise ValueError(f"unknown clustering mode {mode!r}")


def sample_starts(g, vgroup, direction, count, rng):
    """Start vertices sampled uniformly among those with outgoing edges
    in the traversal direction (degenerate empty traversals skew medians)."""
    src, _ = g.oriented(direction)
    eligible = np.unique(src)
    if len(eligible) == 0:
        eligible = np.arange(vgroup.vertex_count)
    picks = rng.choice(eligible, size=count, replace=True)
    dec = g.vertex_dictionary.decode
    return [dec(int(c)) for c in picks]


def selectivity_threshold(g, attr: str, target: float, op: str = "le"):
    """Threshold whose realized selectivity is closest to the target.

    op="le" considers predicates attr <= t, op="ge" considers attr >= t.
    Heavily skewed value distributions (zipfian weights) cannot realize
    arbitrary selectivities exactly, so the nearest achievable cut is
    returned together with its realized selectivity.
    """
    col = g.attributes[attr]
    values = sorted(col.dictionary.values, key=float)
    n = g.edge_count
    counts = np.bincount(col.codes[col.present_mask()],
                         minlength=len(col.dictionary))
    best, best_sel = None, None
    cum = 0
    for v in values:
        cum += counts[col.dictionary.encode(v)]
        sel = cum / n if op == "le" else 1.0 - (cum - counts[
            col.dictionary.encode(v)]) / n
        if best is None or abs(sel - target) < abs(best_sel - target):
            best, best_sel = v, sel
    return best, best_sel


def run(spec: BenchmarkSpec) -> BenchmarkReport:
    """Execute every sweep cell and assemble the report."""
    vgroup, g = load_spec_graph(spec)
    g = apply_clustering(g, spec.clustering)
    stats = storage.compute_stats(g, vgroup, seed=spec.seed)
    predicate = parse(spec.predicate)
    rng = np.random.default_rng(spec.seed)
    starts = sample_starts(g, vgroup, spec.direction, spec.repetitions, rng)
    check_oracle = vgroup.vertex_count <= ORACLE_CHECK_MAX_VERTICES

    tgi_cache = {}

    def get_tgi(xi, fpr):
        key = (xi, fpr)
        if key not in tgi_cache:
            tgi_cache[key] = fi.build_tgi(g, ("fixed", xi), fpr,
                                          direction=spec.direction)
        return tgi_cache[key]

    records = []
    for operator in spec.operators:
        param_axis = ([(x, f) for x in spec.xi for f in spec.fpr]
                      if operator == "fi" else [(None, None)])
        for xi, fpr in param_axis:
            for r in spec.recurse:
                records.append(_run_cell(
                    spec, g, stats, predicate, starts, operator, xi, fpr, r,
                    get_tgi, check_oracle))

    sweeps = _sweep_r2(spec, records)
    return BenchmarkReport(spec, records, sweeps,
                           vgroup.vertex_count, g.edge_count)


def _run_cell(spec, g, stats, predicate, starts, operator, xi, fpr, r,
              get_tgi, check_oracle):
    cp = engine.CostParams(
        edge_read_cost=1.0,
        false_positive_rate=fpr if fpr is not None else 0.01,
        fragment_size=xi if xi is not None else 64,
    )
    part = ls.ScanPartitioning.equal(spec.partitions, g.edge_count)
    tgi = get_tgi(xi, fpr) if operator == "fi" else None

    times = {"prepare": [], "traverse": [], "decode": []}
    edges_read, fragments_read, result_sizes = [], [], []
    predicted = float("nan")
    for start in starts:
        cfg = engine.TraversalConfig({start}, predicate, spec.collect, r,
                                     spec.direction)
        result, rep = engine.traverse(cfg, g, stats=stats, cost_params=cp,
                                      operator_override=operator, tgi=tgi,
                                      partitioning=part)
        if check_oracle and operator != engine.OP_ORACLE:
            oracle, _ = engine.traverse(cfg, g, stats=stats, cost_params=cp,
                                        operator_override=engine.OP_ORACLE)
            if result != oracle:
                raise BenchmarkMismatchError(
                    "operator disagrees with oracle; repro: "
                    f"graph={spec.graph_label()} seed={spec.seed} "
                    f"clustering={spec.clustering} start={start!r} "
                    f"predicate={spec.predicate!r} c={spec.collect} r={r} "
                    f"direction={spec.direction} operator={operator} "
                    f"xi={xi} fpr={fpr}")
        for phase in times:
            times[phase].append(rep.phase_times_us[phase])
        edges_read.append(rep.edges_read)
        fragments_read.append(rep.fragments_read)
        result_sizes.append(rep.result_size)
        predicted = rep.cost_predicted

    rec = {
        "graph": spec.graph_label(),
        "clustering": spec.clustering,
        "operator": operator,
        "xi": "" if xi is None else xi,
        "fpr": "" if fpr is None else fpr,
        "c": spec.collect,
        "r": "inf" if r == math.inf else r,
        "direction": spec.direction,
        "partitions": spec.partitions,
        "repetitions": spec.repetitions,
        "edges_read": int(statistics.median(edges_read)),
        "fragments_read": int(statistics.median(fragments_read)),
        "result_size": int(statistics.median(result_sizes)),
        "tgi_bytes": (get_tgi(xi, fpr).accounted_bytes()["tgi_bytes"]
                      if operator == "fi" else ""),
        "predicted_cost": predicted,
    }
    for phase in ("prepare", "traverse", "decode"):
        rec[f"{phase}_us_median"] = statistics.median(times[phase])
        rec[f"{phase}_us_mean"] = statistics.fmean(times[phase])
    return rec


def _sweep_r2(spec, records):
    """R2 of predicted cost vs measured edges_read along the r axis."""
    sweeps = []
    groups = {}
    for rec in records:
        key = (rec["operator"], rec["xi"], rec["fpr"])
        groups.setdefault(key, []).append(rec)
    for (operator, xi, fpr), recs in groups.items():
        finite = [rec for rec in recs
                  if rec["r"] != "inf" and not math.isnan(rec["predicted_cost"])]
        if len(finite) < 2:
            continue
        finite.sort(key=lambda rec: rec["r"])
        sweeps.append({
            "operator": operator,
            "xi": xi,
            "fpr": fpr,
            "r_values": [rec["r"] for rec in finite],
            "predicted": [rec["predicted_cost"] for rec in finite],
            "measured": [rec["edges_read"] for rec in finite],
            "r2": compute_r2([rec["predicted_cost"] for rec in finite],
                             [rec["edges_read"] for rec in finite]),
        })
    return sweeps
