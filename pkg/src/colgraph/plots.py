"""Figure rendering for benchmark reports.

Figures are written next to the delimited output of a bench run. Rendering
is best-effort presentation; all quantitative results live in the CSV/JSON.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def _numeric_r(records):
    return [rec for rec in records if rec["r"] != "inf"]


def _series_label(rec):
    label = rec["operator"]
    if rec["operator"] == "fi" and rec["xi"] != "":
        label += f" xi={rec['xi']}"
    return label


def render_report(report, outdir) -> list:
    """Render counter and cost-fit figures for a benchmark report."""
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    records = _numeric_r(report.records)
    series = {}
    for rec in records:
        series.setdefault(_series_label(rec), []).append(rec)

    if any(len(v) > 1 for v in series.values()):
        fig, axes = plt.subplots(1, 2, figsize=(10, 4))
        for label, recs in sorted(series.items()):
            recs = sorted(recs, key=lambda rec: rec["r"])
            rs = [rec["r"] for rec in recs]
            axes[0].plot(rs, [rec["edges_read"] for rec in recs],
                         marker="o", label=label)
            axes[1].plot(rs, [rec["traverse_us_median"] for rec in recs],
                         marker="o", label=label)
        axes[0].set_xlabel("recursion boundary r")
        axes[0].set_ylabel("edges read (median)")
        axes[0].set_yscale("log")
        axes[1].set_xlabel("recursion boundary r")
        axes[1].set_ylabel("traverse time (us, median)")
        axes[1].set_yscale("log")
        axes[0].legend(fontsize=8)
        fig.suptitle(report.spec.graph_label())
        fig.tight_layout()
        path = outdir / "edges_read_vs_r.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    cost_sweeps = [s for s in report.sweeps if not math.isnan(s["r2"])]
    if cost_sweeps:
        fig, ax = plt.subplots(figsize=(5, 4))
        for sweep in cost_sweeps:
            label = f"{sweep['operator']}"
            if sweep["xi"] != "":
                label += f" xi={sweep['xi']}"
            ax.scatter(sweep["predicted"], sweep["measured"],
                       label=f"{label} (R2={sweep['r2']:.2f})")
        ax.set_xlabel("predicted cost (C_e = 1)")
        ax.set_ylabel("measured edges read")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.legend(fontsize=8)
        fig.tight_layout()
        path = outdir / "cost_model_fit.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    return written


def render_tgi_sweep(entries, path):
    """entries: list of dicts with xi and tgi_bytes (one TGI per xi)."""
    fig, ax = plt.subplots(figsize=(5, 4))
    xs = [e["xi"] for e in entries]
    ys = [e["tgi_bytes"] for e in entries]
    ax.plot(xs, ys, marker="o")
    ax.set_xlabel("fragment size xi")
    ax.set_ylabel("TGI bytes")
    ax.set_xscale("log", base=2)
    ax.set_yscale("log")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
