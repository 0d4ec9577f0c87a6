"""Evaluation report rendering: summary CSV, console table, and figures.

Figures are written next to the delimited output with the Agg backend so
reports render identically in headless runs.
"""

import csv

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

__all__ = [
    "format_report_table",
    "write_report_csv",
    "write_trials_csv",
    "render_eval_figure",
    "write_table_csv",
    "render_sweep_figure",
]

_METRICS = ("pcc", "srocc", "rmse")

_PNG_META = {"Software": None}  # keep PNG bytes reproducible across runs


def format_report_table(report) -> str:
    """Small console table of the aggregated metrics."""
    lines = [
        f"{'metric':<8} {report.aggregation:>12}",
        "-" * 21,
    ]
    for m in _METRICS:
        lines.append(f"{m.upper():<8} {getattr(report, m):>12.4f}")
    lines.append(f"{'trials':<8} {report.n_trials:>12d}")
    return "\n".join(lines)


def write_report_csv(report, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "value"])
        for m in _METRICS:
            writer.writerow([m, repr(float(getattr(report, m)))])
        writer.writerow(["n_trials", report.n_trials])
        writer.writerow(["aggregation", report.aggregation])


def write_trials_csv(report, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trial", "pcc", "srocc", "rmse", "n_test", "test_contents"])
        for i, tr in enumerate(report.per_trial):
            writer.writerow([
                i, repr(float(tr.pcc)), repr(float(tr.srocc)), repr(float(tr.rmse)),
                tr.n_test, ";".join(tr.test_contents),
            ])


def render_eval_figure(report, path) -> None:
    """Per-trial metric distributions with the reported medians marked."""
    fig, axes = plt.subplots(1, 3, figsize=(10.5, 3.2))
    for ax, metric in zip(axes, _METRICS):
        vals = np.array([getattr(tr, metric) for tr in report.per_trial], dtype=np.float64)
        vals = vals[np.isfinite(vals)]
        if vals.size:
            ax.hist(vals, bins=min(20, max(5, vals.size // 3)), color="#4878d0", edgecolor="white")
        med = getattr(report, metric)
        ax.axvline(med, color="#d65f5f", linestyle="--", linewidth=1.2,
                   label=f"median {med:.3f}")
        ax.set_xlabel(metric.upper())
        ax.legend(fontsize=8)
    axes[0].set_ylabel("trials")
    fig.suptitle(f"{report.n_trials} train/test trials")
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_PNG_META)
    plt.close(fig)


def write_table_csv(path, fieldnames, rows) -> None:
    """Generic delimited table; floats written via repr."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(fieldnames))
        writer.writeheader()
        for row in rows:
            out = {}
            for k, v in row.items():
                out[k] = repr(float(v)) if isinstance(v, float) else v
            writer.writerow(out)


def render_sweep_figure(rows, path) -> None:
    """Bar chart of metrics against the swept block size."""
    sizes = [str(r["svd_block"]) for r in rows]
    x = np.arange(len(sizes))
    width = 0.35
    fig, ax = plt.subplots(figsize=(6.0, 3.4))
    ax.bar(x - width / 2, [r["pcc"] for r in rows], width, label="PCC", color="#4878d0")
    ax.bar(x + width / 2, [r["srocc"] for r in rows], width, label="SROCC", color="#6acc64")
    ax.set_xticks(x, sizes)
    ax.set_xlabel("structural block size")
    ax.set_ylim(0, 1)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_PNG_META)
    plt.close(fig)
