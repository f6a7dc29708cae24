"""Rendering of evaluation reports: delimited records, a readable table, and
matplotlib figures written next to them.

The figure set mirrors what reviewers of color pipelines expect: perceptual
distance histograms for the color stages and confusion heatmaps for the two
classification stages.
"""

from __future__ import annotations

import csv
import json
import os
from pathlib import Path

from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .evaluation import ConfusionMatrix, EvaluationReport, HISTOGRAM_BUCKETS

_BUCKET_TITLES = {"le_3": "0-3", "in_3_12": "3-12", "gt_12": ">12"}


def report_rows(report: EvaluationReport) -> list[tuple[str, str, str, str]]:
    """Flatten a report into (section, metric, qualifier, value) rows."""
    rows: list[tuple[str, str, str, str]] = []

    def add(section, metric, qualifier, value):
        if value is None:
            formatted = "NA"
        elif isinstance(value, float):
            formatted = f"{value:.6f}"
        else:
            formatted = str(value)
        rows.append((section, metric, qualifier, formatted))

    add("summary", "substituted", "", ",".join(report.substituted) or "none")
    add("summary", "product_count", "", report.product_count)
    add("summary", "unmatched_shades", "", report.unmatched_shades)
    add("selection", "accuracy", "", report.selection_accuracy)
    add("detection", "map_50_95", "", report.detection_map)
    add("format", "f1_macro", "", report.format_f1.macro)
    for label, value in sorted(report.format_f1.per_class.items()):
        add("format", "f1", label, value)
    if report.finish_f1 is not None:
        for stratum, scores in report.finish_f1.items():
            add("finish", "f1_macro", stratum, scores.macro)
    else:
        add("finish", "f1_macro", "All", None)
    for stratum, metric in report.base_color_delta_e.items():
        add("base_color", "delta_e_mean", stratum, metric.mean)
        add("base_color", "shade_count", stratum, metric.count)
    for bucket in HISTOGRAM_BUCKETS:
        add("base_color", "histogram", bucket, report.base_color_histogram[bucket])
    if report.reflective_delta_e is not None:
        add("reflective", "delta_e_mean", "", report.reflective_delta_e.mean)
        add("reflective", "shade_count", "", report.reflective_delta_e.count)
        for bucket in HISTOGRAM_BUCKETS:
            add("reflective", "histogram", bucket, report.reflective_histogram[bucket])
    if report.agreement is not None:
        for stratum, stats in report.agreement.items():
            for name, value in stats.items():
                add("agreement", f"{name}_mean", stratum, value.mean)
                add("agreement", f"{name}_variance", stratum, value.variance)
    if report.fleiss is not None:
        for task, kappa in sorted(report.fleiss.items()):
            add("agreement", "fleiss_kappa", task, kappa)
    if report.per_brand is not None:
        for row in report.per_brand:
            add("brand", "product_count", row.brand, row.product_count)
            add("brand", "base_color_delta_e_mean", row.brand, row.base_color_mean_delta_e)
            add("brand", "finish_f1_macro", row.brand, row.finish_macro_f1)
            add("brand", "format_f1_macro", row.brand, row.format_macro_f1)
    return rows


def write_csv(report: EvaluationReport, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["section", "metric", "qualifier", "value"])
        writer.writerows(report_rows(report))


def write_json(report: EvaluationReport, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def format_text(report: EvaluationReport) -> str:
    """Aligned human-readable table of the flattened report."""
    rows = report_rows(report)
    widths = [max(len(r[i]) for r in rows + [("section", "metric", "qualifier", "value")])
              for i in range(4)]
    lines = []
    header = ("section", "metric", "qualifier", "value")
    lines.append("  ".join(h.ljust(widths[i]) for i, h in enumerate(header)))
    lines.append("  ".join("-" * widths[i] for i in range(4)))
    for row in rows:
        lines.append("  ".join(row[i].ljust(widths[i]) for i in range(4)))
    return "\n".join(lines)


def _histogram_figure(histogram: dict[str, int], title: str) -> Figure:
    fig = Figure(figsize=(4.5, 3.2))
    ax = fig.add_subplot(111)
    labels = [_BUCKET_TITLES[b] for b in HISTOGRAM_BUCKETS]
    counts = [histogram[b] for b in HISTOGRAM_BUCKETS]
    ax.bar(labels, counts, color=["#4C9E57", "#D8A03C", "#B8554A"])
    ax.set_xlabel("deltaE")
    ax.set_ylabel("shades")
    ax.set_title(title)
    for i, c in enumerate(counts):
        ax.text(i, c, str(c), ha="center", va="bottom", fontsize=9)
    fig.tight_layout()
    return fig


def _confusion_figure(matrix: ConfusionMatrix, title: str) -> Figure:
    fig = Figure(figsize=(4.5, 4.0))
    ax = fig.add_subplot(111)
    counts = matrix.counts
    ax.imshow(counts, cmap="Blues")
    n = len(matrix.labels)
    ax.set_xticks(range(n), matrix.labels, rotation=30, ha="right")
    ax.set_yticks(range(n), matrix.labels)
    ax.set_xlabel("predicted")
    ax.set_ylabel("ground truth")
    ax.set_title(title)
    vmax = counts.max() if counts.size else 0
    for i in range(n):
        for j in range(n):
            color = "white" if vmax and counts[i, j] > vmax / 2 else "black"
            ax.text(j, i, str(int(counts[i, j])), ha="center", va="center",
                    color=color, fontsize=9)
    fig.tight_layout()
    return fig


def write_figures(report: EvaluationReport, out_dir: str | os.PathLike) -> list[Path]:
    """Render the report's figures as PNGs in out_dir; returns written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def save(fig: Figure, name: str) -> None:
        path = out / name
        FigureCanvasAgg(fig).print_png(str(path))
        written.append(path)

    save(_histogram_figure(report.base_color_histogram, "Base color deltaE"),
         "base_color_histogram.png")
    if sum(report.reflective_histogram.values()):
        save(_histogram_figure(report.reflective_histogram, "Reflective color deltaE"),
             "reflective_histogram.png")
    save(_confusion_figure(report.format_confusion, "Format classification"),
         "format_confusion.png")
    if report.finish_confusion is not None and report.finish_confusion.total:
        save(_confusion_figure(report.finish_confusion, "Finish type classification"),
             "finish_confusion.png")
    return written


def write_report(report: EvaluationReport, out_dir: str | os.PathLike) -> dict[str, object]:
    """Write report.json, report.csv, and the figure set into out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_json(report, out / "report.json")
    write_csv(report, out / "report.csv")
    figures = write_figures(report, out)
    return {
        "json": out / "report.json",
        "csv": out / "report.csv",
        "figures": figures,
    }
