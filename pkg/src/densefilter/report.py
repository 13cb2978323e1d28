"""Render pipeline reports for humans and export plot-ready CSV payloads."""

from __future__ import annotations

import json
import os

from .errors import DataError


def load_report(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    if not isinstance(obj, dict) or "schema" not in obj:
        raise DataError(f"{path}: not a densefilter report")
    return obj


def render_denoise_table(report: dict) -> str:
    """Fixed-width per-class summary table."""
    rows = [
        (
            "class",
            "members",
            "core",
            "removed",
            "kept",
            "verdict",
            "peaks",
            "otsu_t",
            "tau",
        )
    ]
    for c in report["classes"]:
        otsu = c.get("otsu")
        rows.append(
            (
                str(c["class_id"]),
                str(c["counts"]["members"]),
                str(c["counts"]["core"]),
                str(c["counts"]["removed"]),
                str(c["counts"]["kept"]),
                c["modality"]["verdict"],
                str(c["modality"]["peak_count"]),
                "-" if otsu is None else f"{otsu['threshold']:.4g}",
                "-" if c.get("tau") is None else f"{c['tau']:.4g}",
            )
        )
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(v.rjust(w) for v, w in zip(r, widths)) for r in rows]
    totals = report["totals"]
    lines.append(
        f"totals: labeled={totals['labeled']} kept={totals['kept']} "
        f"removed={totals['removed']} ({totals['removed_fraction']:.4f})"
    )
    scores = report.get("ground_truth_scores")
    if scores:
        o = scores["overall"]
        lines.append(
            "ground truth: "
            f"recall={_fmt_opt(o['recall'])} precision={_fmt_opt(o['precision'])} "
            f"residual={_fmt_opt(o['residual_noise_fraction'])}"
        )
    warn = [
        f"class {c['class_id']}: {w}" for c in report["classes"] for w in c["warnings"]
    ]
    lines.extend(f"warning: {w}" for w in warn)
    return "\n".join(lines)


def _fmt_opt(v) -> str:
    return "n/a" if v is None else f"{v:.4f}"


def export_class_csvs(report: dict, out_dir) -> list[str]:
    """Write per-class KDE curves and Otsu histograms; returns paths written."""
    os.makedirs(out_dir, exist_ok=True)
    written: list[str] = []
    for c in report["classes"]:
        cid = c["class_id"]
        kde_path = os.path.join(out_dir, f"kde_class{cid}.csv")
        with open(kde_path, "w", encoding="ascii", newline="\n") as fh:
            fh.write("grid,pdf\n")
            for g, p in zip(c["kde"]["grid"], c["kde"]["pdf"]):
                fh.write(f"{g!r},{p!r}\n")
        written.append(kde_path)
        otsu = c.get("otsu")
        if otsu is not None:
            hist_path = os.path.join(out_dir, f"hist_class{cid}.csv")
            with open(hist_path, "w", encoding="ascii", newline="\n") as fh:
                fh.write("bin_lo,bin_hi,count\n")
                edges = otsu["bin_edges"]
                for b, count in enumerate(otsu["histogram"]):
                    fh.write(f"{edges[b]!r},{edges[b + 1]!r},{int(count)}\n")
            written.append(hist_path)
    return written
