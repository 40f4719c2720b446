"""Report emission: multi-seed text table, per-seed CSV and a size-vs-error SVG."""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Sequence

from .evaluate import EvalReport, group_reports

CSV_COLUMNS = ("method", "params", "seed", "split", "mse", "evar")
TABLE_COLUMNS = ("Method", "MSE-Avg", "MSE-Min", "MSE-Max")
FORMATS = ("text", "csv", "svg")


def format_table(reports: Sequence[EvalReport], extra: Sequence[str] = ()) -> str:
    """Fixed-width table, one row per method.  ``extra`` may add ``E-Var`` and/or ``Params``."""
    reports = group_reports(reports)
    header = list(TABLE_COLUMNS) + list(extra)
    rows = []
    for r in reports:
        row = [r.method, f"{r.mse_avg:.2f}", f"{r.mse_min:.2f}", f"{r.mse_max:.2f}"]
        for col in extra:
            row.append(f"{r.evar:.2f}" if col == "E-Var" else str(r.params))
        rows.append(row)
    widths = [max(len(h), *(len(row[i]) for row in rows)) if rows else len(h) for i, h in enumerate(header)]
    lines = ["  ".join(h.ljust(widths[0]) if i == 0 else h.rjust(widths[i]) for i, h in enumerate(header))]
    lines.append("  ".join("-" * w for w in widths))
    for row in rows:
        lines.append("  ".join(v.ljust(widths[0]) if i == 0 else v.rjust(widths[i]) for i, v in enumerate(row)))
    return "\n".join(lines) + "\n"


def format_csv(reports: Sequence[EvalReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        for seed, mse, evar in zip(r.seeds, r.per_seed_mse, r.per_seed_evar):
            w.writerow([r.method, r.params, seed, r.split, repr(float(mse)), repr(float(evar))])
    return buf.getvalue()


def parse_csv(text: str) -> list[EvalReport]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV columns {reader.fieldnames}; expected {list(CSV_COLUMNS)}")
    singles = []
    for row in reader:
        method = row["method"]
        family = method.split("-")[0] if "-" in method else method
        singles.append(EvalReport(method, family, int(row["params"]), row["split"], [int(row["seed"])],
                                  [float(row["mse"])], [float(row["evar"])]))
    return group_reports(singles)


def load_csv(path: str | Path) -> list[EvalReport]:
    return parse_csv(Path(path).read_text(encoding="utf-8"))


def render_svg(reports: Sequence[EvalReport], title: str = "Model size vs duration error") -> str:
    """Scatter of parameter count against MSE-Avg, error bars spanning min..max."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    reports = group_reports(reports)
    with matplotlib.rc_context({"svg.hashsalt": "durkit", "svg.fonttype": "path"}):
        fig, ax = plt.subplots(figsize=(5.5, 4.0))
        for r in reports:
            x = max(r.params, 1)
            ax.errorbar([x], [r.mse_avg], yerr=[[r.mse_avg - r.mse_min], [r.mse_max - r.mse_avg]], fmt="o",
                        capsize=3, label=r.method)
            ax.annotate(r.method, (x, r.mse_avg), textcoords="offset points", xytext=(5, 5), fontsize=8)
        if any(r.params > 0 for r in reports):
            ax.set_xscale("log")
        ax.set_xlabel("parameters")
        ax.set_ylabel("MSE-Avg (frames^2)")
        ax.set_title(title)
        ax.grid(True, alpha=0.3)
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": None})
        plt.close(fig)
    return buf.getvalue()


def emit_report(reports: Sequence[EvalReport], fmt: str, path: str | Path | None = None) -> str:
    """Render ``reports`` as ``text``, ``csv`` or ``svg``; write to ``path`` if given."""
    if not reports:
        raise ValueError("no reports to emit")
    if fmt == "text":
        out = format_table(reports)
    elif fmt == "csv":
        out = format_csv(reports)
    elif fmt == "svg":
        out = render_svg(reports)
    else:
        raise ValueError(f"unknown report format {fmt!r}; expected one of {FORMATS}")
    if path is not None:
        Path(path).write_text(out, encoding="utf-8")
    return out
