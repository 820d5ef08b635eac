"""Render aggregate results as CSV, JSON and grouped-bar SVG charts.

Numbers are displayed at two decimals but computed and stored at full
precision.  One SVG is emitted per (domain, top_k) panel: a group of three
bars (accuracy, completeness, clarity) per chunking model, on the 1..5
Likert axis.  Failed grid cells, when response records are supplied, are
listed as a footnote instead of being imputed into the means.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Iterable, Sequence

from .errors import EmptyGroup
from .experiments import ResponseRecord
from .scoring import AggregateRow, Criterion

REPORT_CSV = "report.csv"
REPORT_JSON = "report.json"
ALL_FORMATS = frozenset({"csv", "json", "svg"})

_CRITERIA = (Criterion.CONTENT_ACCURACY, Criterion.COMPLETENESS, Criterion.CLARITY)
_BAR_COLORS = {"content_accuracy": "#4472c4", "completeness": "#ed7d31", "clarity": "#a5a5a5"}


def _two(value: float) -> str:
    return f"{value:.2f}"


def rows_to_csv(rows: Sequence[AggregateRow]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["domain", "chunking_model", "top_k", "mean_accuracy", "mean_completeness",
                     "mean_clarity", "overall_mean", "rank", "strongest", "satisfactory_rate"])
    for row in rows:
        strongest = ";".join(sorted(c.value for c in row.strongest))
        writer.writerow([row.domain, row.model_id, row.top_k,
                         _two(row.mean_accuracy), _two(row.mean_completeness),
                         _two(row.mean_clarity), _two(row.overall_mean),
                         row.rank, strongest, _two(row.satisfactory_rate)])
    return out.getvalue()


def _panels(rows: Sequence[AggregateRow]) -> dict[tuple[str, int], list[AggregateRow]]:
    panels: dict[tuple[str, int], list[AggregateRow]] = {}
    for row in rows:
        panels.setdefault((row.domain, row.top_k), []).append(row)
    for panel in panels.values():
        panel.sort(key=lambda r: r.rank)
    return panels


def rows_to_report_json(rows: Sequence[AggregateRow],
                        responses: Sequence[ResponseRecord] = ()) -> dict:
    """Rankings plus strongest-criterion answers per (domain, top_k), with a failure footnote."""
    report: dict = {"domains": {}}
    for (domain, top_k), panel in sorted(_panels(rows).items()):
        domain_entry = report["domains"].setdefault(domain, {})
        domain_entry[str(top_k)] = {
            "ranking": [row.model_id for row in panel],
            "strongest_by_model": {
                str(row.model_id): sorted(c.value for c in row.strongest) for row in panel
            },
            "rows": [
                {
                    "model_id": row.model_id,
                    "mean_accuracy": row.mean_accuracy,
                    "mean_completeness": row.mean_completeness,
                    "mean_clarity": row.mean_clarity,
                    "overall_mean": row.overall_mean,
                    "overall_mean_2dp": _two(row.overall_mean),
                    "satisfactory_rate": row.satisfactory_rate,
                    "rank": row.rank,
                }
                for row in panel
            ],
        }
    failed = [
        {"key": list(rec.key), "error": rec.error}
        for rec in responses if rec.failed
    ]
    report["failed_cells"] = failed
    report["footnote"] = (
        "Failed grid cells are listed above and excluded from all means."
        if failed else ""
    )
    return report


def panel_svg(panel: Sequence[AggregateRow], domain: str, top_k: int) -> str:
    """Grouped-bar chart: one group per model, one bar per criterion, 0..5 axis."""
    panel = sorted(panel, key=lambda r: r.model_id)
    bar_w, gap, group_gap = 22, 4, 26
    group_w = 3 * bar_w + 2 * gap
    margin_left, margin_top, plot_h = 46, 34, 220
    width = margin_left + len(panel) * (group_w + group_gap) + 20
    height = margin_top + plot_h + 46

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif" font-size="11">',
        f'<text x="{margin_left}" y="16" font-size="13">{domain} — Top-K = {top_k}</text>',
    ]
    for tick in range(6):
        y = margin_top + plot_h - tick * plot_h / 5
        parts.append(f'<line x1="{margin_left - 4}" y1="{y:.1f}" x2="{width - 10}" y2="{y:.1f}" '
                     f'stroke="#ddd"/>')
        parts.append(f'<text x="{margin_left - 8}" y="{y + 4:.1f}" text-anchor="end">{tick}</text>')

    for g, row in enumerate(panel):
        x0 = margin_left + g * (group_w + group_gap)
        values = {
            "content_accuracy": row.mean_accuracy,
            "completeness": row.mean_completeness,
            "clarity": row.mean_clarity,
        }
        for b, criterion in enumerate(_CRITERIA):
            value = values[criterion.value]
            h = value * plot_h / 5
            x = x0 + b * (bar_w + gap)
            y = margin_top + plot_h - h
            parts.append(
                f'<rect class="bar {criterion.value}" x="{x:.1f}" y="{y:.1f}" '
                f'width="{bar_w}" height="{h:.1f}" fill="{_BAR_COLORS[criterion.value]}">'
                f'<title>{_two(value)}</title></rect>'
            )
        parts.append(f'<text x="{x0 + group_w / 2:.1f}" y="{margin_top + plot_h + 16}" '
                     f'text-anchor="middle">Μοντέλο {row.model_id}</text>')
        parts.append(f'<text x="{x0 + group_w / 2:.1f}" y="{margin_top + plot_h + 32}" '
                     f'text-anchor="middle" fill="#666">{_two(row.overall_mean)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _slug(domain: str) -> str:
    return "".join(ch if ch.isalnum() else "_" for ch in domain)


def emit_report(rows: Sequence[AggregateRow], responses: Sequence[ResponseRecord] = (),
                out_dir: str | Path = ".", formats: Iterable[str] = ALL_FORMATS) -> list[Path]:
    """Write report.csv / report.json / chart_{domain}_{k}.svg; returns the paths."""
    rows = list(rows)
    if not rows:
        raise EmptyGroup("no aggregate rows to report")
    formats = set(formats)
    unknown = formats - ALL_FORMATS
    if unknown:
        raise ValueError(f"unknown report formats: {sorted(unknown)}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    written = []
    if "csv" in formats:
        path = out_dir / REPORT_CSV
        path.write_text(rows_to_csv(rows), encoding="utf-8")
        written.append(path)
    if "json" in formats:
        path = out_dir / REPORT_JSON
        payload = rows_to_report_json(rows, responses)
        path.write_text(json.dumps(payload, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
        written.append(path)
    if "svg" in formats:
        for (domain, top_k), panel in sorted(_panels(rows).items()):
            path = out_dir / f"chart_{_slug(domain)}_{top_k}.svg"
            path.write_text(panel_svg(panel, domain, top_k), encoding="utf-8")
            written.append(path)
    return written
