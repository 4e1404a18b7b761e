"""Human-readable and machine-readable evaluation summaries.

The JSON summary has one object per sequence under ``sequences`` and the fold
under ``aggregate``; each carries ``mota``, ``motp``, ``hota``, ``idf1``,
``ids``, ``fn``, ``fp``, ``fps`` and the underlying counts.
"""
from collections.abc import Sequence
from typing import Any

from src.models.reports import EvalReport
from src.storage.interface import StorageInterface

TABLE_COLUMNS = ("sequence", "mota", "motp", "hota", "idf1", "ids", "fn", "fp", "fps")


def _cell(value: Any) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)


def format_table(reports: Sequence[EvalReport], aggregate: EvalReport | None = None) -> str:
    """Fixed-width table, one row per sequence and an optional aggregate row."""
    rows = [list(TABLE_COLUMNS)]
    for report in [*reports, *([aggregate] if aggregate is not None else [])]:
        values = report.summary()
        rows.append([_cell(values[column]) for column in TABLE_COLUMNS])
    widths = [max(len(row[i]) for row in rows) for i in range(len(TABLE_COLUMNS))]
    lines = ["  ".join(cell.ljust(width) for cell, width in zip(row, widths, strict=True)).rstrip() for row in rows]
    lines.insert(1, "  ".join("-" * width for width in widths))
    return "\n".join(lines) + "\n"


def summary_document(reports: Sequence[EvalReport], aggregate: EvalReport, run_id: str = "") -> dict[str, Any]:
    return {
        "run_id": run_id,
        "sequences": {r.sequence: r.summary() for r in sorted(reports, key=lambda r: r.sequence)},
        "aggregate": aggregate.summary(),
    }


def write_reports(
    storage: StorageInterface,
    prefix: str,
    reports: Sequence[EvalReport],
    aggregate: EvalReport,
    run_id: str = "",
    per_frame: bool = False,
) -> dict[str, str]:
    """Write ``<prefix>/eval_summary.json`` and ``<prefix>/eval_table.txt``; optionally per-frame diagnostics."""
    paths = {
        "summary": storage.save_json(f"{prefix}/eval_summary.json", summary_document(reports, aggregate, run_id)),
        "table": storage.save_text(f"{prefix}/eval_table.txt", format_table(reports, aggregate)),
    }
    if per_frame:
        for report in reports:
            frames = [f.model_dump() for f in report.per_frame]
            paths[f"frames:{report.sequence}"] = storage.save_json(f"{prefix}/frames/{report.sequence}.json", frames)
    return paths
