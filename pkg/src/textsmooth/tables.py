"""Comparison-table rendering: methods x datasets, "mean (std)" percent cells.

The trailing "Avg." column is the unweighted mean over datasets of both the
per-dataset means and the per-dataset standard deviations.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import AxisMismatch, ConfigError, EmptyResults
from .trainer import RunResult

FORMATS = ("text", "csv", "json")

AVG_COLUMN = "Avg."


def format_cell(mean: float, std: float) -> str:
    """Render a fractional mean/std pair as a percent cell, e.g. '59.37 (7.79)'."""
    return f"{mean * 100:.2f} ({std * 100:.2f})"


def _ordered_unique(values: Sequence[str]) -> List[str]:
    seen, out = set(), []
    for v in values:
        if v not in seen:
            seen.add(v)
            out.append(v)
    return out


def _grid(results: Sequence[RunResult]) -> Tuple[List[str], List[str],
                                                 Dict[Tuple[str, str], RunResult]]:
    if not results:
        raise EmptyResults("no results to tabulate")
    cells: Dict[Tuple[str, str], RunResult] = {}
    for res in results:
        if not res.method or not res.dataset:
            raise AxisMismatch(f"result {res.config_fingerprint} lacks method/dataset axes")
        key = (res.method, res.dataset)
        if key in cells:
            raise AxisMismatch(f"duplicate cell for method={key[0]!r} dataset={key[1]!r}")
        cells[key] = res
    methods = _ordered_unique([r.method for r in results])
    datasets = _ordered_unique([r.dataset for r in results])
    for method in methods:
        missing = [d for d in datasets if (method, d) not in cells]
        if missing:
            raise AxisMismatch(f"method {method!r} is missing datasets {missing}")
    return methods, datasets, cells


def table_rows(results: Sequence[RunResult]) -> List[Dict[str, object]]:
    """One dict per method row, with per-dataset and averaged mean/std."""
    methods, datasets, cells = _grid(results)
    rows = []
    for method in methods:
        means = [cells[(method, d)].mean for d in datasets]
        stds = [cells[(method, d)].std for d in datasets]
        row: Dict[str, object] = {"method": method}
        for dataset in datasets:
            res = cells[(method, dataset)]
            row[dataset] = {"mean": res.mean, "std": res.std,
                            "cell": format_cell(res.mean, res.std)}
        avg_mean, avg_std = sum(means) / len(means), sum(stds) / len(stds)
        row[AVG_COLUMN] = {"mean": avg_mean, "std": avg_std,
                           "cell": format_cell(avg_mean, avg_std)}
        rows.append(row)
    return rows


def render_table(results: Sequence[RunResult], fmt: str = "text") -> str:
    if fmt not in FORMATS:
        raise ConfigError(f"format must be one of {FORMATS}, got {fmt!r}")
    rows = table_rows(results)
    columns = [c for c in rows[0] if c != "method"]
    if fmt == "json":
        return json.dumps({"schema": "textsmooth.table/v1", "rows": rows},
                          indent=2, sort_keys=True)
    header = ["Method", *columns]
    body = [[row["method"], *(row[c]["cell"] for c in columns)] for row in rows]
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(body)
        return buffer.getvalue()
    widths = [max(len(str(line[i])) for line in [header, *body]) for i in range(len(header))]
    fmt_row = lambda line: "  ".join(str(v).ljust(w) for v, w in zip(line, widths)).rstrip()
    rule = "-" * (sum(widths) + 2 * (len(widths) - 1))
    return "\n".join([fmt_row(header), rule, *map(fmt_row, body)]) + "\n"


def emit_table(results: Sequence[RunResult], out_path: Optional[str | Path] = None,
               fmt: str = "text") -> Tuple[str, Optional[Path]]:
    """Render the table; optionally persist it and return the written path."""
    rendered = render_table(results, fmt)
    written = None
    if out_path is not None:
        written = Path(out_path)
        written.parent.mkdir(parents=True, exist_ok=True)
        written.write_text(rendered, encoding="utf-8")
    return rendered, written
