"""CSV tables and declarative plot-spec files."""

from __future__ import annotations

import json
import math
import os
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

PLOT_SPEC_SCHEMA = "zenopass.plot/1"


class PlotSpecError(ValueError):
    """The CSV behind a plot spec is missing, empty, or lacks a column."""


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (int,)) and not isinstance(v, bool):
        return str(v)
    if isinstance(v, str):
        return v
    x = float(v)
    if math.isnan(x):
        return "nan"
    return f"{x:.12g}"


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    lines = [",".join(header)]
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"row has {len(row)} values for {len(header)} columns")
        lines.append(",".join(format_value(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_columns(path: str | Path, columns: Mapping[str, Sequence]) -> Path:
    """Write equal-length columns; the mapping order is the column order."""
    names = list(columns)
    lengths = {len(columns[n]) for n in names}
    if len(lengths) > 1:
        raise ValueError(f"columns have unequal lengths {sorted(lengths)}")
    n = lengths.pop() if lengths else 0
    rows = ([columns[c][i] for c in names] for i in range(n))
    return write_csv(path, names, rows)


def read_csv(path: str | Path) -> tuple:
    """Return ``(header, rows)`` with every cell as a string."""
    text = Path(path).read_text()
    lines = [ln for ln in text.split("\n") if ln]
    if not lines:
        return [], []
    return lines[0].split(","), [ln.split(",") for ln in lines[1:]]


def read_column(path: str | Path, name: str) -> list:
    header, rows = read_csv(path)
    if name not in header:
        raise KeyError(f"{path}: no column {name!r}")
    i = header.index(name)
    return [float(r[i]) if r[i] else float("nan") for r in rows]


def _check_csv(path: Path, columns: Sequence[str]) -> None:
    if not path.is_file():
        raise PlotSpecError(f"{path}: file not found")
    header, rows = read_csv(path)
    if not header:
        raise PlotSpecError(f"{path}: empty CSV")
    missing = [c for c in columns if c not in header]
    if missing:
        raise PlotSpecError(f"{path}: missing column(s) {', '.join(missing)}")
    if not rows:
        raise PlotSpecError(f"{path}: no data rows")
    if any(len(r) != len(header) for r in rows):
        raise PlotSpecError(f"{path}: malformed row")


def emit_plot_spec(
    out_path: str | Path,
    series: Sequence[Mapping],
    title: str = "",
    x_label: Optional[str] = None,
    y_label: Optional[str] = None,
    mark: str = "line",
) -> Path:
    """Write a JSON chart description that points at CSV columns.

    Each series is ``{"csv": path, "x": column, "y": column, "label": str}``.
    CSV paths are stored relative to the spec file. Every referenced CSV
    is checked before anything is written.
    """
    out_path = Path(out_path)
    if not series:
        raise PlotSpecError("plot spec needs at least one series")
    base = out_path.parent.resolve()
    entries = []
    for s in series:
        csv = Path(s["csv"])
        _check_csv(csv, [s["x"], s["y"]])
        rel = os.path.relpath(csv.resolve(), base)
        entries.append({"data": Path(rel).as_posix(), "x": s["x"], "y": s["y"],
                        "label": s.get("label", s["y"])})
    spec = {
        "schema": PLOT_SPEC_SCHEMA,
        "title": title,
        "mark": mark,
        "x": {"label": x_label or entries[0]["x"]},
        "y": {"label": y_label or entries[0]["y"]},
        "series": entries,
    }
    out_path.write_text(json.dumps(spec, indent=2) + "\n")
    return out_path
