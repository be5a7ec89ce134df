"""CSV, SVG and summary emission for reports."""
from __future__ import annotations

import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import altair as alt
import pandas as pd

from graftlab.errors import OutputError

LOGGER = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def summary_path(path: Path) -> Path:
    return path.with_name(path.name + ".summary.txt")


def svg_path(path: Path) -> Path:
    return path.with_suffix(".svg")


def _atomic_write(path: Path, write) -> None:
    """Write through a temporary file in the target directory, then rename."""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    try:
        directory.mkdir(parents=True, exist_ok=True)
        handle, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=path.suffix or ".tmp", dir=directory)
        os.close(handle)
    except OSError as exc:
        raise OutputError(f"cannot create a temporary file next to {path}: {exc}") from exc
    try:
        write(Path(tmp))
        os.replace(tmp, path)
    except Exception as exc:
        if os.path.exists(tmp):
            os.unlink(tmp)
        if isinstance(exc, OutputError):
            raise
        raise OutputError(f"cannot write {path}: {exc}") from exc


def to_frame(rows: Iterable[Dict[str, Any]], columns: Sequence[str]) -> pd.DataFrame:
    records = list(rows)
    if not records:
        return pd.DataFrame(columns=list(columns))
    return pd.DataFrame.from_records(records, columns=list(columns))


def emit_csv(
    rows: Iterable[Dict[str, Any]],
    columns: Sequence[str],
    path: Path,
    summary: Optional[List[str]] = None,
) -> pd.DataFrame:
    """Header row plus one line per record; floats keep 17 significant digits."""
    frame = to_frame(rows, columns)
    _atomic_write(
        Path(path),
        lambda tmp: frame.to_csv(tmp, index=False, float_format=FLOAT_FORMAT, lineterminator="\n"),
    )
    LOGGER.info("Wrote %d rows to %s", len(frame), path)
    if summary is not None:
        emit_summary(summary, summary_path(Path(path)))
    return frame


def emit_summary(lines: List[str], path: Path) -> None:
    text = "\n".join(lines) + "\n"
    _atomic_write(Path(path), lambda tmp: tmp.write_text(text, encoding="utf-8"))


def read_csv(path: Path) -> pd.DataFrame:
    return pd.read_csv(path, float_precision="round_trip")


def line_chart(frame: pd.DataFrame, x: str, y: str, title: str = "", log_x: bool = False, color: Optional[str] = None) -> alt.Chart:
    scale = alt.Scale(type="log") if log_x else alt.Scale(zero=False)
    encoding = {
        "x": alt.X(f"{x}:Q", title=x, scale=scale),
        "y": alt.Y(f"{y}:Q", title=y, scale=alt.Scale(zero=False)),
        "tooltip": [x, y],
    }
    if color:
        encoding["color"] = alt.Color(f"{color}:N", title=color)
    return alt.Chart(frame).mark_line(point=True).encode(**encoding).properties(title=title, width=480, height=300)


def emit_svg(frame: pd.DataFrame, path: Path, x: str, y: str, title: str = "", log_x: bool = False, color: Optional[str] = None) -> None:
    chart = line_chart(frame, x, y, title, log_x, color)
    _atomic_write(Path(path), lambda tmp: chart.save(str(tmp), format="svg"))
    LOGGER.info("Wrote chart %s", path)
