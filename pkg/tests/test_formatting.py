import math

import pytest

from graftlab.errors import OutputError
from graftlab.formatting import emit_csv, emit_svg, read_csv, summary_path, svg_path, to_frame

COLUMNS = ["t", "value", "label"]


def test_csv_round_trip_keeps_every_digit(tmp_path):
    rows = [
        {"t": 100.0, "value": math.pi, "label": "a"},
        {"t": 1e4, "value": 1.0 / 3.0, "label": "b"},
        {"t": 0.1, "value": 2.0 ** -40, "label": "c"},
    ]
    out = tmp_path / "rows.csv"
    emit_csv(rows, COLUMNS, out, ["first line", "second line"])
    frame = read_csv(out)
    assert list(frame.columns) == COLUMNS
    assert frame["value"].tolist() == [row["value"] for row in rows]
    assert frame["t"].tolist() == [row["t"] for row in rows]
    assert summary_path(out).read_text(encoding="utf-8") == "first line\nsecond line\n"


def test_empty_rows_give_header_only(tmp_path):
    out = tmp_path / "empty.csv"
    emit_csv([], COLUMNS, out)
    assert out.read_text(encoding="utf-8") == "t,value,label\n"
    assert not summary_path(out).exists()


def test_missing_directories_are_created(tmp_path):
    out = tmp_path / "nested" / "deeper" / "rows.csv"
    emit_csv([{"t": 1.0, "value": 2.0, "label": "x"}], COLUMNS, out)
    assert out.exists()
    assert [p.name for p in out.parent.iterdir()] == ["rows.csv"]


def test_unwritable_target_raises_output_error(tmp_path):
    blocker = tmp_path / "taken.csv"
    blocker.mkdir()
    with pytest.raises(OutputError):
        emit_csv([{"t": 1.0, "value": 2.0, "label": "x"}], COLUMNS, blocker)
    assert [p.name for p in tmp_path.iterdir()] == ["taken.csv"]


def test_companion_paths(tmp_path):
    out = tmp_path / "qc.csv"
    assert summary_path(out).name == "qc.csv.summary.txt"
    assert svg_path(out).name == "qc.svg"


def test_svg_chart(tmp_path):
    frame = to_frame([{"t": 10.0, "value": 1.0, "label": "a"}, {"t": 100.0, "value": 0.5, "label": "a"}], COLUMNS)
    out = tmp_path / "chart.svg"
    emit_svg(frame, out, x="t", y="value", title="bound", log_x=True)
    assert "<svg" in out.read_text(encoding="utf-8")
