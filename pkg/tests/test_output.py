import json

import pytest

from zenopass.experiment.output import PlotSpecError, emit_plot_spec, format_value, read_csv, write_columns, write_csv


def test_number_format_is_twelve_significant_digits():
    assert format_value(1 / 3) == "0.333333333333"
    assert format_value(2.0) == "2"
    assert format_value(None) == ""
    assert format_value(float("nan")) == "nan"
    assert format_value(7) == "7"
    assert format_value(True) == "1"


def test_csv_has_header_and_trailing_newline(tmp_path):
    p = write_columns(tmp_path / "a.csv", {"t": [0.0, 0.5], "fidelity": [0.5, 0.75]})
    assert p.read_text() == "t,fidelity\n0,0.5\n0.5,0.75\n"
    header, rows = read_csv(p)
    assert header == ["t", "fidelity"] and rows[1] == ["0.5", "0.75"]
    with pytest.raises(ValueError):
        write_csv(tmp_path / "b.csv", ["a", "b"], [[1]])


def test_plot_spec_references_csv_relatively(tmp_path):
    (tmp_path / "run").mkdir()
    data = write_columns(tmp_path / "run" / "traj.csv", {"t": [0, 1], "fidelity": [0.5, 1.0]})
    spec = emit_plot_spec(tmp_path / "fig.plot.json", [{"csv": data, "x": "t", "y": "fidelity"}], title="demo")
    doc = json.loads(spec.read_text())
    assert doc["series"][0]["data"] == "run/traj.csv"
    assert (doc["x"]["label"], doc["y"]["label"], doc["mark"]) == ("t", "fidelity", "line")


def test_plot_spec_multi_series(tmp_path):
    a = write_columns(tmp_path / "a.csv", {"t": [0, 1], "u_1": [0.1, -0.1], "u_2": [0, 0]})
    spec = emit_plot_spec(tmp_path / "w.plot.json", [{"csv": a, "x": "t", "y": c} for c in ("u_1", "u_2")])
    assert [s["y"] for s in json.loads(spec.read_text())["series"]] == ["u_1", "u_2"]


@pytest.mark.parametrize("content, match", [("", "empty"), ("t,fidelity\n", "no data"), ("t,V\n0,1\n", "fidelity")])
def test_plot_spec_errors_write_nothing(tmp_path, content, match):
    csv = tmp_path / "x.csv"
    csv.write_text(content)
    out = tmp_path / "x.plot.json"
    with pytest.raises(PlotSpecError, match=match):
        emit_plot_spec(out, [{"csv": csv, "x": "t", "y": "fidelity"}])
    assert not out.exists()


def test_plot_spec_missing_file(tmp_path):
    with pytest.raises(PlotSpecError, match="not found"):
        emit_plot_spec(tmp_path / "s.json", [{"csv": tmp_path / "nope.csv", "x": "t", "y": "fidelity"}])
