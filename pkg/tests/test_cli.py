import json

import pytest

from zenopass.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, main
from zenopass.experiment.figures import FIGURES, figure_preset


def _write(path, data):
    path.write_text(json.dumps(data))
    return path


def test_run_subcommand(tmp_path):
    cfg = _write(tmp_path / "c.json", {"scenario": "rough", "model": {"omega2": 1.0}})
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "out")]) == EXIT_OK
    assert (tmp_path / "out" / "traj_0000.csv").exists()


def test_env_var_sets_default_output(tmp_path, monkeypatch):
    monkeypatch.setenv("ZENOPASS_OUT", str(tmp_path / "envout"))
    cfg = _write(tmp_path / "c.json", {"scenario": "zeno-baseline", "model": {"omega2": 1.0}})
    assert main(["run", "--config", str(cfg)]) == EXIT_OK
    assert (tmp_path / "envout" / "summary.csv").exists()


def test_config_error_exit_code(tmp_path, capsys):
    cfg = _write(tmp_path / "c.json", {"scenario": "custom", "model": {"omegaa": 1}})
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_CONFIG
    assert "model.omegaa" in capsys.readouterr().err
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG


def test_numerical_failure_exit_code(tmp_path):
    cfg = _write(tmp_path / "c.json", {"scenario": "custom", "model": {"omega2": 0.5, "g": 60.0},
                                       "integrator": {"dt": 0.05, "t_max": 2.0, "record_stride": 1}})
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_NUMERICAL


def test_figure_subcommand(tmp_path):
    assert main(["figure", "fig2b", "--out", str(tmp_path)]) == EXIT_OK
    assert (tmp_path / "omega2-0.5" / "traj_0000.csv").exists()
    assert json.loads((tmp_path / "leakage.plot.json").read_text())["series"][0]["data"] == "omega2-0.5/traj_0000.csv"
    with pytest.raises(SystemExit):
        main(["figure", "fig9"])


def test_plot_spec_subcommand(tmp_path):
    csv = tmp_path / "t.csv"
    csv.write_text("t,fidelity\n0,0.5\n1,0.9\n")
    assert main(["plot-spec", str(csv), "--y", "fidelity"]) == EXIT_OK
    assert (tmp_path / "t.plot.json").exists()
    assert main(["plot-spec", str(csv), "--y", "V"]) == EXIT_CONFIG


def test_every_figure_preset_parses():
    from zenopass.experiment.config import parse_config

    for name in FIGURES:
        for panel in figure_preset(name).panels:
            parse_config(panel.config)
