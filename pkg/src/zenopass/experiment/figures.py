"""Figure presets: named bundles of scenario configs plus figure-level plot specs."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .. import __version__
from ..cavity import ModelParams
from .config import parse_config
from .output import emit_plot_spec
from .runner import run_scenario

OMEGA2_GRID = {"start": 0.02, "stop": 1.2, "num": 60}
GAMMA_GRID = {"start": 0.0, "stop": 0.05, "num": 26}
BASELINE_GAMMAS = [0.0, 0.0005, 0.001, 0.002]
# controlled sweeps over the full Rabi grid use a coarser step to stay inside the time budget
SWEEP_DT = 2e-3
BANG_BANG_K = 0.1


def omega2_for_passage_time(t_s: float, g: float = 1.0, lam: float = 1.0) -> float:
    """Omega2 (Bell ratio, '+' target) whose Zeno passage time is ``t_s``."""
    unit = ModelParams.bell(1.0, g=g, lam=lam).passage_time
    return unit / t_s


@dataclass(frozen=True)
class Panel:
    name: str
    config: dict


@dataclass(frozen=True)
class FigurePreset:
    name: str
    description: str
    panels: tuple
    overlays: tuple = field(default_factory=tuple)  # (spec file, title, x, y, [(panel, csv, column, label)])


def _fig2a() -> FigurePreset:
    return FigurePreset("fig2a", "Zeno baseline: maximum fidelity against passage time, with decay inset", (
        Panel("baseline-sweep", {
            "scenario": "zeno-baseline", "write_trajectories": False,
            "sweep": [{"param": "gamma", "values": BASELINE_GAMMAS},
                      {"param": "omega2", "values": OMEGA2_GRID}],
        }),
    ))


def _fig2b() -> FigurePreset:
    return FigurePreset("fig2b", "Zeno baseline trajectories and subspace leakage", (
        Panel("omega2-0.5", {"scenario": "zeno-baseline", "model": {"omega2": 0.5},
                             "integrator": {"t_max": 30.0}}),
        Panel("omega2-0.05", {"scenario": "zeno-baseline", "model": {"omega2": 0.05},
                              "integrator": {"t_max": 120.0}}),
    ), overlays=(
        ("leakage.plot.json", "subspace populations, omega2 = 0.5", "t", "population",
         [("omega2-0.5", "traj_0000.csv", f"P_Z{k}", f"Z{k}") for k in range(1, 6)]),
    ))


def _fig3() -> FigurePreset:
    return FigurePreset("fig3", "Complete dressed-state feedback against rough acceleration and baseline", (
        Panel("complete-sweep", {
            "scenario": "flexible-complete", "write_trajectories": False, "integrator": {"dt": SWEEP_DT},
            "sweep": [{"param": "omega2", "values": OMEGA2_GRID}],
        }),
        Panel("rough-sweep", {
            "scenario": "rough", "write_trajectories": False,
            "sweep": [{"param": "omega2", "values": OMEGA2_GRID}],
        }),
        Panel("complete", {"scenario": "flexible-complete", "model": {"omega2": 1.0}, "window": [1.0, 5.0],
                           "integrator": {"t_max": 10.0}}),
        Panel("rough", {"scenario": "rough", "model": {"omega2": 1.0}, "integrator": {"t_max": 10.0}}),
        Panel("baseline", {"scenario": "zeno-baseline", "model": {"omega2": 1.0}, "integrator": {"t_max": 10.0}}),
    ), overlays=(
        ("comparison.plot.json", "fidelity at omega2 = 1", "t", "fidelity",
         [(p, "traj_0000.csv", "fidelity", p) for p in ("complete", "rough", "baseline")]),
    ))


def _fig4() -> FigurePreset:
    return FigurePreset("fig4", "Robustness of the complete feedback set against uniform decay", (
        Panel("complete-gamma", {"scenario": "dissipative-sweep", "model": {"omega2": 1.0},
                                 "integrator": {"t_max": 10.0},
                                 "sweep": [{"param": "gamma", "values": GAMMA_GRID}]}),
        Panel("baseline-gamma", {"scenario": "zeno-baseline", "model": {"omega2": 0.05},
                                 "write_trajectories": False, "metric": "peak",
                                 "sweep": [{"param": "gamma", "values": GAMMA_GRID}]}),
    ))


def _fig5() -> FigurePreset:
    om = omega2_for_passage_time(12.4)
    return FigurePreset("fig5", "Realizable feedback set: speedup and experimental decay presets", (
        Panel("realizable-sweep", {
            "scenario": "flexible-realizable", "write_trajectories": False, "integrator": {"dt": SWEEP_DT},
            "sweep": [{"param": "omega2", "values": OMEGA2_GRID}],
        }),
        Panel("baseline-sweep", {
            "scenario": "zeno-baseline", "write_trajectories": False,
            "sweep": [{"param": "omega2", "values": OMEGA2_GRID}],
        }),
        Panel("realizable", {"scenario": "flexible-realizable", "model": {"omega2": om},
                             "integrator": {"t_max": 30.0}}),
        Panel("baseline", {"scenario": "zeno-baseline", "model": {"omega2": om}, "integrator": {"t_max": 30.0}}),
        Panel("presets", {
            "scenario": "flexible-realizable", "write_trajectories": False,
            "sweep": [{"param": "preset", "values": ["fabry-perot", "circuit-qed"]},
                      {"param": "assignment", "values": ["kappa-atom", "kappa-cavity"]},
                      {"param": "omega2", "values": [0.4, 0.5, 0.6]}],
        }),
    ), overlays=(
        ("comparison.plot.json", "realizable feedback against baseline", "t", "fidelity",
         [(p, "traj_0000.csv", "fidelity", p) for p in ("realizable", "baseline")]),
    ))


def _fig6() -> FigurePreset:
    # scheduled passage at 9.8 puts the square-pulse fidelity peak at about 10.8
    om = omega2_for_passage_time(9.8)
    panels = (
        Panel("proportional", {"scenario": "flexible-realizable", "model": {"omega2": om},
                               "integrator": {"t_max": 20.0}}),
        Panel("bangbang", {"scenario": "bangbang", "model": {"omega2": om},
                           "control": {"amplitude": BANG_BANG_K}, "integrator": {"t_max": 20.0}}),
    )
    series = [(p, "traj_0000.csv", f"u_{j}", f"{p} u_{j}") for p in ("proportional", "bangbang")
              for j in (1, 2, 3, 4)]
    return FigurePreset("fig6", "Smooth against square-pulse feedback waveforms", panels, overlays=(
        ("waveforms.plot.json", "u_j(t): proportional against bang-bang", "t", "u_j / g", series),
        ("fidelity.plot.json", "fidelity: proportional against bang-bang", "t", "fidelity",
         [(p, "traj_0000.csv", "fidelity", p) for p in ("proportional", "bangbang")]),
    ))


FIGURES: dict[str, Callable[[], FigurePreset]] = {
    "fig2a": _fig2a, "fig2b": _fig2b, "fig3": _fig3, "fig4": _fig4, "fig5": _fig5, "fig6": _fig6,
}


def figure_preset(name: str) -> FigurePreset:
    if name not in FIGURES:
        raise KeyError(f"unknown figure {name!r}; choose from {', '.join(FIGURES)}")
    return FIGURES[name]()


def run_figure(name: str, out_dir: str | Path, workers: int = 1) -> dict:
    """Run every panel of a figure preset into ``out_dir/<panel>/`` and write overlay specs."""
    t0 = time.perf_counter()
    preset = figure_preset(name)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    panels = {}
    for panel in preset.panels:
        cfg = parse_config({"name": f"{name}-{panel.name}", **panel.config})
        m = run_scenario(cfg, out / panel.name, workers)
        panels[panel.name] = {"config_hash": m.config_hash, "files": m.files, "n_points": m.n_points,
                              "n_failed": m.n_failed}
    files = []
    for spec_name, title, x, y, series in preset.overlays:
        entries = [{"csv": out / p / csv, "x": x, "y": col, "label": lab} for p, csv, col, lab in series]
        files.append(emit_plot_spec(out / spec_name, entries, title=title, x_label=x, y_label=y).name)
    manifest = {"figure": name, "description": preset.description, "version": __version__,
                "panels": panels, "files": files, "duration_s": round(time.perf_counter() - t0, 3)}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest
