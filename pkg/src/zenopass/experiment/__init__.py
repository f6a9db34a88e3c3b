"""Config-driven scenario runs, sweeps and figure presets."""

from .config import ConfigError, ScenarioConfig, load_config, parse_config
from .output import PlotSpecError, emit_plot_spec
from .runner import PointFailure, RunManifest, run_scenario, simulate_point, sweep

__all__ = [
    "ConfigError",
    "PlotSpecError",
    "PointFailure",
    "RunManifest",
    "ScenarioConfig",
    "emit_plot_spec",
    "load_config",
    "parse_config",
    "run_scenario",
    "simulate_point",
    "sweep",
]
