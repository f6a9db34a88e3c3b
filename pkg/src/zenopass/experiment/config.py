"""Scenario configuration: JSON in, validated frozen dataclasses out."""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Optional

import numpy as np

from ..cavity import ASSIGNMENTS, EXPERIMENTAL_PRESETS

SCENARIOS = (
    "zeno-baseline",
    "rough",
    "flexible-complete",
    "flexible-realizable",
    "bangbang",
    "dissipative-sweep",
    "custom",
)

NUMERIC_AXES = ("omega2", "omega1", "gamma", "gamma_atom", "gamma_cavity", "gamma_fiber",
                "g", "lambda", "gain", "amplitude", "u5")
STRING_AXES = ("preset", "assignment")
SWEEP_PARAMS = NUMERIC_AXES + STRING_AXES


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key or line."""


@dataclass(frozen=True)
class ModelConfig:
    g: float = 1.0
    lam: float = 1.0
    omega2: float = 0.5
    omega1: Optional[float] = None  # None: Bell ratio (sqrt2 -/+ 1) * omega2 for the target sign
    target: str = "+"
    gamma: float = 0.0  # uniform rate on the five damped states
    gamma_atom: Optional[float] = None
    gamma_cavity: Optional[float] = None
    gamma_fiber: Optional[float] = None
    preset: Optional[str] = None
    assignment: str = "kappa-atom"


@dataclass(frozen=True)
class ControlConfig:
    set: str = "none"  # none | complete | realizable
    law: str = "proportional"  # proportional | bang-bang
    gain: Optional[float] = None
    amplitude: Optional[float] = None
    compensation: bool = True
    drive_duplicate: bool = True
    u5: float = 0.0
    rough: bool = False
    rough_mode: str = "target-block"
    eps: float = 1e-9
    u_max: float = 10.0
    deadband: float = 1e-9


@dataclass(frozen=True)
class IntegratorSettings:
    dt: float = 1e-3
    t_max: Optional[float] = None  # None: horizon_factor * passage time
    horizon_factor: float = 1.5
    record_stride: int = 10
    field_mode: str = "hold"
    normalize_control_state: bool = True


@dataclass(frozen=True)
class SweepAxis:
    param: str
    values: tuple


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    name: str = "run"
    model: ModelConfig = field(default_factory=ModelConfig)
    control: ControlConfig = field(default_factory=ControlConfig)
    integrator: IntegratorSettings = field(default_factory=IntegratorSettings)
    metric: str = "scheduled"  # scheduled | peak
    sweep: tuple = ()
    output: Optional[str] = None
    workers: int = 1
    write_trajectories: bool = True
    window: Optional[tuple] = None  # (t_lo, t_hi) for the window-minimum summary columns

    def to_dict(self) -> dict:
        d = asdict(self)
        d["sweep"] = [{"param": a.param, "values": list(a.values)} for a in self.sweep]
        return d

    def config_hash(self) -> str:
        """Hash of everything that determines the numerical output."""
        d = self.to_dict()
        for k in ("output", "workers"):
            d.pop(k)
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def points(self) -> list:
        """Cartesian product of sweep axes as a list of ``{param: value}`` dicts."""
        pts = [{}]
        for axis in self.sweep:
            pts = [dict(p, **{axis.param: v}) for p in pts for v in axis.values]
        return pts


# per-scenario defaults; user keys are merged over these
SCENARIO_DEFAULTS: dict = {
    "zeno-baseline": {"control": {"set": "none"}, "metric": "scheduled"},
    "rough": {"control": {"set": "none", "rough": True}, "metric": "scheduled"},
    "flexible-complete": {"control": {"set": "complete", "gain": 10.0}, "metric": "peak"},
    "flexible-realizable": {"control": {"set": "realizable", "gain": 0.6}, "metric": "peak"},
    "bangbang": {"control": {"set": "realizable", "law": "bang-bang"}, "metric": "peak"},
    "dissipative-sweep": {
        "control": {"set": "complete", "gain": 10.0},
        "metric": "peak",
        "sweep": [{"param": "gamma", "values": {"start": 0.0, "stop": 0.05, "num": 26}}],
    },
    "custom": {},
}


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _build(cls, data: Any, path: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected an object, got {type(data).__name__}")
    names = {f.name: f for f in fields(cls)}
    aliases = {"lambda": "lam"}
    kwargs = {}
    for key, value in data.items():
        name = aliases.get(key, key)
        if name not in names:
            raise ConfigError(f"{path}.{key}: unknown key")
        kwargs[name] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:  # pragma: no cover - guarded by the key check
        raise ConfigError(f"{path}: {exc}") from exc


def _number(v, key: str, lo: Optional[float] = None, strict: bool = False, allow_none: bool = False):
    if v is None and allow_none:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not np.isfinite(v):
        raise ConfigError(f"{key}: expected a finite number, got {v!r}")
    if lo is not None and (v <= lo if strict else v < lo):
        raise ConfigError(f"{key}: must be {'>' if strict else '>='} {lo}, got {v!r}")
    return float(v)


def _axis_values(raw, key: str, param: str) -> tuple:
    if isinstance(raw, dict):
        extra = set(raw) - {"start", "stop", "num"}
        if extra or not {"start", "stop", "num"} <= set(raw):
            raise ConfigError(f"{key}: range needs exactly start, stop, num")
        num = raw["num"]
        if isinstance(num, bool) or not isinstance(num, int) or num < 1:
            raise ConfigError(f"{key}.num: expected a positive integer")
        vals = np.linspace(_number(raw["start"], key + ".start"), _number(raw["stop"], key + ".stop"), num)
        return tuple(float(v) for v in vals)
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"{key}: expected a non-empty list or a start/stop/num range")
    if param in STRING_AXES:
        if not all(isinstance(v, str) for v in raw):
            raise ConfigError(f"{key}: {param} values must be strings")
        return tuple(raw)
    return tuple(_number(v, f"{key}[{i}]") for i, v in enumerate(raw))


def parse_config(data: dict) -> ScenarioConfig:
    """Validate a decoded JSON object and return a :class:`ScenarioConfig`."""
    if not isinstance(data, dict):
        raise ConfigError("config: top level must be an object")
    scenario = data.get("scenario")
    if scenario not in SCENARIOS:
        raise ConfigError(f"scenario: expected one of {', '.join(SCENARIOS)}, got {scenario!r}")
    merged = _merge(SCENARIO_DEFAULTS[scenario], data)
    top = {f.name for f in fields(ScenarioConfig)}
    for key in merged:
        if key not in top:
            raise ConfigError(f"{key}: unknown key")

    model = _build(ModelConfig, merged.get("model", {}), "model")
    control = _build(ControlConfig, merged.get("control", {}), "control")
    integ = _build(IntegratorSettings, merged.get("integrator", {}), "integrator")

    _number(model.g, "model.g", 0, strict=True)
    _number(model.lam, "model.lambda", 0, strict=True)
    _number(model.omega2, "model.omega2", 0)
    _number(model.omega1, "model.omega1", 0, allow_none=True)
    _number(model.gamma, "model.gamma", 0)
    for ch in ("atom", "cavity", "fiber"):
        _number(getattr(model, f"gamma_{ch}"), f"model.gamma_{ch}", 0, allow_none=True)
    if model.target not in ("+", "-"):
        raise ConfigError("model.target: expected '+' or '-'")
    if model.preset is not None and model.preset not in EXPERIMENTAL_PRESETS:
        raise ConfigError(f"model.preset: expected one of {', '.join(EXPERIMENTAL_PRESETS)}")
    if model.assignment not in ASSIGNMENTS:
        raise ConfigError(f"model.assignment: expected one of {', '.join(ASSIGNMENTS)}")

    if control.set not in ("none", "complete", "realizable"):
        raise ConfigError("control.set: expected none, complete or realizable")
    if control.law not in ("proportional", "bang-bang"):
        raise ConfigError("control.law: expected proportional or bang-bang")
    _number(control.gain, "control.gain", 0, allow_none=True)
    _number(control.amplitude, "control.amplitude", 0, strict=True, allow_none=True)
    _number(control.u5, "control.u5")
    _number(control.eps, "control.eps", 0, strict=True)
    _number(control.u_max, "control.u_max", 0, strict=True)
    _number(control.deadband, "control.deadband", 0)
    if control.rough_mode not in ("target-block", "all-blocks"):
        raise ConfigError("control.rough_mode: expected target-block or all-blocks")
    for flag in ("compensation", "drive_duplicate", "rough"):
        if not isinstance(getattr(control, flag), bool):
            raise ConfigError(f"control.{flag}: expected true or false")

    _number(integ.dt, "integrator.dt", 0, strict=True)
    _number(integ.t_max, "integrator.t_max", 0, strict=True, allow_none=True)
    _number(integ.horizon_factor, "integrator.horizon_factor", 1.0)
    if isinstance(integ.record_stride, bool) or not isinstance(integ.record_stride, int) or integ.record_stride < 1:
        raise ConfigError("integrator.record_stride: expected a positive integer")
    if integ.field_mode not in ("hold", "stage"):
        raise ConfigError("integrator.field_mode: expected hold or stage")

    sweep_raw = merged.get("sweep", [])
    if not isinstance(sweep_raw, list):
        raise ConfigError("sweep: expected a list of axes")
    axes = []
    seen = set()
    for i, ax in enumerate(sweep_raw):
        key = f"sweep[{i}]"
        if not isinstance(ax, dict) or set(ax) != {"param", "values"}:
            raise ConfigError(f"{key}: expected an object with param and values")
        param = ax["param"]
        if param not in SWEEP_PARAMS:
            raise ConfigError(f"{key}.param: unknown parameter {param!r}")
        if param in seen:
            raise ConfigError(f"{key}.param: {param!r} swept twice")
        seen.add(param)
        axes.append(SweepAxis(param, _axis_values(ax["values"], f"{key}.values", param)))

    workers = merged.get("workers", 1)
    if isinstance(workers, bool) or not isinstance(workers, int) or workers < 1:
        raise ConfigError("workers: expected an integer >= 1")
    metric = merged.get("metric", "scheduled")
    if metric not in ("scheduled", "peak"):
        raise ConfigError("metric: expected scheduled or peak")
    name = merged.get("name", "run")
    if not isinstance(name, str) or not name or "/" in name:
        raise ConfigError("name: expected a non-empty string without '/'")
    output = merged.get("output")
    if output is not None and not isinstance(output, str):
        raise ConfigError("output: expected a path string")
    wt = merged.get("write_trajectories", True)
    if not isinstance(wt, bool):
        raise ConfigError("write_trajectories: expected true or false")

    window = merged.get("window")
    if window is not None:
        if not isinstance(window, list) or len(window) != 2:
            raise ConfigError("window: expected [t_lo, t_hi]")
        lo = _number(window[0], "window[0]", 0)
        hi = _number(window[1], "window[1]", 0)
        if hi < lo:
            raise ConfigError("window: t_hi must be >= t_lo")
        window = (lo, hi)

    cfg = ScenarioConfig(scenario=scenario, name=name, model=model, control=control, integrator=integ,
                         metric=metric, sweep=tuple(axes), output=output, workers=workers,
                         write_trajectories=wt, window=window)
    if cfg.control.set == "realizable" and cfg.control.law == "bang-bang" and cfg.control.amplitude is None \
            and "amplitude" not in seen:
        raise ConfigError("control.amplitude: bang-bang law needs an amplitude K")
    return cfg


def load_config(path: str | Path) -> ScenarioConfig:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return parse_config(data)


def apply_point(cfg: ScenarioConfig, point: dict) -> ScenarioConfig:
    """Config for one sweep point, with the point's values written into model/control."""
    model = cfg.model
    control = cfg.control
    for param, value in point.items():
        if param == "lambda":
            model = replace(model, lam=value)
        elif param in ("gain", "amplitude", "u5"):
            control = replace(control, **{param: value})
        else:
            model = replace(model, **{param: value})
    return replace(cfg, model=model, control=control, sweep=())
