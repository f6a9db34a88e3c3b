"""Point simulation, sweeps and run manifests."""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .. import __version__
from ..cavity import (
    ModelParams,
    analytic_amplitudes,
    bell_target,
    build_complete_dressed_set,
    build_hamiltonians,
    build_realizable_set,
    dissipator,
    SQRT2,
)
from ..control import GuardConfig, Law
from ..dynamics import (
    FidelityCurve,
    IntegrationError,
    IntegratorConfig,
    Trajectory,
    integrate,
    max_fidelity_and_tmin,
    robust_threshold_time,
    stable_passage_time,
)
from ..operators import QuantumState
from ..zeno import rough_hamiltonian, zeno_decompose
from .config import ConfigError, ScenarioConfig, apply_point
from .output import emit_plot_spec, write_columns, write_csv

OUTPUT_ENV = "ZENOPASS_OUT"
DEFAULT_OUTPUT = "zenopass-out"
ROBUST_THRESHOLD = 0.95

SUMMARY_METRICS = ("t_s", "f_max", "t_min", "f_ts", "f_peak", "t_peak", "robust_t95",
                   "window_min_fidelity", "window_min_tracking", "final_trace", "guard_fraction")


class PointFailure(RuntimeError):
    """A single-point run whose integration failed."""


def default_output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_ENV, DEFAULT_OUTPUT))


# --------------------------------------------------------------------------
# assembling one simulation
# --------------------------------------------------------------------------


def model_params(cfg: ScenarioConfig) -> ModelParams:
    m = cfg.model
    if m.omega1 is None:
        ratio = SQRT2 - 1 if m.target == "+" else SQRT2 + 1
        omega1 = ratio * m.omega2
    else:
        omega1 = m.omega1
    p = ModelParams(g=m.g, lam=m.lam, omega1=omega1, omega2=m.omega2).with_uniform_gamma(m.gamma)
    if m.preset is not None:
        p = p.with_preset(m.preset, m.assignment)
    over = {f"gamma_{ch}": getattr(m, f"gamma_{ch}") for ch in ("atom", "cavity", "fiber")
            if getattr(m, f"gamma_{ch}") is not None}
    if over:
        p = replace(p, **over)
    return p


def build_controls(cfg: ScenarioConfig, p: ModelParams):
    c = cfg.control
    if c.set == "none":
        return None
    if c.set == "complete":
        gain = 10.0 if c.gain is None else c.gain
        cset = build_complete_dressed_set(p, gain=gain, compensation=c.compensation,
                                          drive_duplicate=c.drive_duplicate)
        if c.law == "bang-bang":
            if c.amplitude is None:
                raise ConfigError("control.amplitude: bang-bang law needs an amplitude K")
            cset = cset.with_law(Law.BANG_BANG, amplitude=c.amplitude)
        return cset
    gain = 0.6 if c.gain is None else c.gain
    if c.law == "bang-bang":
        if c.amplitude is None:
            raise ConfigError("control.amplitude: bang-bang law needs an amplitude K")
        return build_realizable_set(p, gain=gain, u5=c.u5, law=Law.BANG_BANG, amplitude=c.amplitude)
    return build_realizable_set(p, gain=gain, u5=c.u5)


def time_grid(cfg: ScenarioConfig, t_s: Optional[float]) -> IntegratorConfig:
    """Integrator config whose record ticks land exactly on the passage time."""
    it = cfg.integrator
    stride = it.record_stride
    if t_s is None:
        if it.t_max is None:
            raise ConfigError("integrator.t_max: required when both Rabi couplings vanish")
        dt, n = it.dt, stride * math.ceil(it.t_max / (it.dt * stride) - 1e-9)
    else:
        per = stride * max(1, math.ceil(t_s / (it.dt * stride) - 1e-9))
        dt = t_s / per
        horizon = it.t_max if it.t_max is not None else it.horizon_factor * t_s
        n = stride * max(1, math.ceil(horizon / (dt * stride) - 1e-9))
    return IntegratorConfig(dt=dt, t_max=n * dt, record_stride=stride, field_mode=it.field_mode,
                            normalize_control_state=it.normalize_control_state)


@dataclass(frozen=True)
class Simulation:
    """Everything needed to integrate one configuration point."""

    params: ModelParams
    h0: np.ndarray
    h_int: np.ndarray
    controls: object
    dissipator: Optional[np.ndarray]
    integrator: IntegratorConfig
    guard: GuardConfig
    target: QuantumState
    passage_time: Optional[float]

    def run(self) -> Trajectory:
        zeno = zeno_decompose(self.h_int)
        rho0 = QuantumState.pure(np.eye(self.h0.shape[0], dtype=complex)[0])
        return integrate(self.h0, self.h_int, rho0, self.integrator, controls=self.controls,
                         dissipator=self.dissipator, target=self.target, zeno=zeno, guard=self.guard)


def assemble(cfg: ScenarioConfig) -> Simulation:
    p = model_params(cfg)
    h_laser, h_int = build_hamiltonians(p)
    h0 = h_laser
    if cfg.control.rough:
        h0 = h_laser + rough_hamiltonian(zeno_decompose(h_int), h_laser, cfg.control.rough_mode)
    controls = build_controls(cfg, p)
    rates = (p.gamma_atom, p.gamma_cavity, p.gamma_fiber)
    diss = dissipator(p) if any(r > 0 for r in rates) else None
    t_s = p.passage_time if p.omega > 0 else None
    guard = GuardConfig(eps=cfg.control.eps, u_max=cfg.control.u_max, deadband=cfg.control.deadband)
    return Simulation(p, h0, h_int, controls, diss, time_grid(cfg, t_s), guard,
                      bell_target(cfg.model.target), t_s)


# --------------------------------------------------------------------------
# per-point results
# --------------------------------------------------------------------------


@dataclass
class PointResult:
    index: int
    point: dict
    metrics: dict
    columns: Optional[dict] = None
    status: str = "ok"


def trajectory_columns(traj: Trajectory, sim: Simulation) -> dict:
    cols = {"t": traj.times, "fidelity": traj.fidelity, "V": traj.violation}
    for k in range(traj.populations.shape[1]):
        cols[f"P_Z{k + 1}"] = traj.populations[:, k]
    cols["trace"] = traj.trace
    if sim.passage_time is not None:
        amps = analytic_amplitudes(sim.params, traj.times)
        tv = sim.target.data
        cols["fidelity_analytic"] = np.abs(amps @ np.conj(tv)) ** 2
        cols["tracking"] = np.real(np.einsum("ti,tij,tj->t", np.conj(amps), traj.rhos, amps))
    for k, lab in enumerate(traj.channel_labels):
        cols["u_" + lab.removeprefix("H_c")] = traj.fields[:, k]
    if traj.channel_labels:
        cols["vdot"] = traj.vdot
        cols["guard"] = traj.guard.astype(int)
    return cols


def point_metrics(traj: Trajectory, cols: dict, cfg: ScenarioConfig, t_s: Optional[float]) -> dict:
    if t_s is not None:
        f_ts = float(traj.fidelity[traj.index_of(t_s)]) if t_s <= traj.times[-1] + 1e-9 else None
        # horizon may end before t_s / 2; then the whole run is the window
        window = (0.5 * t_s, 1.5 * t_s) if traj.times[-1] >= 0.5 * t_s - 1e-9 else None
        peak = max_fidelity_and_tmin(traj, window)
    else:
        f_ts = None
        peak = max_fidelity_and_tmin(traj)
    if cfg.metric == "scheduled" and f_ts is not None:
        f_max, t_min = f_ts, t_s
    else:
        f_max, t_min = peak.f_max, peak.t_min
    wmin_f = wmin_track = None
    if cfg.window is not None:
        lo, hi = cfg.window
        m = (traj.times >= lo - 1e-9) & (traj.times <= hi + 1e-9)
        if m.any():
            wmin_f = float(traj.fidelity[m].min())
            if "tracking" in cols:
                wmin_track = float(cols["tracking"][m].min())
    guard_frac = float(traj.guard.mean()) if traj.channel_labels else 0.0
    return {
        "t_s": t_s, "f_max": f_max, "t_min": t_min, "f_ts": f_ts,
        "f_peak": peak.f_max, "t_peak": peak.t_min,
        "robust_t95": robust_threshold_time(traj, ROBUST_THRESHOLD),
        "window_min_fidelity": wmin_f, "window_min_tracking": wmin_track,
        "final_trace": float(traj.trace[-1]), "guard_fraction": guard_frac,
    }


def simulate_point(cfg: ScenarioConfig, index: int = 0, point: Optional[dict] = None,
                   keep_columns: bool = True) -> PointResult:
    """Integrate one point; numerical failure comes back as a status, not an exception."""
    point = dict(point or {})
    pcfg = apply_point(cfg, point) if point else cfg
    sim = assemble(pcfg)
    try:
        traj = sim.run()
    except (IntegrationError, FloatingPointError, np.linalg.LinAlgError) as exc:
        msg = str(exc).replace(",", ";").replace("\n", " ")
        t_s = sim.passage_time
        metrics = dict.fromkeys(SUMMARY_METRICS)
        metrics["t_s"] = t_s
        return PointResult(index, point, metrics, None, f"error: {msg}")
    cols = trajectory_columns(traj, sim)
    metrics = point_metrics(traj, cols, pcfg, sim.passage_time)
    return PointResult(index, point, metrics, cols if keep_columns else None)


def _simulate_task(args) -> PointResult:
    cfg, index, point, keep = args
    return simulate_point(cfg, index, point, keep)


# --------------------------------------------------------------------------
# runs and manifests
# --------------------------------------------------------------------------


@dataclass
class RunManifest:
    config_hash: str
    version: str
    out_dir: Path
    files: list = field(default_factory=list)
    duration_s: float = 0.0
    n_points: int = 0
    n_failed: int = 0
    results: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {"config_hash": self.config_hash, "version": self.version, "files": self.files,
                "duration_s": round(self.duration_s, 3), "n_points": self.n_points,
                "n_failed": self.n_failed}


def _map_points(cfg: ScenarioConfig, points: list, workers: int, keep: bool) -> list:
    tasks = [(cfg, i, p, keep) for i, p in enumerate(points)]
    if workers <= 1 or len(tasks) <= 1:
        return [_simulate_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        return list(pool.map(_simulate_task, tasks))


def _write_outputs(cfg: ScenarioConfig, results: list, out: Path) -> list:
    files = []
    axes = [a.param for a in cfg.sweep]
    traj_files = []
    if cfg.write_trajectories:
        for r in results:
            if r.columns is not None:
                path = write_columns(out / f"traj_{r.index:04d}.csv", r.columns)
                traj_files.append((r, path))
                files.append(path.name)
    header = ["index", *axes, *SUMMARY_METRICS, "status"]
    rows = [[r.index, *(r.point[a] for a in axes), *(r.metrics[m] for m in SUMMARY_METRICS), r.status]
            for r in results]
    summary = write_csv(out / "summary.csv", header, rows)
    files.append(summary.name)

    if traj_files:
        series = [{"csv": p, "x": "t", "y": "fidelity", "label": _point_label(r.point)}
                  for r, p in traj_files]
        files.append(emit_plot_spec(out / "fidelity.plot.json", series, title=f"{cfg.name}: fidelity",
                                    x_label="gt", y_label="fidelity").name)
        r0, p0 = traj_files[0]
        ulabels = [c for c in r0.columns if c.startswith("u_")]
        if ulabels:
            useries = [{"csv": p0, "x": "t", "y": c, "label": c} for c in ulabels]
            files.append(emit_plot_spec(out / "fields.plot.json", useries, title=f"{cfg.name}: control fields",
                                        x_label="gt", y_label="u_j / g").name)
    ok = [r for r in results if r.status == "ok"]
    if axes and ok:
        files.append(emit_plot_spec(out / "summary.plot.json",
                                    [{"csv": summary, "x": "t_min", "y": "f_max", "label": cfg.name}],
                                    title=f"{cfg.name}: maximum fidelity", x_label="g t_min",
                                    y_label="F_max", mark="point").name)
    if axes == ["omega2"] and len(ok) >= 2:
        files.append(_write_curve_metrics(out / "curve.json", ok).name)
    return files


def _point_label(point: dict) -> str:
    return ", ".join(f"{k}={v}" for k, v in point.items()) or "run"


def _write_curve_metrics(path: Path, ok: list) -> Path:
    """Metrics over the sweep's ``(t_min, f_max)`` curve."""
    t = np.array([r.metrics["t_min"] for r in ok], dtype=float)
    f = np.array([r.metrics["f_max"] for r in ok], dtype=float)
    curve = FidelityCurve(t, f)
    data = {
        "robust_t95": robust_threshold_time(curve, ROBUST_THRESHOLD),
        "stable_t95": stable_passage_time(curve, ROBUST_THRESHOLD),
    }
    path.write_text(json.dumps(data, indent=2) + "\n")
    return path


def run_scenario(cfg: ScenarioConfig, out_dir: Optional[str | Path] = None,
                 workers: Optional[int] = None) -> RunManifest:
    """Run a configuration (sweep or single point) and write all outputs.

    A single-point run whose integration fails raises
    :class:`PointFailure` after its summary is written; sweep points
    record the failure in the ``status`` column instead.
    """
    t0 = time.perf_counter()
    out = Path(out_dir) if out_dir is not None else Path(cfg.output) if cfg.output else default_output_dir()
    out.mkdir(parents=True, exist_ok=True)
    workers = cfg.workers if workers is None else workers
    if workers < 1:
        raise ConfigError("workers: expected an integer >= 1")
    points = cfg.points()
    results = _map_points(cfg, points, workers, cfg.write_trajectories)
    files = _write_outputs(cfg, results, out)
    failed = [r for r in results if r.status != "ok"]
    manifest = RunManifest(cfg.config_hash(), __version__, out, files, time.perf_counter() - t0,
                           len(results), len(failed), results)
    (out / "config.json").write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n")
    manifest.files.append("config.json")
    (out / "manifest.json").write_text(json.dumps(manifest.to_dict(), indent=2) + "\n")
    if not cfg.sweep and failed:
        raise PointFailure(failed[0].status)
    return manifest


def sweep(cfg: ScenarioConfig, out_dir: Optional[str | Path] = None,
          workers: Optional[int] = None) -> RunManifest:
    if not cfg.sweep:
        raise ConfigError("sweep: at least one axis required")
    return run_scenario(cfg, out_dir, workers)
