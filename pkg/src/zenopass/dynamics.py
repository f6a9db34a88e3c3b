"""Fixed-step propagation of ``rho`` under drift, strong coupling and feedback.

Two ways of coupling the feedback fields to the integrator:

``hold``
    Fields are computed once from the state at the start of a step and held
    for that step. The frozen Hamiltonian is advanced with the fourth-order
    Runge-Kutta propagator ``U4 = sum_{k<=4} (-i H dt)^k / k!`` applied as
    ``rho -> U4 rho U4^dagger``. This keeps ``rho`` positive even when a field
    switches discontinuously between steps.
``stage``
    Classic RK4 on ``d rho/dt = -i (H rho - rho H^dagger)`` with the fields
    re-evaluated at every stage. Fourth order for smooth feedback laws, but it
    loses positivity when a law saturates or chatters.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .control import ControlSet, FieldEvaluator, FieldSample, GuardConfig
from .operators import DimensionError, QuantumState, StateLike, as_density, as_operator, dagger
from .zeno import ZenoDecomposition, populations_batch

CLOSED_TRACE_TOL = 1e-6
DISSIPATIVE_TRACE_TOL = 1e-9


class IntegrationError(RuntimeError):
    def __init__(self, message: str, step: int):
        super().__init__(f"{message} (step {step})")
        self.step = step


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1e-3
    t_max: float = 30.0
    record_stride: int = 10
    method: str = "rk4"
    field_mode: str = "hold"
    normalize_control_state: bool = True

    def __post_init__(self):
        if self.dt <= 0 or not np.isfinite(self.dt):
            raise ValueError("dt must be positive")
        if self.t_max < self.dt:
            raise ValueError("t_max must be at least dt")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")
        if self.method != "rk4":
            raise ValueError(f"unsupported method {self.method!r}")
        if self.field_mode not in ("hold", "stage"):
            raise ValueError(f"field_mode must be 'hold' or 'stage', got {self.field_mode!r}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_max / self.dt))


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    rhos: np.ndarray
    fidelity: np.ndarray
    violation: np.ndarray
    populations: np.ndarray
    trace: np.ndarray
    fields: np.ndarray  # (n_samples, n_channels)
    vdot: np.ndarray
    guard: np.ndarray
    channel_labels: tuple = ()
    dissipative: bool = False

    def __len__(self) -> int:
        return len(self.times)

    @property
    def states(self) -> list:
        return [QuantumState.density(r, decayed=self.dissipative) for r in self.rhos]

    @property
    def field_samples(self) -> list:
        return [FieldSample(float(t), u, float(v), bool(g))
                for t, u, v, g in zip(self.times, self.fields, self.vdot, self.guard)]

    def index_of(self, t: float) -> int:
        """Index of the sample at time ``t``; the sample must lie within half a record step."""
        i = int(np.argmin(np.abs(self.times - t)))
        step = self.times[1] - self.times[0] if len(self.times) > 1 else 0.0
        if abs(self.times[i] - t) > 0.5 * step + 1e-12:
            raise ValueError(f"no sample near t = {t}")
        return i


def _rk4_propagator(h: np.ndarray, dt: float, eye: Optional[np.ndarray] = None) -> np.ndarray:
    if eye is None:
        eye = np.eye(h.shape[0], dtype=complex)
    x = (-1j * dt) * h
    return eye + x @ (eye + x @ (eye + x @ (eye + 0.25 * x) * (1 / 3)) * 0.5)


def integrate(
    h0: np.ndarray,
    h_int: np.ndarray,
    rho0: StateLike,
    cfg: IntegratorConfig = IntegratorConfig(),
    controls: Optional[ControlSet] = None,
    dissipator: Optional[np.ndarray] = None,
    target: Optional[StateLike] = None,
    zeno: Optional[ZenoDecomposition] = None,
    guard: GuardConfig = GuardConfig(),
) -> Trajectory:
    """Propagate ``rho0`` under ``H_0 + H_I + sum_j u_j(rho) H_cj`` (+ dissipator).

    ``h0`` is everything except the strong coupling and the feedback; it is
    also the drift that a compensation channel cancels. Fidelity is measured
    against the unnormalized ``rho``; the feedback law sees the
    trace-normalized copy when ``cfg.normalize_control_state`` is set.
    """
    h0 = as_operator(h0)
    h_int = as_operator(h_int)
    rho = as_density(rho0).astype(complex)
    dim = h0.shape[0]
    if h_int.shape != h0.shape or rho.shape != h0.shape:
        raise DimensionError("H_0, H_I and rho0 must share one dimension")
    dissipative = dissipator is not None and np.any(as_operator(dissipator) != 0)
    h_static = h0 + h_int
    if dissipator is not None:
        h_static = h_static + as_operator(dissipator)

    ev = FieldEvaluator(controls, h0, h_int, guard) if controls is not None and len(controls) else None
    n_ch = len(controls) if controls is not None else 0
    labels = tuple(ch.label for ch in controls) if controls is not None else ()
    ops_flat = ev.ops_flat if ev is not None else None
    eye = np.eye(dim, dtype=complex)
    n = cfg.n_steps
    dt = cfg.dt
    stride = cfg.record_stride
    ticks = list(range(0, n + 1, stride))
    if ticks[-1] != n:
        ticks.append(n)

    rec_rho = np.empty((len(ticks), dim, dim), dtype=complex)
    rec_u = np.zeros((len(ticks), n_ch))
    rec_vdot = np.zeros(len(ticks))
    rec_guard = np.zeros(len(ticks), dtype=bool)

    def control_view(r):
        if normalize:
            tr = np.trace(r).real
            if tr <= 0:
                raise IntegrationError("state trace vanished", step)
            return r / tr
        return r

    def evaluate(r):
        u, c, d, g = ev(control_view(r))
        return u, d + float(u @ c), g

    prev_trace = np.trace(rho).real
    step = 0
    normalize = dissipative and cfg.normalize_control_state

    def check(r, k):
        nonlocal prev_trace
        if not np.all(np.isfinite(r)):
            raise IntegrationError("non-finite state encountered", k)
        tr = np.trace(r).real
        if not dissipative:
            if abs(tr - 1.0) > CLOSED_TRACE_TOL:
                raise IntegrationError(f"trace drifted to {tr:.9f} in closed evolution", k)
        elif tr > prev_trace + DISSIPATIVE_TRACE_TOL:
            raise IntegrationError("trace increased under dissipation", k)
        prev_trace = tr

    if ev is None:
        u_step = _rk4_propagator(h_static, dt)
        chunk = np.linalg.matrix_power(u_step, stride)
        rec_rho[0] = rho
        for j in range(1, len(ticks)):
            span = ticks[j] - ticks[j - 1]
            m = chunk if span == stride else np.linalg.matrix_power(u_step, span)
            rho = m @ rho @ dagger(m)
            rho = 0.5 * (rho + dagger(rho))
            check(rho, ticks[j])
            rec_rho[j] = rho
    elif cfg.field_mode == "hold":
        j = 0
        next_tick = ticks[0]
        h_flat = h_static.reshape(-1)
        for step in range(n + 1):
            u, c, d, g = ev(control_view(rho))
            if step == next_tick:
                rec_rho[j] = rho
                rec_u[j], rec_vdot[j], rec_guard[j] = u, d + float(u @ c), g
                if step:
                    check(rho, step)
                j += 1
                if step == n:
                    break
                next_tick = ticks[j]
            m = _rk4_propagator((h_flat + u @ ops_flat).reshape(dim, dim), dt, eye)
            rho = m @ rho @ m.conj().T
            rho = 0.5 * (rho + rho.conj().T)
    else:
        def deriv(r):
            u, _, _, _ = ev(control_view(r))
            h = h_static + (u @ ops_flat).reshape(dim, dim)
            return -1j * (h @ r - r @ h.conj().T)

        j = 0
        for step in range(n + 1):
            if step == ticks[j]:
                u, vd, g = evaluate(rho)
                rec_rho[j] = rho
                rec_u[j], rec_vdot[j], rec_guard[j] = u, vd, g
                if step:
                    check(rho, step)
                j += 1
                if step == n:
                    break
            k1 = deriv(rho)
            k2 = deriv(rho + 0.5 * dt * k1)
            k3 = deriv(rho + 0.5 * dt * k2)
            k4 = deriv(rho + dt * k3)
            rho = rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            rho = 0.5 * (rho + dagger(rho))

    times = np.array(ticks, dtype=float) * dt
    h2 = h_int @ h_int
    violation = np.real(np.einsum("ij,tji->t", h2, rec_rho))
    trace = np.real(np.einsum("tii->t", rec_rho))
    if target is not None:
        tv = _target_vector(target, dim)
        fid = np.real(np.einsum("i,tij,j->t", np.conj(tv), rec_rho, tv))
    else:
        fid = np.full(len(times), np.nan)
    pops = populations_batch(zeno, rec_rho) if zeno is not None else np.zeros((len(times), 0))
    return Trajectory(times, rec_rho, fid, violation, pops, trace, rec_u, rec_vdot, rec_guard,
                      labels, bool(dissipative))


def _target_vector(target: StateLike, dim: int) -> np.ndarray:
    data = target.data if isinstance(target, QuantumState) else np.asarray(target, dtype=complex)
    if data.ndim != 1:
        raise ValueError("fidelity target must be a pure state vector")
    if data.shape[0] != dim:
        raise DimensionError(f"target dim {data.shape[0]} != state dim {dim}")
    nrm = np.vdot(data, data).real
    if abs(nrm - 1.0) > 1e-9:
        raise ValueError("fidelity target must be normalized")
    return data


# --------------------------------------------------------------------------
# metrics
# --------------------------------------------------------------------------


def fidelity(target: StateLike, s: StateLike) -> float:
    """``<target| rho |target>`` with ``rho`` left unnormalized."""
    rho = as_density(s)
    tv = _target_vector(target, rho.shape[0])
    return float(np.real(np.vdot(tv, rho @ tv)))


class FidelityCurve(NamedTuple):
    """Any ``(times, fidelity)`` pair: a trajectory, or a sweep's ``(t_min, f_max)`` curve."""

    times: np.ndarray
    fidelity: np.ndarray


class FidelityPeak(NamedTuple):
    f_max: float
    t_min: float


def _curve(traj) -> tuple:
    t = np.asarray(traj.times, dtype=float)
    f = np.asarray(traj.fidelity, dtype=float)
    if t.size == 0:
        raise ValueError("empty trajectory")
    return t, f


def max_fidelity_and_tmin(traj, window: Optional[Sequence[float]] = None) -> FidelityPeak:
    """Largest fidelity and the earliest time it is reached (within 1e-9).

    ``window=(t_lo, t_hi)`` restricts the search to samples inside it.
    """
    t, f = _curve(traj)
    if window is not None:
        m = (t >= window[0] - 1e-12) & (t <= window[1] + 1e-12)
        if not m.any():
            raise ValueError(f"no samples inside window {tuple(window)}")
        t, f = t[m], f[m]
    fmax = float(np.max(f))
    i = int(np.flatnonzero(f >= fmax - 1e-9)[0])
    return FidelityPeak(fmax, float(t[i]))


def robust_threshold_time(traj, threshold: float) -> Optional[float]:
    """Earliest sampled time from which fidelity never drops below ``threshold``.

    ``traj`` may be a :class:`Trajectory` or any ``(times, fidelity)`` curve;
    samples are taken in increasing time order.
    """
    if not 0 < threshold <= 1:
        raise ValueError("threshold must lie in (0, 1]")
    t, f = _curve(traj)
    order = np.argsort(t, kind="stable")
    t, f = t[order], f[order]
    below = np.flatnonzero(~(f >= threshold))
    if below.size == 0:
        return float(t[0])
    last = below[-1]
    if last == len(t) - 1:
        return None
    return float(t[last + 1])


def stable_passage_time(curve, threshold: float = 0.95, tolerance: float = 0.0) -> Optional[float]:
    """Earliest time after which fidelity stays above ``threshold`` and stops oscillating.

    "Stops oscillating" means every later sample is at least the running
    maximum of the tail minus ``tolerance``; with the default of zero the
    tail must be nondecreasing, i.e. it approaches the Zeno limit monotonically.
    """
    t, f = _curve(curve)
    order = np.argsort(t, kind="stable")
    t, f = t[order], f[order]
    ok_from = None
    for i in range(len(t) - 1, -1, -1):
        tail = f[i:]
        if np.all(tail >= threshold) and np.all(tail >= np.maximum.accumulate(tail) - tolerance):
            ok_from = i
        else:
            break
    return None if ok_from is None else float(t[ok_from])
