"""Lyapunov feedback fields that push the state back into the target Zeno subspace.

Every law is built from the per-channel drive strength

    c_j(rho) = Tr(-i rho [H_I^2, H_cj])

which is the rate at which channel ``j`` changes ``V = Tr(H_I^2 rho)`` per
unit field. The drift term ``c_H0`` is the same expression with ``H_0`` in
place of ``H_cj``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .operators import DimensionError, StateLike, as_density, as_operator, require_hermitian


class Law(str, enum.Enum):
    PROPORTIONAL = "proportional"
    BANG_BANG = "bang-bang"
    CONSTANT = "constant"
    COMPENSATION = "compensation"


@dataclass(frozen=True)
class ControlChannel:
    operator: np.ndarray
    law: Law = Law.PROPORTIONAL
    gain: float = 0.0
    amplitude: float = 0.0
    constant_value: float = 0.0
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "law", Law(self.law))
        op = require_hermitian(self.operator, tol=1e-12, name=f"control operator {self.label!r}")
        op = op.copy()
        op.setflags(write=False)
        object.__setattr__(self, "operator", op)
        if self.gain < 0:
            raise ValueError(f"channel {self.label!r}: gain must be >= 0 for V to be nonincreasing")
        if self.law is Law.BANG_BANG and self.amplitude <= 0:
            raise ValueError(f"channel {self.label!r}: bang-bang amplitude must be > 0")


@dataclass(frozen=True)
class ControlSet:
    channels: tuple

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))
        n_comp = sum(ch.law is Law.COMPENSATION for ch in self.channels)
        if n_comp > 1:
            raise ValueError("a control set may hold at most one compensation channel")
        dims = {ch.operator.shape for ch in self.channels}
        if len(dims) > 1:
            raise DimensionError(f"control operators have mixed shapes {sorted(dims)}")

    def __len__(self) -> int:
        return len(self.channels)

    def __iter__(self):
        return iter(self.channels)

    def __getitem__(self, i) -> ControlChannel:
        return self.channels[i]

    @property
    def has_compensation(self) -> bool:
        return any(ch.law is Law.COMPENSATION for ch in self.channels)

    @property
    def operators(self) -> list:
        return [ch.operator for ch in self.channels]

    def with_law(self, law: Law, **params) -> "ControlSet":
        """Copy with every proportional/bang-bang channel switched to ``law``."""
        law = Law(law)
        out = []
        for ch in self.channels:
            if ch.law in (Law.PROPORTIONAL, Law.BANG_BANG):
                kw = dict(operator=ch.operator, law=law, gain=ch.gain, amplitude=ch.amplitude,
                          constant_value=ch.constant_value, label=ch.label)
                kw.update(params)
                ch = ControlChannel(**kw)
            out.append(ch)
        return ControlSet(tuple(out))

    def scaled_gains(self, c: float) -> "ControlSet":
        return ControlSet(tuple(
            ControlChannel(ch.operator, ch.law, ch.gain * c, ch.amplitude, ch.constant_value, ch.label)
            for ch in self.channels
        ))


@dataclass(frozen=True)
class GuardConfig:
    eps: float = 1e-9  # compensation is skipped when |c_0| < eps
    u_max: float = 10.0  # clamp on every field, units of g
    deadband: float = 1e-9  # bang-bang outputs 0 when |c_j| < deadband


@dataclass(frozen=True)
class FieldSample:
    time: float
    values: np.ndarray
    vdot: float
    guard_active: bool = False


class FieldEvaluator:
    """A control set compiled against fixed ``H_0`` and ``H_I``.

    Precomputes ``[H_I^2, H_cj]`` so that each evaluation is a single
    contraction over the channel stack.
    """

    def __init__(self, cset: ControlSet, h0: Optional[np.ndarray], h_int: np.ndarray,
                 guard: GuardConfig = GuardConfig()):
        h_int = as_operator(h_int)
        self.dim = h_int.shape[0]
        self.cset = cset
        self.guard = guard
        h2 = h_int @ h_int
        if len(cset) and cset[0].operator.shape != h_int.shape:
            raise DimensionError("control operators do not match H_I dimension")
        ops = np.array([ch.operator for ch in cset]) if len(cset) else np.zeros((0,) + h_int.shape, complex)
        self.ops = ops
        self.comms = np.einsum("ij,njk->nik", h2, ops) - np.einsum("nij,jk->nik", ops, h2)
        if h0 is not None:
            h0 = as_operator(h0)
            if h0.shape != h_int.shape:
                raise DimensionError("H_0 does not match H_I dimension")
            self.drift_comm = h2 @ h0 - h0 @ h2
        else:
            self.drift_comm = None
        # Tr(rho C) = sum_ij rho_ij C_ji, so one matvec against the flattened rho gives all channels
        rows = self.comms.transpose(0, 2, 1).reshape(len(cset), -1)
        if self.drift_comm is not None:
            rows = np.vstack([rows, self.drift_comm.T.reshape(1, -1)])
        self._rows = rows
        self.ops_flat = ops.reshape(len(cset), -1)
        laws = [ch.law for ch in cset]
        self.prop = np.array([l is Law.PROPORTIONAL for l in laws], dtype=bool)
        self.bang = np.array([l is Law.BANG_BANG for l in laws], dtype=bool)
        self.const = np.array([l is Law.CONSTANT for l in laws], dtype=bool)
        self.comp_index = next((i for i, l in enumerate(laws) if l is Law.COMPENSATION), None)
        self.gains = np.array([ch.gain for ch in cset], dtype=float)
        self.amps = np.array([ch.amplitude for ch in cset], dtype=float)
        self.constants = np.array([ch.constant_value for ch in cset], dtype=float)
        # u = slope * c + offset covers proportional and constant channels in one pass
        self._slope = np.where(self.prop, -self.gains, 0.0)
        self._offset = np.where(self.const, self.constants, 0.0)
        self._any_bang = bool(self.bang.any())
        self._n = len(cset)

    def _traces(self, rho: np.ndarray) -> np.ndarray:
        # Re(-i z) = Im(z)
        return (self._rows @ rho.reshape(-1)).imag

    def strengths(self, rho: np.ndarray) -> np.ndarray:
        """``c_j = Tr(-i rho [H_I^2, H_cj])`` for every channel."""
        return self._traces(rho)[: len(self.cset)]

    def drift(self, rho: np.ndarray) -> float:
        if self.drift_comm is None:
            return 0.0
        return float(self._traces(rho)[-1])

    def __call__(self, rho: np.ndarray):
        """Return ``(u, c, drift, guard_active)`` for density matrix ``rho``."""
        tr = (self._rows @ rho.reshape(-1)).imag
        c = tr[: self._n]
        d = float(tr[-1]) if self.drift_comm is not None else 0.0
        u = self._slope * c + self._offset
        if self._any_bang:
            cb = c[self.bang]
            ab = self.amps[self.bang]
            db = self.guard.deadband
            u[self.bang] = np.where(cb < -db, ab, np.where(cb > db, -ab, 0.0))
        guard = False
        if self.comp_index is not None:
            denom = c[self.comp_index]
            if self.drift_comm is not None and abs(denom) >= self.guard.eps:
                u[self.comp_index] = -d / denom
            else:
                u[self.comp_index] = 0.0
                guard = True
        um = self.guard.u_max
        if np.abs(u).max(initial=0.0) > um:
            guard = True
            u = np.clip(u, -um, um)
        return u, c, d, guard


def _validate_state(rho: np.ndarray, dim: int) -> np.ndarray:
    if rho.shape != (dim, dim):
        raise DimensionError(f"state dim {rho.shape[0]} != operator dim {dim}")
    if not np.all(np.isfinite(rho)):
        raise ValueError("state contains NaN or inf")
    return rho


def control_fields(rho: StateLike, h0: Optional[np.ndarray], h_int: np.ndarray, cset: ControlSet,
                   guard: GuardConfig = GuardConfig(), time: float = 0.0) -> FieldSample:
    """Evaluate every channel with its own law and return a :class:`FieldSample`."""
    ev = FieldEvaluator(cset, h0, h_int, guard)
    r = _validate_state(as_density(rho), ev.dim)
    u, c, d, g = ev(r)
    return FieldSample(time, u, d + float(u @ c), g)


def control_fields_proportional(rho: StateLike, h0: Optional[np.ndarray], h_int: np.ndarray,
                                cset: ControlSet, guard: GuardConfig = GuardConfig(),
                                time: float = 0.0) -> FieldSample:
    """Lyapunov proportional law; a compensation channel, if present, cancels the drift."""
    return control_fields(rho, h0, h_int, cset.with_law(Law.PROPORTIONAL), guard, time)


def control_fields_bangbang(rho: StateLike, h_int: np.ndarray, cset: ControlSet,
                            guard: GuardConfig = GuardConfig(), h0: Optional[np.ndarray] = None,
                            time: float = 0.0) -> FieldSample:
    """Square-pulse law: ``+K`` where ``c_j < 0``, ``-K`` where ``c_j > 0``."""
    return control_fields(rho, h0, h_int, cset.with_law(Law.BANG_BANG), guard, time)


def vdot(rho: StateLike, h0: np.ndarray, h_int: np.ndarray, cset: ControlSet,
         fields: FieldSample | Sequence[float]) -> float:
    """``dV/dt = c_H0 + sum_j u_j c_j`` for the given field values."""
    ev = FieldEvaluator(cset, h0, h_int)
    r = _validate_state(as_density(rho), ev.dim)
    u = np.asarray(fields.values if isinstance(fields, FieldSample) else fields, dtype=float)
    if u.shape != (len(cset),):
        raise DimensionError(f"expected {len(cset)} field values, got {u.shape}")
    return ev.drift(r) + float(u @ ev.strengths(r))
