"""Two Lambda atoms in two fiber-linked cavities, single-excitation sector.

Basis order (atoms A B, cavity photons c1 c2, fiber photon f)::

    phi1 = |fg,00,0>   phi2 = |fe,00,0>   phi3 = |ff,01,0>   phi4 = |ff,10,0>
    phi5 = |ff,00,1>   phi6 = |gf,00,0>   phi7 = |ef,00,0>

``H_I`` couples the chain phi2 - phi3 - phi5 - phi4 - phi7 with strengths
g, lambda, lambda, g. The lasers drive phi1 <-> phi2 (Omega2) and
phi6 <-> phi7 (Omega1). All quantities are in units of ``g``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Literal, Mapping

import numpy as np

from .control import ControlChannel, ControlSet, Law
from .operators import QuantumState, fix_phase, hc, ket_bra
from .zeno import ZenoDecomposition, rough_hamiltonian, zeno_decompose

DIM = 7
BASIS_LABELS = ("phi1", "phi2", "phi3", "phi4", "phi5", "phi6", "phi7")
BASIS_KETS = ("|fg00 0>", "|fe00 0>", "|ff01 0>", "|ff10 0>", "|ff00 1>", "|gf00 0>", "|ef00 0>")
BASIS_NAME = "cavity-fiber-7"

# zero-based basis indices
PHI1, PHI2, PHI3, PHI4, PHI5, PHI6, PHI7 = range(7)

# which basis states lose population through each decay channel
PHYSICAL_CHANNELS: Mapping[str, tuple] = {
    "atom": (PHI2, PHI7),
    "cavity": (PHI3, PHI4),
    "fiber": (PHI5,),
}

# (kappa, beta_c, beta_f) / g reported for two experimental platforms
EXPERIMENTAL_PRESETS: Mapping[str, tuple] = {
    "fabry-perot": (0.0035, 0.0047, 0.0002),
    "circuit-qed": (0.0021, 0.0004, 0.0004),
}

# how the (kappa, beta_c, beta_f) triple is read onto (atom, cavity, fiber) rates
ASSIGNMENTS: Mapping[str, tuple] = {
    "kappa-atom": ("atom", "cavity", "fiber"),
    "kappa-cavity": ("cavity", "atom", "fiber"),
}

SQRT2 = np.sqrt(2.0)


def basis_vector(i: int) -> np.ndarray:
    v = np.zeros(DIM, dtype=complex)
    v[i] = 1.0
    return v


def _link(i: int, j: int) -> np.ndarray:
    m = np.zeros((DIM, DIM), dtype=complex)
    m[i, j] = 1.0
    return hc(m)


@dataclass(frozen=True)
class ModelParams:
    g: float = 1.0
    lam: float = 1.0
    omega1: float = 0.0
    omega2: float = 0.0
    gamma_atom: float = 0.0
    gamma_cavity: float = 0.0
    gamma_fiber: float = 0.0

    def __post_init__(self):
        for name in ("g", "lam", "omega1", "omega2", "gamma_atom", "gamma_cavity", "gamma_fiber"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
        if self.g <= 0 or self.lam <= 0:
            raise ValueError("g and lambda must be positive")
        if self.omega1 < 0 or self.omega2 < 0:
            raise ValueError("Rabi couplings must be >= 0")

    @classmethod
    def bell(cls, omega2: float, sign: str = "+", **kw) -> "ModelParams":
        """Parameters whose Zeno passage ends in the Bell state of the given sign."""
        ratio = SQRT2 - 1 if sign == "+" else SQRT2 + 1
        return cls(omega1=ratio * omega2, omega2=omega2, **kw)

    @property
    def omega(self) -> float:
        return float(np.hypot(self.omega1, self.omega2))

    @property
    def delta(self) -> float:
        return float(self.lam / np.sqrt(self.g**2 + 2 * self.lam**2))

    @property
    def passage_time(self) -> float:
        """First time ``pi / (Omega delta)`` at which the Zeno passage hits the Bell state."""
        if self.omega == 0:
            raise ValueError("passage time undefined for Omega = 0")
        return float(np.pi / (self.omega * self.delta))

    def with_uniform_gamma(self, gamma: float) -> "ModelParams":
        return replace(self, gamma_atom=gamma, gamma_cavity=gamma, gamma_fiber=gamma)

    def with_preset(self, preset: str, assignment: str = "kappa-atom") -> "ModelParams":
        triple = EXPERIMENTAL_PRESETS[preset]
        names = ASSIGNMENTS[assignment]
        return replace(self, **{f"gamma_{n}": r for n, r in zip(names, triple)})


def build_hamiltonians(p: ModelParams) -> tuple:
    """Return ``(H_laser, H_I)`` in the 7-vector basis."""
    h_laser = p.omega2 * _link(PHI1, PHI2) + p.omega1 * _link(PHI6, PHI7)
    h_int = (p.g * _link(PHI2, PHI3) + p.lam * _link(PHI3, PHI5)
             + p.lam * _link(PHI5, PHI4) + p.g * _link(PHI4, PHI7))
    return h_laser, h_int


@dataclass(frozen=True)
class DressedBasis:
    psi: tuple  # psi1..psi7 as vectors in the bare basis
    energies: tuple  # H_I eigenvalue of each psi
    delta: float
    omega: float
    zeno: ZenoDecomposition

    def matrix(self) -> np.ndarray:
        return np.column_stack(self.psi)


def dark_state(p: ModelParams) -> np.ndarray:
    v = np.zeros(DIM, dtype=complex)
    v[PHI2] = 1.0
    v[PHI5] = -p.g / p.lam
    v[PHI7] = 1.0
    return p.delta * v


def dressed_basis(p: ModelParams) -> DressedBasis:
    """Eigenbasis of ``H_I`` labelled psi1..psi7.

    psi1 = phi1, psi3 = phi6 and psi2 is the normalized dark state of the
    chain, so that {psi1, psi2, psi3} spans Z1. psi4..psi7 carry H_I
    eigenvalues g, -g, +sqrt(g^2 + 2 lam^2), -sqrt(g^2 + 2 lam^2).
    """
    _, h_int = build_hamiltonians(p)
    zeno = zeno_decompose(h_int)
    zeta = np.sqrt(p.g**2 + 2 * p.lam**2)
    wanted = (p.g, -p.g, zeta, -zeta)
    chain = []
    for w in wanted:
        sub = min(zeno.subspaces, key=lambda s: abs(zeno.coupling * s.eigenvalue - w))
        if sub.dim != 1 or abs(sub.eigenvalue - w) > 1e-8:
            raise RuntimeError(f"no isolated H_I eigenvector at {w}")
        chain.append(fix_phase(sub.vectors[:, 0]))
    psi = (basis_vector(PHI1), dark_state(p), basis_vector(PHI6), *chain)
    return DressedBasis(psi=psi, energies=(0.0, 0.0, 0.0) + wanted, delta=p.delta,
                        omega=p.omega, zeno=zeno)


def analytic_state(p: ModelParams, t: float) -> QuantumState:
    """Zeno-limit state at time ``t`` starting from phi1, in the bare basis."""
    om = p.omega
    if om == 0:
        raise ValueError("analytic passage needs Omega > 0")
    d = p.delta
    c, s = np.cos(om * d * t), np.sin(om * d * t)
    amp1 = (p.omega1**2 + p.omega2**2 * c) / om**2
    amp2 = -1j * p.omega2 * s / om
    amp3 = p.omega1 * p.omega2 * (c - 1) / om**2
    vec = amp1 * basis_vector(PHI1) + amp2 * dark_state(p) + amp3 * basis_vector(PHI6)
    return QuantumState.pure(vec, basis=BASIS_NAME)


def analytic_amplitudes(p: ModelParams, times: np.ndarray) -> np.ndarray:
    """Vectorized :func:`analytic_state`; returns shape ``(len(times), 7)``."""
    times = np.asarray(times, dtype=float)
    om, d = p.omega, p.delta
    c, s = np.cos(om * d * times), np.sin(om * d * times)
    a1 = (p.omega1**2 + p.omega2**2 * c) / om**2
    a2 = -1j * p.omega2 * s / om
    a3 = p.omega1 * p.omega2 * (c - 1) / om**2
    return (np.outer(a1, basis_vector(PHI1)) + np.outer(a2, dark_state(p))
            + np.outer(a3, basis_vector(PHI6)))


def bell_target(sign: Literal["+", "-"] = "+") -> QuantumState:
    if sign not in ("+", "-"):
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")
    s = 1.0 if sign == "+" else -1.0
    vec = (basis_vector(PHI1) + s * basis_vector(PHI6)) / SQRT2
    return QuantumState.pure(vec, basis=BASIS_NAME)


def dissipator(p: ModelParams, mapping: Mapping[str, tuple] = PHYSICAL_CHANNELS) -> np.ndarray:
    """Anti-Hermitian decay term ``-i sum_j (gamma_j / 2) |phi_j><phi_j|``."""
    rates = {"atom": p.gamma_atom, "cavity": p.gamma_cavity, "fiber": p.gamma_fiber}
    diag = np.zeros(DIM)
    for channel, states in mapping.items():
        r = rates[channel]
        if r < 0:
            raise ValueError(f"negative decay rate for {channel}: {r}")
        for i in states:
            diag[i] += r
    return -0.5j * np.diag(diag).astype(complex)


def explicit_rough_hamiltonian(p: ModelParams) -> np.ndarray:
    """Closed-form rough acceleration term for this model."""
    d2 = p.delta**2
    r = p.g / p.lam
    m = np.zeros((DIM, DIM), dtype=complex)
    m[PHI1, PHI2] = p.omega2 * (d2 - 1)
    m[PHI1, PHI5] = -p.omega2 * d2 * r
    m[PHI1, PHI7] = p.omega2 * d2
    m[PHI2, PHI6] = p.omega1 * d2
    m[PHI5, PHI6] = -p.omega1 * d2 * r
    m[PHI6, PHI7] = p.omega1 * (d2 - 1)
    return hc(m)


def generic_rough_hamiltonian(p: ModelParams) -> np.ndarray:
    """The same term built from the Zeno decomposition (target-block reading)."""
    h_laser, h_int = build_hamiltonians(p)
    return rough_hamiltonian(zeno_decompose(h_int), h_laser, "target-block")


def build_complete_dressed_set(p: ModelParams, gain: float = 10.0, compensation: bool = True,
                               drive_duplicate: bool = True) -> ControlSet:
    """Thirteen dressed-state couplings between Z1 and the other subspaces.

    Channel 0 is the compensation channel and shares its operator
    (psi1 <-> psi4) with channel 1. With ``compensation=False`` channel 0 is
    held at zero; with ``drive_duplicate=False`` channel 1 is held at zero.
    """
    db = dressed_basis(p)
    psi = db.psi

    def link(a, b):
        return hc(ket_bra(psi[a], psi[b]))

    ops = [link(0, 3)]
    ops += [link(0, k) for k in (3, 4, 5, 6)]
    ops += [link(1, k) for k in (3, 4, 5, 6)]
    ops += [link(2, k) for k in (3, 4, 5, 6)]
    labels = ["H_c0"] + [f"H_c{j}" for j in range(1, 13)]
    channels = []
    for j, (op, lab) in enumerate(zip(ops, labels)):
        if j == 0:
            law = Law.COMPENSATION if compensation else Law.CONSTANT
            channels.append(ControlChannel(op, law, label=lab))
        elif j == 1 and not drive_duplicate:
            channels.append(ControlChannel(op, Law.CONSTANT, label=lab))
        else:
            channels.append(ControlChannel(op, Law.PROPORTIONAL, gain=gain, label=lab))
    return ControlSet(tuple(channels))


def build_realizable_set(p: ModelParams | None = None, gain: float = 0.6, u5: float = 0.0,
                         law: Law | str = Law.PROPORTIONAL, amplitude: float = 0.0) -> ControlSet:
    """Five couplings that exist physically in the setup; channel 5 is held constant.

    There is no compensation channel. ``law`` applies to channels 1..4
    (``proportional`` with ``gain`` or ``bang-bang`` with ``amplitude``).
    """
    law = Law(law)
    ops = [
        _link(PHI1, PHI2),
        _link(PHI6, PHI7),
        _link(PHI2, PHI3),
        _link(PHI4, PHI7),
        _link(PHI3, PHI5) + _link(PHI4, PHI5),
    ]
    channels = [ControlChannel(op, law, gain=gain, amplitude=amplitude, label=f"H_c{j + 1}")
                for j, op in enumerate(ops[:4])]
    channels.append(ControlChannel(ops[4], Law.CONSTANT, constant_value=u5, label="H_c5"))
    return ControlSet(tuple(channels))
