"""Zeno-subspace machinery for a strong continuous coupling ``H_I = K * H_m``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence, Union

import numpy as np

from .operators import (
    DEFAULT_DEGENERACY_TOL,
    DimensionError,
    StateLike,
    as_density,
    as_operator,
    hermitian_eigendecomposition,
    projector_from_columns,
    require_hermitian,
)

TargetRule = Union[Literal["kernel"], Sequence[int]]


@dataclass(frozen=True)
class ZenoSubspace:
    eigenvalue: float  # eigenvalue of H_m; K * eigenvalue is the H_I eigenvalue
    projector: np.ndarray
    vectors: np.ndarray  # orthonormal columns spanning the subspace
    is_target: bool

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


@dataclass(frozen=True)
class ZenoDecomposition:
    source: np.ndarray
    subspaces: tuple
    coupling: float = 1.0
    degeneracy_tol: float = DEFAULT_DEGENERACY_TOL

    @property
    def dim(self) -> int:
        return self.source.shape[0]

    @property
    def dims(self) -> tuple:
        return tuple(s.dim for s in self.subspaces)

    @property
    def eigenvalues(self) -> tuple:
        return tuple(self.coupling * s.eigenvalue for s in self.subspaces)

    @property
    def projectors(self) -> tuple:
        return tuple(s.projector for s in self.subspaces)

    def target_projector(self) -> np.ndarray:
        p = np.zeros((self.dim, self.dim), dtype=complex)
        for s in self.subspaces:
            if s.is_target:
                p = p + s.projector
        return p

    @property
    def has_target(self) -> bool:
        return any(s.is_target for s in self.subspaces)


def zeno_decompose(
    h_int: np.ndarray,
    degeneracy_tol: float = DEFAULT_DEGENERACY_TOL,
    target: TargetRule = "kernel",
    coupling: float = 1.0,
) -> ZenoDecomposition:
    """Group the eigenspaces of ``h_int`` into Zeno subspaces.

    Subspaces are ordered target first, then by increasing ``|eigenvalue|``
    with the positive member of a ``+/-`` pair first. For the two-atom cavity
    chain this reproduces the conventional Z1..Z5 ordering.

    ``target`` is ``"kernel"`` (the zero-eigenvalue group, if any) or a
    sequence of indices into the ascending-eigenvalue group list.
    """
    h_int = require_hermitian(h_int)
    if coupling == 0:
        raise ValueError("coupling constant must be nonzero")
    spec = hermitian_eigendecomposition(h_int, degeneracy_tol)
    groups = spec.groups
    values = spec.group_values()
    if isinstance(target, str):
        if target != "kernel":
            raise ValueError(f"unknown target rule {target!r}")
        flags = [abs(v) <= degeneracy_tol for v in values]
    else:
        idx = set(int(i) for i in target)
        if any(i < 0 or i >= len(groups) for i in idx):
            raise IndexError(f"target index out of range for {len(groups)} groups")
        flags = [i in idx for i in range(len(groups))]

    subspaces = []
    for g, val, flag in zip(groups, values, flags):
        vecs = spec.eigenvectors[:, list(g)]
        # eigenvalues within tolerance of zero are snapped so the kernel reads exactly 0
        lam = 0.0 if abs(val) <= degeneracy_tol else val
        subspaces.append(
            ZenoSubspace(
                eigenvalue=lam / coupling,
                projector=projector_from_columns(list(vecs.T)),
                vectors=vecs,
                is_target=flag,
            )
        )
    subspaces.sort(key=lambda s: (not s.is_target, round(abs(s.eigenvalue), 9), -s.eigenvalue))
    return ZenoDecomposition(h_int, tuple(subspaces), coupling, degeneracy_tol)


def _check_dim(decomp: ZenoDecomposition, a: np.ndarray) -> None:
    if a.shape[0] != decomp.dim:
        raise DimensionError(f"dimension {a.shape[0]} does not match decomposition dim {decomp.dim}")


def effective_hamiltonian(decomp: ZenoDecomposition, h0: np.ndarray) -> np.ndarray:
    """``sum_n (K lambda_n P_n + P_n H_0 P_n)``."""
    h0 = as_operator(h0)
    _check_dim(decomp, h0)
    out = np.zeros_like(h0)
    for s in decomp.subspaces:
        p = s.projector
        out = out + decomp.coupling * s.eigenvalue * p + p @ h0 @ p
    return out


def zeno_violation(h_int: np.ndarray, s: StateLike) -> float:
    """``V = Tr(H_I^2 rho)``, the weighted sum of squared ``H_I`` eigenvalues."""
    h_int = as_operator(h_int)
    rho = as_density(s)
    if rho.shape != h_int.shape:
        raise DimensionError(f"state dim {rho.shape[0]} != operator dim {h_int.shape[0]}")
    return float(np.real(np.trace(h_int @ h_int @ rho)))


def rough_hamiltonian(
    decomp: ZenoDecomposition,
    h0: np.ndarray,
    mode: Literal["target-block", "all-blocks"] = "target-block",
) -> np.ndarray:
    """Static compensation that makes ``H_0 + H_I + H_R`` block-diagonal.

    ``target-block`` keeps only the projection of ``H_0`` onto the target
    subspace: ``P_T H_0 P_T - H_0``. ``all-blocks`` keeps every diagonal
    block: ``sum_n P_n H_0 P_n - H_0``.
    """
    h0 = as_operator(h0)
    _check_dim(decomp, h0)
    if mode == "target-block":
        if not decomp.has_target:
            raise ValueError("decomposition has no target subspace")
        p = decomp.target_projector()
        return p @ h0 @ p - h0
    if mode == "all-blocks":
        kept = sum(s.projector @ h0 @ s.projector for s in decomp.subspaces)
        return kept - h0
    raise ValueError(f"unknown rough-Hamiltonian mode {mode!r}")


def subspace_populations(decomp: ZenoDecomposition, s: StateLike) -> np.ndarray:
    rho = as_density(s)
    if rho.shape[0] != decomp.dim:
        raise DimensionError(f"state dim {rho.shape[0]} != decomposition dim {decomp.dim}")
    return np.array([np.real(np.trace(p @ rho)) for p in decomp.projectors])


def populations_batch(decomp: ZenoDecomposition, rhos: np.ndarray) -> np.ndarray:
    """Vectorized :func:`subspace_populations` over a stack of density matrices."""
    proj = np.stack(decomp.projectors)
    return np.real(np.einsum("nij,tji->tn", proj, rhos))
