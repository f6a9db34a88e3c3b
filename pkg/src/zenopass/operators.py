"""Dense complex linear algebra for small Hilbert spaces.

Operators are plain ``numpy`` complex arrays of shape ``(dim, dim)``. States
travel either as raw arrays or wrapped in :class:`QuantumState`, which keeps
track of the basis in force and whether the norm is allowed to decay.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

DEFAULT_DEGENERACY_TOL = 1e-8


class DimensionError(ValueError):
    """Operands have incompatible dimensions."""


class HermiticityError(ValueError):
    """An operator expected to be Hermitian is not."""


def as_operator(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"operator must be square, got shape {m.shape}")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(a).T


def hermitian_defect(a: np.ndarray) -> float:
    """Largest entrywise |A - A^dagger|."""
    a = as_operator(a)
    return float(np.max(np.abs(a - dagger(a)))) if a.size else 0.0


def is_hermitian(a: np.ndarray, tol: float = 1e-12) -> bool:
    return hermitian_defect(a) <= tol


def require_hermitian(a: np.ndarray, tol: float = 1e-10, name: str = "operator") -> np.ndarray:
    a = as_operator(a)
    defect = hermitian_defect(a)
    if defect > tol:
        raise HermiticityError(f"{name} is not Hermitian: max |A - A^dagger| = {defect:.3e}")
    return a


def hc(a: np.ndarray) -> np.ndarray:
    """Return ``A + A^dagger`` (the "+ H.c." completion)."""
    return a + dagger(a)


def ket_bra(ket: np.ndarray, bra: np.ndarray) -> np.ndarray:
    return np.outer(ket, np.conj(bra))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = as_operator(a)
    b = as_operator(b)
    if a.shape != b.shape:
        raise DimensionError(f"cannot commute {a.shape} with {b.shape}")
    return a @ b - b @ a


# --------------------------------------------------------------------------
# states
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class QuantumState:
    """A pure vector or a density matrix over a named, ordered basis.

    ``decayed`` marks states produced by non-Hermitian evolution, whose norm
    (or trace) is allowed to fall below one.
    """

    data: np.ndarray
    basis: str = "bare"
    decayed: bool = False

    def __post_init__(self):
        arr = np.array(self.data, dtype=complex)
        if arr.ndim == 1:
            pass
        elif arr.ndim == 2 and arr.shape[0] == arr.shape[1]:
            pass
        else:
            raise DimensionError(f"state must be a vector or square matrix, got {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @classmethod
    def pure(cls, vector, basis: str = "bare", decayed: bool = False) -> "QuantumState":
        return cls(np.asarray(vector, dtype=complex).reshape(-1), basis, decayed)

    @classmethod
    def density(cls, matrix, basis: str = "bare", decayed: bool = False) -> "QuantumState":
        return cls(as_operator(matrix), basis, decayed)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def is_pure_vector(self) -> bool:
        return self.data.ndim == 1

    @property
    def rho(self) -> np.ndarray:
        if self.is_pure_vector:
            return np.outer(self.data, np.conj(self.data))
        return np.array(self.data)

    def trace(self) -> float:
        if self.is_pure_vector:
            return float(np.vdot(self.data, self.data).real)
        return float(np.trace(self.data).real)

    def check(self, norm_tol: float = 1e-9, herm_tol: float = 1e-12) -> None:
        """Raise ``ValueError`` if the state violates its invariants."""
        if not np.all(np.isfinite(self.data)):
            raise ValueError("state contains non-finite entries")
        tr = self.trace()
        if not self.decayed and abs(tr - 1.0) > norm_tol:
            raise ValueError(f"state is not normalized: trace {tr!r}")
        if self.decayed and tr > 1.0 + norm_tol:
            raise ValueError(f"decayed state has trace above one: {tr!r}")
        if not self.is_pure_vector:
            if hermitian_defect(self.data) > herm_tol:
                raise ValueError("density matrix is not Hermitian")
            if np.linalg.eigvalsh(self.data).min() < -norm_tol:
                raise ValueError("density matrix has negative eigenvalues")


StateLike = Union[QuantumState, np.ndarray, Sequence[complex]]


def as_density(s: StateLike) -> np.ndarray:
    """Density matrix for a state given as ``QuantumState``, vector or matrix."""
    if isinstance(s, QuantumState):
        return s.rho
    arr = np.asarray(s, dtype=complex)
    if arr.ndim == 1:
        return np.outer(arr, np.conj(arr))
    return as_operator(arr)


def expectation(a: np.ndarray, s: StateLike) -> complex:
    """``<psi|A|psi>`` for vectors, ``Tr(A rho)`` for density matrices."""
    a = as_operator(a)
    data = s.data if isinstance(s, QuantumState) else np.asarray(s, dtype=complex)
    if data.shape[0] != a.shape[0]:
        raise DimensionError(f"operator dim {a.shape[0]} != state dim {data.shape[0]}")
    if data.ndim == 1:
        return complex(np.vdot(data, a @ data))
    return complex(np.trace(a @ data))


# --------------------------------------------------------------------------
# spectra
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns
    groups: tuple = field(default_factory=tuple)  # tuple of index tuples

    def group_values(self) -> list[float]:
        return [float(np.mean(self.eigenvalues[list(g)])) for g in self.groups]

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ dagger(v)


def fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate ``v`` so its largest-magnitude component is real and positive.

    Ties within 1e-12 are broken by the lowest index.
    """
    mags = np.abs(v)
    k = int(np.flatnonzero(mags >= mags.max() - 1e-12)[0])
    return v * (np.conj(v[k]) / mags[k])


def group_degenerate(values: np.ndarray, tol: float) -> tuple:
    """Split ascending ``values`` into runs whose neighbours differ by <= tol."""
    if len(values) == 0:
        return ()
    groups = [[0]]
    for i in range(1, len(values)):
        if values[i] - values[i - 1] <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return tuple(tuple(g) for g in groups)


def hermitian_eigendecomposition(a: np.ndarray, degeneracy_tol: float = DEFAULT_DEGENERACY_TOL) -> Spectrum:
    if degeneracy_tol <= 0:
        raise ValueError("degeneracy_tol must be positive")
    a = require_hermitian(a, tol=1e-10)
    # symmetrize so eigh sees an exactly Hermitian input
    w, v = np.linalg.eigh((a + dagger(a)) / 2)
    v = np.column_stack([fix_phase(v[:, i]) for i in range(v.shape[1])]) if v.size else v
    return Spectrum(eigenvalues=w, eigenvectors=v, groups=group_degenerate(w, degeneracy_tol))


def projector_from_columns(vectors: Sequence[np.ndarray], dim: int | None = None, tol: float = 1e-10) -> np.ndarray:
    """Orthogonal projector onto the span of orthonormal ``vectors``.

    ``dim`` is only needed for an empty list.
    """
    if len(vectors) == 0:
        if dim is None:
            raise ValueError("dim is required for an empty vector list")
        return np.zeros((dim, dim), dtype=complex)
    m = np.column_stack([np.asarray(v, dtype=complex) for v in vectors])
    gram = dagger(m) @ m
    err = float(np.max(np.abs(gram - np.eye(m.shape[1]))))
    if err > tol:
        raise ValueError(f"vectors are not orthonormal (max Gram deviation {err:.3e})")
    return m @ dagger(m)
