import numpy as np
import pytest

from zenopass.operators import (
    DimensionError,
    HermiticityError,
    QuantumState,
    commutator,
    expectation,
    fix_phase,
    hermitian_eigendecomposition,
    projector_from_columns,
)
from zenopass.cavity import PHI1, PHI2, PHI3, basis_vector, build_hamiltonians, dark_state, ModelParams, PHI6

from conftest import random_density, random_hermitian


def brute_commutator(a, b):
    n = a.shape[0]
    out = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            out[i, j] = sum(a[i, k] * b[k, j] - b[i, k] * a[k, j] for k in range(n))
    return out


def test_commutator_with_itself_vanishes():
    a = random_hermitian(np.random.default_rng(0), 5)
    assert np.allclose(commutator(a, a), 0)


def test_commutator_matches_entrywise_oracle(hamiltonians):
    _, h_int = hamiltonians
    h_c3 = np.zeros((7, 7), complex)
    h_c3[PHI2, PHI3] = h_c3[PHI3, PHI2] = 1
    h2 = h_int @ h_int
    got = commutator(h2, h_c3)
    assert np.allclose(got, brute_commutator(h2, h_c3), atol=1e-14)
    assert np.max(np.abs(got + got.conj().T)) <= 1e-12  # anti-Hermitian


def test_kernel_projector_commutes_with_coupling(hamiltonians):
    _, h_int = hamiltonians
    p = projector_from_columns([basis_vector(PHI1), dark_state(ModelParams()), basis_vector(PHI6)])
    assert np.allclose(commutator(p, h_int), 0, atol=1e-12)
    assert np.allclose(p @ h_int, 0, atol=1e-12)


def test_commutator_dimension_mismatch():
    with pytest.raises(DimensionError):
        commutator(np.eye(2), np.eye(3))


def test_eigendecomposition_identity_is_one_group():
    spec = hermitian_eigendecomposition(np.eye(7))
    assert spec.groups == (tuple(range(7)),)
    assert np.allclose(spec.eigenvalues, 1)


def test_eigendecomposition_model_coupling(hamiltonians):
    _, h_int = hamiltonians
    spec = hermitian_eigendecomposition(h_int)
    s3 = np.sqrt(3)
    assert np.allclose(spec.eigenvalues, [-s3, -1, 0, 0, 0, 1, s3], atol=1e-10)
    assert [len(g) for g in spec.groups] == [1, 1, 3, 1, 1]


def test_eigenvalues_match_characteristic_polynomial_roots():
    rng = np.random.default_rng(7)
    for dim in (2, 3, 4, 5):
        a = random_hermitian(rng, dim)
        roots = np.sort(np.roots(np.poly(a)).real)
        spec = hermitian_eigendecomposition(a)
        assert np.allclose(spec.eigenvalues, roots, atol=1e-8)
        assert len(spec.groups) == dim
        v = spec.eigenvectors
        assert np.allclose(v.conj().T @ v, np.eye(dim), atol=1e-10)
        assert np.allclose(a @ v, v * spec.eigenvalues, atol=1e-10)
        assert np.allclose(spec.reconstruct(), a, atol=1e-9)


def test_eigendecomposition_rejects_non_hermitian():
    a = np.array([[0, 1], [0, 0]], dtype=complex)
    with pytest.raises(HermiticityError, match="1.000e\\+00"):
        hermitian_eigendecomposition(a)


def test_eigendecomposition_rejects_nonpositive_tolerance():
    with pytest.raises(ValueError):
        hermitian_eigendecomposition(np.eye(2), 0.0)


def test_phase_convention_makes_largest_component_positive():
    v = np.array([0.1j, -0.9, 0.3])
    w = fix_phase(v / np.linalg.norm(v))
    assert w[1].real > 0 and abs(w[1].imag) < 1e-15


def test_expectation_values(hamiltonians):
    _, h_int = hamiltonians
    h2 = h_int @ h_int
    psi = np.array([1, 1j, 0, 0, 0, 0, 0]) / np.sqrt(2)
    assert expectation(np.eye(7), psi) == pytest.approx(1)
    assert expectation(h2, basis_vector(PHI1)) == pytest.approx(0)
    assert expectation(h2, np.eye(7) / 7) == pytest.approx(8 / 7)
    assert np.trace(h2).real == pytest.approx(8)


def test_expectation_is_real_for_hermitian_on_density():
    rng = np.random.default_rng(3)
    a = random_hermitian(rng, 6)
    rho = random_density(rng, 6)
    assert abs(expectation(a, QuantumState.density(rho)).imag) <= 1e-12


def test_expectation_dimension_mismatch():
    with pytest.raises(DimensionError):
        expectation(np.eye(3), np.ones(2))


def test_projector_from_single_vector():
    p = projector_from_columns([basis_vector(0)])
    expected = np.zeros((7, 7))
    expected[0, 0] = 1
    assert np.array_equal(p, expected)


def test_projector_from_empty_list():
    assert np.array_equal(projector_from_columns([], dim=4), np.zeros((4, 4)))
    with pytest.raises(ValueError):
        projector_from_columns([])


def test_projector_rejects_non_orthonormal():
    with pytest.raises(ValueError, match="orthonormal"):
        projector_from_columns([np.array([1, 0]), np.array([1, 1]) / np.sqrt(2)])


def test_state_checks():
    QuantumState.pure([1, 0]).check()
    with pytest.raises(ValueError, match="normalized"):
        QuantumState.pure([1, 1]).check()
    QuantumState.pure([0.5, 0], decayed=True).check()
    with pytest.raises(ValueError, match="negative"):
        QuantumState.density(np.diag([1.5, -0.5])).check()
    with pytest.raises(DimensionError):
        QuantumState(np.zeros((2, 3)))


def test_state_data_is_immutable():
    s = QuantumState.pure([1, 0])
    with pytest.raises(ValueError):
        s.data[0] = 2
