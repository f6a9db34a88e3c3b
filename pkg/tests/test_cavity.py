import numpy as np
import pytest

from zenopass.cavity import (
    ASSIGNMENTS,
    DIM,
    EXPERIMENTAL_PRESETS,
    PHI1,
    PHI2,
    PHI3,
    PHI4,
    PHI5,
    PHI6,
    PHI7,
    ModelParams,
    analytic_amplitudes,
    analytic_state,
    basis_vector,
    bell_target,
    build_complete_dressed_set,
    build_hamiltonians,
    build_realizable_set,
    dark_state,
    dissipator,
    dressed_basis,
    explicit_rough_hamiltonian,
    generic_rough_hamiltonian,
)
from zenopass.control import Law
from zenopass.dynamics import fidelity
from zenopass.zeno import effective_hamiltonian, zeno_decompose


def test_coupling_chain_structure(hamiltonians):
    h_laser, h_int = hamiltonians
    expected = {(PHI2, PHI3): 1, (PHI3, PHI5): 1, (PHI5, PHI4): 1, (PHI4, PHI7): 1}
    for (i, j), v in expected.items():
        assert h_int[i, j] == v and h_int[j, i] == v
    assert np.count_nonzero(h_int) == 8
    assert h_laser[PHI1, PHI2] == 1.0
    assert h_laser[PHI6, PHI7] == pytest.approx(np.sqrt(2) - 1)
    assert np.count_nonzero(h_laser) == 4


def test_delta_and_omega():
    p = ModelParams.bell(0.5)
    assert p.delta == pytest.approx(1 / np.sqrt(3))
    assert p.omega == pytest.approx(np.sqrt(4 - 2 * np.sqrt(2)) * 0.5)
    assert p.passage_time == pytest.approx(10.06, abs=0.01)
    assert ModelParams(g=2.0, lam=1.0).delta == pytest.approx(1 / np.sqrt(6))


def test_passage_time_needs_drive():
    with pytest.raises(ValueError):
        ModelParams().passage_time


@pytest.mark.parametrize("kw", [{"g": 0}, {"lam": -1}, {"omega1": -0.1}, {"gamma_atom": np.nan}])
def test_parameter_validation(kw):
    with pytest.raises(ValueError):
        ModelParams(**kw)


def test_dark_state_is_normalized_kernel_vector(canonical):
    _, h_int = build_hamiltonians(canonical)
    v = dark_state(canonical)
    assert np.linalg.norm(v) == pytest.approx(1)
    assert np.allclose(h_int @ v, 0, atol=1e-14)


def test_dressed_basis_is_orthonormal_eigenbasis(canonical):
    db = dressed_basis(canonical)
    _, h_int = build_hamiltonians(canonical)
    m = db.matrix()
    assert np.allclose(m.conj().T @ m, np.eye(7), atol=1e-12)
    for vec, e in zip(db.psi, db.energies):
        assert np.allclose(h_int @ vec, e * vec, atol=1e-12)
    assert db.energies[3:] == pytest.approx((1, -1, np.sqrt(3), -np.sqrt(3)))


def test_analytic_state_boundary_values():
    p = ModelParams.bell(0.5)
    start = analytic_state(p, 0.0)
    assert np.allclose(start.data, basis_vector(PHI1))
    assert fidelity(bell_target("+"), analytic_state(p, p.passage_time)) == pytest.approx(1, abs=1e-12)
    q = ModelParams.bell(0.5, sign="-")
    assert fidelity(bell_target("-"), analytic_state(q, q.passage_time)) == pytest.approx(1, abs=1e-12)


def test_analytic_state_solves_zeno_dynamics():
    # d psi/dt = -i H_eff psi validates delta and Omega inside the closed form
    p = ModelParams.bell(0.7)
    h_laser, h_int = build_hamiltonians(p)
    h_eff = effective_hamiltonian(zeno_decompose(h_int), h_laser)
    h = 1e-5
    for t in (0.3, 2.0, 5.5):
        lhs = (analytic_state(p, t + h).data - analytic_state(p, t - h).data) / (2 * h)
        rhs = -1j * h_eff @ analytic_state(p, t).data
        assert np.allclose(lhs, rhs, atol=1e-8)


def test_vectorized_amplitudes_match_scalar():
    p = ModelParams.bell(0.3)
    times = np.linspace(0, 20, 7)
    amps = analytic_amplitudes(p, times)
    for t, a in zip(times, amps):
        assert np.allclose(a, analytic_state(p, t).data)


def test_bell_targets_are_orthogonal():
    assert fidelity(bell_target("+"), bell_target("+")) == pytest.approx(1)
    assert fidelity(bell_target("+"), basis_vector(PHI1)) == pytest.approx(0.5)
    assert fidelity(bell_target("+"), bell_target("-")) == pytest.approx(0)
    with pytest.raises(ValueError):
        bell_target("x")


def test_dissipator_channel_mapping():
    p = ModelParams(gamma_atom=0.1, gamma_cavity=0.2, gamma_fiber=0.3)
    d = np.diag(dissipator(p)).imag * -2
    assert d == pytest.approx([0, 0.1, 0.2, 0.2, 0.3, 0, 0.1])


def test_experimental_presets_and_assignments():
    p = ModelParams().with_preset("fabry-perot", "kappa-atom")
    assert (p.gamma_atom, p.gamma_cavity, p.gamma_fiber) == EXPERIMENTAL_PRESETS["fabry-perot"]
    q = ModelParams().with_preset("circuit-qed", "kappa-cavity")
    kappa, beta_c, beta_f = EXPERIMENTAL_PRESETS["circuit-qed"]
    assert (q.gamma_cavity, q.gamma_atom, q.gamma_fiber) == (kappa, beta_c, beta_f)
    assert set(ASSIGNMENTS) == {"kappa-atom", "kappa-cavity"}


def test_uniform_gamma_decays_all_excited_states():
    d = dissipator(ModelParams().with_uniform_gamma(0.04))
    assert np.allclose(-2 * np.diag(d).imag, [0, 0.04, 0.04, 0.04, 0.04, 0, 0.04])


def test_explicit_rough_matches_generic_on_random_draws():
    rng = np.random.default_rng(11)
    for _ in range(50):
        g, lam = rng.uniform(0.2, 3.0, size=2)
        o1, o2 = rng.uniform(0.0, 2.0, size=2)
        p = ModelParams(g=g, lam=lam, omega1=o1, omega2=o2)
        assert np.max(np.abs(explicit_rough_hamiltonian(p) - generic_rough_hamiltonian(p))) <= 1e-10


def _target_projector(p):
    psi = dressed_basis(p).psi
    return sum(np.outer(v, v.conj()) for v in psi[:3])


def test_complete_set_couples_target_to_outside(canonical):
    cset = build_complete_dressed_set(canonical)
    assert len(cset) == 13
    assert [ch.label for ch in cset] == [f"H_c{j}" for j in range(13)]
    assert cset[0].law is Law.COMPENSATION and cset.has_compensation
    assert np.array_equal(cset[0].operator, cset[1].operator)
    pt = _target_projector(canonical)
    q = np.eye(DIM) - pt
    for ch in cset:
        assert np.allclose(pt @ ch.operator @ pt, 0, atol=1e-12)
        assert np.allclose(q @ ch.operator @ q, 0, atol=1e-12)
        assert ch.gain in (0.0, 10.0)


def test_complete_set_options(canonical):
    no_comp = build_complete_dressed_set(canonical, compensation=False)
    assert not no_comp.has_compensation and no_comp[0].law is Law.CONSTANT
    no_dup = build_complete_dressed_set(canonical, drive_duplicate=False)
    assert no_dup[1].law is Law.CONSTANT and no_dup[1].constant_value == 0


def test_realizable_set_layout():
    cset = build_realizable_set(gain=0.6, u5=0.2)
    assert len(cset) == 5 and not cset.has_compensation
    assert cset[0].operator[PHI1, PHI2] == 1 and cset[1].operator[PHI6, PHI7] == 1
    assert cset[2].operator[PHI2, PHI3] == 1 and cset[3].operator[PHI4, PHI7] == 1
    assert cset[4].operator[PHI3, PHI5] == 1 and cset[4].operator[PHI4, PHI5] == 1
    assert cset[4].law is Law.CONSTANT and cset[4].constant_value == 0.2
    bb = build_realizable_set(law="bang-bang", amplitude=0.1)
    assert all(ch.law is Law.BANG_BANG for ch in bb.channels[:4])
