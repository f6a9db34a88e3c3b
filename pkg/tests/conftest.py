import numpy as np
import pytest

from zenopass.cavity import ModelParams, build_hamiltonians


@pytest.fixture
def canonical():
    """g = lambda = 1, Bell ratio at Omega2 = 1."""
    return ModelParams.bell(1.0)


@pytest.fixture
def hamiltonians(canonical):
    return build_hamiltonians(canonical)


def random_hermitian(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (a + a.conj().T) / 2


def random_density(rng, dim, rank=None):
    rank = dim if rank is None else rank
    a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


ACCEPTANCE_LINES: list = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line for the acceptance summary."""

    def _record(criterion: str, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'}  criterion {criterion}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
