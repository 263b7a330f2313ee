import numpy as np
import pytest

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


@pytest.fixture
def rng():
    return np.random.default_rng(20080915)


def random_matrix(rng, n, m=None):
    m = n if m is None else m
    return rng.normal(size=(n, m)) + 1j * rng.normal(size=(n, m))


def random_hermitian(rng, n, scale=1.0):
    g = random_matrix(rng, n)
    return scale * 0.5 * (g + g.conj().T)


def random_density(rng, n, rank=None):
    g = random_matrix(rng, n, n if rank is None else rank)
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def random_unitary(rng, n):
    q, r = np.linalg.qr(random_matrix(rng, n))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_qubit(rng):
    a = rng.uniform()
    b = rng.uniform() * np.sqrt(a * (1 - a)) * np.exp(1j * rng.uniform(0, 2 * np.pi))
    return a, complex(b)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
