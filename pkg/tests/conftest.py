import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def random_hermitian(rng, n, scale=1.0):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * 0.5 * (a + a.conj().T)


def random_density(rng, n, sector_weight=1.0):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = a @ a.conj().T
    return sector_weight * rho / np.trace(rho).real


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)


def haar_unitary(rng, n):
    z = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def planted_hamiltonian(rng, n_max=8, min_weight=0.02):
    """Random Hermitian matrix with at least one degenerate level and a random sink site.

    Levels are at least 0.5 apart.  Instances where some level has less than
    ``min_weight`` of the sink site's weight are redrawn, so every decaying
    mode relaxes within a few thousand time units.
    """
    while True:
        n = int(rng.integers(3, n_max + 1))
        sizes = []
        while sum(sizes) < n:
            sizes.append(int(rng.integers(1, min(4, n - sum(sizes)) + 1)))
        if max(sizes) < 2:
            continue
        levels = np.cumsum(rng.uniform(0.5, 1.5, len(sizes)))
        levels -= levels.mean()
        energies = np.repeat(levels, sizes)
        q = haar_unitary(rng, n)
        h = (q * energies) @ q.conj().T
        h = 0.5 * (h + h.conj().T)
        sink = int(rng.integers(1, n + 1))
        bounds = np.cumsum([0] + sizes)
        weights = [np.sum(np.abs(q[sink - 1, a:b]) ** 2) for a, b in zip(bounds[:-1], bounds[1:])]
        if min(weights) >= min_weight:
            return h, sink, sizes


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number, checks):
    """Store one PASS/FAIL line for an acceptance criterion and return overall success.

    ``checks`` is a list of ``(label, ok, detail)`` tuples.
    """
    ok = all(c[1] for c in checks)
    detail = "; ".join(f"{label}={'ok' if good else 'FAIL'} ({info})" for label, good, info in checks)
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
