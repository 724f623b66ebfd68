import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20211)


def random_psd(rng, n=16, samples=None, scale=1.0):
    """Wishart-style sample covariance, full rank when samples >= n."""
    samples = samples or 2 * n
    a = rng.normal(size=(n, samples)) * scale
    return a @ a.T / samples


def random_orthonormal(rng, n, k):
    q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    return q[:, :k]


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
