import numpy as np
import pytest

from collspec.model import ChainModel

ACCEPTANCE_LINES = []


def random_laplacian(rng, n, extra_prob=0.3):
    w = np.zeros((n, n))

    def bond(i, j, a):
        w[i, i] += a
        w[j, j] += a
        w[i, j] -= a
        w[j, i] -= a

    for i in range(n - 1):
        bond(i, i + 1, rng.uniform(0.5, 2.0))
    for i in range(n):
        for j in range(i + 2, n):
            if rng.random() < extra_prob:
                bond(i, j, rng.uniform(0.0, 0.5))
    return w


def random_stable_model(rng, n, lam_max=0.05, mass=1.0, hbar=1.0, sextic=True):
    """Connected random W, nonnegative symmetric K with positive diagonal."""
    W = random_laplacian(rng, n)
    K = rng.uniform(0.0, 0.3, (n, n))
    K = 0.5 * (K + K.T)
    K[np.diag_indices(n)] = rng.uniform(0.2, 1.0, n)
    coeffs = (rng.uniform(0.1, 1.0),) + ((rng.uniform(0.0, 0.2),) if sextic else ())
    return ChainModel(n, mass, hbar, rng.uniform(0.0, lam_max), W, K, coeffs)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def orthonormal_complement_basis(rng, n):
    """Random orthogonal matrix whose first column is the uniform vector."""
    from collspec.renormalize import dct_matrix

    a = dct_matrix(n)
    if n == 1:
        return a
    q, _ = np.linalg.qr(rng.normal(size=(n - 1, n - 1)))
    rot = np.eye(n)
    rot[1:, 1:] = q
    return a @ rot


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
