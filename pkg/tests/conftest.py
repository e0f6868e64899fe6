import numpy as np
import pytest

from copra.spectral import SpectralData, decompose

_ACCEPTANCE_LINES = []


def record_acceptance(line):
    _ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_spectral(seed, r=20, M=None, N=None):
    rng = np.random.default_rng(seed)
    sigma_sq = rng.uniform(0.05, 5.0, r) * r
    b_sq = rng.exponential(1.0, r) * sigma_sq
    return SpectralData(sigma_sq, b_sq, M or r, N or r)


def gaussian_model(n, seed, snr_db=10.0, m=None, complex_=False):
    """Square (or m x n) Gaussian model with unit-variance signal at a given SNR."""
    m = m or n
    rng = np.random.default_rng(seed)
    H = rng.standard_normal((m, n))
    x = rng.standard_normal(n)
    if complex_:
        H = (H + 1j * rng.standard_normal((m, n))) / np.sqrt(2)
    Hx = H @ x
    sz = np.vdot(Hx, Hx).real / (m * 10 ** (snr_db / 10))
    z = np.sqrt(sz) * rng.standard_normal(m)
    if complex_:
        z = np.sqrt(sz / 2) * (rng.standard_normal(m) + 1j * rng.standard_normal(m))
    return H, x, Hx + z, sz


@pytest.fixture
def single_mode():
    return SpectralData([1.0], [1.0], 1, 1)


@pytest.fixture
def gaussian50():
    H, x, y, sz = gaussian_model(50, seed=7)
    dec, data = decompose(H, y)
    return H, x, y, dec, data
