import numpy as np
import pytest

from crosscodiff import CovMatrix2, Theta
from crosscodiff.var_process import spectral_radius


def random_stationary_theta(rng, rho_max=0.9):
    while True:
        th = Theta.from_matrix(rng.uniform(-0.95, 0.95, size=(2, 2)))
        if spectral_radius(th) <= rho_max:
            return th


def random_cov(rng):
    scale = rng.uniform(0.1, 1.0, size=2)
    corr = rng.uniform(-0.95, 0.95)
    return CovMatrix2(scale[0], corr * np.sqrt(scale[0] * scale[1]), scale[1])


@pytest.fixture
def rng():
    return np.random.default_rng(20200517)


@pytest.fixture(scope="session")
def model_sweep():
    """50 (Theta, cov) pairs with spectral radius <= 0.9."""
    gen = np.random.default_rng(4242)
    return [(random_stationary_theta(gen), random_cov(gen)) for _ in range(50)]


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
