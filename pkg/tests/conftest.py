import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from sedvlf.channel import channel_stats, regularize

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_regularized(rng):
    """Random regularized (p0, p1) away from the zero-capacity line."""
    while True:
        p0 = rng.uniform(0.005, 0.45)
        p1 = rng.uniform(p0, 1 - p0)
        if 1 - p0 - p1 > 0.05:
            return p0, p1


def random_state(rng, M, cap):
    """Dirichlet posterior over M messages, shrunk toward uniform until max < cap.

    Needs cap > 1/M.
    """
    assert cap * M > 1
    alpha = rng.choice([0.05, 0.3, 1.0, 5.0])
    rho = rng.dirichlet(np.full(M, alpha))
    rho = np.maximum(rho, 1e-300)
    rho /= rho.sum()
    u = 1.0 / M
    if rho.max() >= cap:
        s = (cap - u) / (rho.max() - u) * rng.uniform(0.5, 0.999)
        rho = u + s * (rho - u)
        rho /= rho.sum()
    assert rho.max() < cap and rho.min() > 0
    return rho


@pytest.fixture
def bsc():
    spec = regularize(0.11, 0.11)
    return spec, channel_stats(spec)


@pytest.fixture
def bac():
    spec = regularize(0.03, 0.22)
    return spec, channel_stats(spec)
