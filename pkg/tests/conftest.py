import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)


def random_povm(n, rng, rank=None):
    """n random PSD operators normalized to sum to the identity."""
    ps = [_psd(rng, rank) for _ in range(n)]
    s = sum(ps)
    lam, w = np.linalg.eigh(s)
    t = w @ np.diag(lam ** -0.5) @ w.conj().T
    return [0.5 * (t @ p @ t + (t @ p @ t).conj().T) for p in ps]


def random_density(rng, rank=None):
    p = _psd(rng, rank)
    return p / np.trace(p).real


def _psd(rng, rank):
    k = 4 if rank is None else rank
    g = rng.standard_normal((4, k)) + 1j * rng.standard_normal((4, k))
    return g @ g.conj().T
