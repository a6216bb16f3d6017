import numpy as np
import pytest


def unit(n, i, j):
    e = np.zeros((n, n), dtype=complex)
    e[i, j] = 1.0
    return e


def basis_vec(n, i):
    v = np.zeros(n, dtype=complex)
    v[i] = 1.0
    return v


def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
