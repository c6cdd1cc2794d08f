import math

import numpy as np
import pytest

from fading_capacity import ChannelModel, DiscreteMeasure


@pytest.fixture(scope="session")
def scalar_model():
    """M = N = 1, unit noise, unit isotropic fading variance."""
    return ChannelModel.isotropic(1, 1, 1.0, 1.0)


def random_hermitian_pd(rng, n, ridge=0.1):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return a @ a.conj().T / n + ridge * np.eye(n)


def random_model(rng, M, N, noise_var=1.0):
    return ChannelModel(M, N, noise_var, random_hermitian_pd(rng, M * N))


def random_input(rng, N, scale=1.0):
    return scale * (rng.standard_normal(N) + 1j * rng.standard_normal(N))


def radial_measure(ts, ws):
    """Scalar-channel measure with atoms sqrt(t) on the real axis."""
    atoms = np.array([[math.sqrt(t) + 0j] for t in ts])
    return DiscreteMeasure(atoms, ws)
