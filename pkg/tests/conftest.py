import numpy as np
import pytest

from eigengap_doa.spectral import CsdSet


def random_psd_matrices(rng, n):
    """``n`` random 2x2 Hermitian PSD matrices ``B B^H`` with complex Gaussian ``B``."""
    b = rng.standard_normal((n, 2, 2)) + 1j * rng.standard_normal((n, 2, 2))
    return b @ np.conj(np.swapaxes(b, 1, 2))


def random_csd(rng, n):
    freq = 75.0 + 2.0 * np.arange(n)
    return CsdSet.from_matrices(freq, random_psd_matrices(rng, n))


def rank1_bin(azimuth_deg, power=1.0):
    u = np.array([np.cos(np.deg2rad(azimuth_deg)), np.sin(np.deg2rad(azimuth_deg))])
    return power * np.outer(u, u)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
