import numpy as np
import pytest

from kbstrip.geometry import StripGeometry, base_grid_field, to_spectral


@pytest.fixture
def small_geometry():
    return StripGeometry(B=np.pi, L=10.0, Nx=64, Ny=8)


def gaussian_sine_field(geometry, amplitude=0.3, width=1.0, center=0.0,
                        y_mode=1):
    X = geometry.x_nodes()[:, None]
    Y = geometry.y_nodes()[None, :]
    vals = amplitude * np.exp(-(((X - center) / width) ** 2)) * np.sin(
        y_mode * np.pi * Y / geometry.B
    )
    return to_spectral(base_grid_field(geometry, vals))


def random_smooth_field(geometry, rng, x_decay=0.25, y_ratio=0.5):
    """Hermitian-symmetric coefficients with a smooth spectral envelope."""
    from kbstrip.spectral import SpectralField

    k = geometry.wavenumbers()
    j = np.arange(1, geometry.Ny + 1)
    env = np.exp(-x_decay * k[:, None] ** 2) * y_ratio ** j[None, :]
    c = env * (
        rng.standard_normal(env.shape) + 1j * rng.standard_normal(env.shape)
    )
    c[geometry.Nx // 2] = 0.0
    sym = 0.5 * (c + np.conj(c[(-np.arange(geometry.Nx)) % geometry.Nx]))
    return SpectralField(coeffs=sym, geometry=geometry)
