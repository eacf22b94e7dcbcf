import numpy as np
import pytest

from kbstrip.errors import CapabilityError
from kbstrip.geometry import StripGeometry, synthesize
from kbstrip.spectral import (
    SpectralField,
    derivative,
    full_rhs,
    linear_symbol,
    nonlinear_rhs,
    symbol_grid,
    zero_field,
)

from conftest import gaussian_sine_field, random_smooth_field


def test_linear_symbol_values():
    # sigma = -k^2 + i (k^3 + lambda k + k^5), evaluated by hand
    assert linear_symbol(0.0, 1.0) == 0.0
    assert linear_symbol(1.0, 1.0) == pytest.approx(-1.0 + 3.0j, abs=1e-15)
    assert linear_symbol(2.0, 1.0) == pytest.approx(-4.0 + 42.0j, abs=1e-15)
    assert linear_symbol(-1.0, 4.0) == pytest.approx(-1.0 - 6.0j, abs=1e-15)
    # conjugate symmetry sigma(-k) = conj(sigma(k))
    s = linear_symbol(1.7, 2.25)
    assert linear_symbol(-1.7, 2.25) == pytest.approx(np.conj(s), rel=1e-15)


def test_symbol_grid_shape_and_damping(small_geometry):
    sig = symbol_grid(small_geometry)
    assert sig.shape == (small_geometry.Nx, small_geometry.Ny)
    assert np.all(np.real(sig) <= 0.0)


def test_derivative_order_cap(small_geometry):
    u = zero_field(small_geometry)
    with pytest.raises(CapabilityError):
        derivative(u, 4, 2)


def test_nonlinear_rhs_against_dense_quadrature_oracle():
    # reference: square the synthesized field on a dense y grid, project onto
    # the sine basis by composite trapezoid, differentiate in x spectrally
    g = StripGeometry(B=np.pi, L=10.0, Nx=64, Ny=8)
    n, A = 2, 0.7
    k = np.pi * n / g.L
    c = np.zeros((g.Nx, g.Ny), dtype=complex)
    c[n % g.Nx, 0] = 0.5 * A
    c[(-n) % g.Nx, 0] = 0.5 * A
    c[1 % g.Nx, 2] = 0.2j
    c[(-1) % g.Nx, 2] = -0.2j
    u = SpectralField(coeffs=c, geometry=g)
    nl = nonlinear_rhs(u)

    m = 4096
    y = g.B * np.arange(m + 1) / m
    vals = synthesize(u, 0, 0, y_nodes=y)
    w = g.sine_matrix(y)
    wy = np.full(m + 1, g.B / m)
    wy[0] *= 0.5
    wy[-1] *= 0.5
    sq_coeffs = (vals * vals) @ (w * wy[:, None])     # (Nx, Ny) sine coeffs
    sq_hat = np.fft.fft(sq_coeffs, axis=0) / g.Nx
    ref = -0.5j * g.wavenumbers()[:, None] * sq_hat
    ref *= g.dealias_mask()[:, None]
    assert np.max(np.abs(nl.coeffs - ref)) < 1e-9


def test_divergence_and_convective_agree_on_resolved_fields(small_geometry):
    rng = np.random.default_rng(5)
    u = random_smooth_field(small_geometry, rng)
    u = u.with_coeffs(u.coeffs * small_geometry.dealias_mask()[:, None])
    a = nonlinear_rhs(u, form="divergence")
    b = nonlinear_rhs(u, form="convective")
    scale = np.max(np.abs(a.coeffs))
    assert np.max(np.abs(a.coeffs - b.coeffs)) < 1e-11 * max(scale, 1.0)


def test_divergence_form_energy_neutral(small_geometry):
    # (u, (u^2)_x) = 0 under the periodic truncation with exact projection
    rng = np.random.default_rng(9)
    u = random_smooth_field(small_geometry, rng)
    g = small_geometry
    mask = g.dealias_mask()[:, None]
    u = u.with_coeffs(u.coeffs * mask)
    nl = nonlinear_rhs(u)
    inner = 2.0 * g.L * float(
        np.real(np.sum(np.conj(u.coeffs) * nl.coeffs))
    )
    assert abs(inner) < 1e-14 * max(u.l2_sq(), 1.0)


def test_mode_limit_is_projection(small_geometry):
    rng = np.random.default_rng(13)
    u = random_smooth_field(small_geometry, rng)
    nl = nonlinear_rhs(u, mode_limit=3)
    assert np.all(nl.coeffs[:, 3:] == 0.0)
    full = nonlinear_rhs(u)
    assert np.max(np.abs(nl.coeffs[:, :3] - full.coeffs[:, :3])) == 0.0


def test_full_rhs_composition(small_geometry):
    rng = np.random.default_rng(17)
    u = random_smooth_field(small_geometry, rng)
    rhs = full_rhs(u)
    lin = symbol_grid(small_geometry) * u.coeffs
    nl = nonlinear_rhs(u).coeffs
    scale = np.max(np.abs(rhs.coeffs))
    assert np.max(np.abs(rhs.coeffs - lin - nl)) < 1e-14 * scale
    assert np.max(np.abs(full_rhs(u, nonlinearity_on=False).coeffs - lin)) == 0.0
