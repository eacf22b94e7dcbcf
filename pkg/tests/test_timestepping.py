import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kbstrip.errors import BlowUpError, ConfigurationError
from kbstrip.geometry import StripGeometry
from kbstrip.spectral import SpectralField, symbol_grid, zero_field
from kbstrip.timestepping import (
    SimConfig,
    _sponge_factor,
    integrate,
    phi_functions,
    step,
)

from conftest import gaussian_sine_field, random_smooth_field


def test_phi_values_at_one():
    e = np.e
    p1, p2, p3 = phi_functions(np.array([1.0]))
    assert p1[0] == pytest.approx(e - 1.0, rel=1e-14)
    assert p2[0] == pytest.approx(e - 2.0, rel=1e-14)
    assert p3[0] == pytest.approx(e - 2.5, rel=1e-14)


def test_phi_at_zero_series_limit():
    p1, p2, p3 = phi_functions(np.array([0.0]))
    assert p1[0] == pytest.approx(1.0, abs=1e-16)
    assert p2[0] == pytest.approx(0.5, abs=1e-16)
    assert p3[0] == pytest.approx(1.0 / 6.0, abs=1e-16)


@settings(max_examples=50, deadline=None)
@given(
    r=st.floats(min_value=0.3, max_value=0.7),
    theta=st.floats(min_value=0.0, max_value=2.0 * np.pi),
)
def test_phi_branches_agree_near_switch(r, theta):
    # the Taylor and quotient branches must agree across the switch radius
    z = np.array([r * np.exp(1j * theta)])
    a = phi_functions(z, taylor_radius=1.0)     # series branch
    b = phi_functions(z, taylor_radius=0.01)    # quotient branch
    for x, y in zip(a, b):
        assert abs(x[0] - y[0]) < 1e-11


def test_sim_config_validation():
    with pytest.raises(ConfigurationError):
        SimConfig(dt=0.0, T=1.0)
    with pytest.raises(ConfigurationError):
        SimConfig(dt=0.1, T=0.05)
    with pytest.raises(ConfigurationError):
        SimConfig(dt=0.1, T=1.0, sample_every=0)
    with pytest.raises(ConfigurationError):
        SimConfig(dt=0.1, T=1.0, integrator="euler")
    with pytest.raises(ConfigurationError):
        SimConfig(dt=0.1, T=1.0, sponge_gamma=-1.0)


def test_linear_step_matches_exact_symbol(small_geometry):
    rng = np.random.default_rng(21)
    u = random_smooth_field(small_geometry, rng)
    cfg = SimConfig(dt=1e-2, T=1e-2, nonlinearity_on=False)
    out = step(u, cfg)
    exact = u.coeffs * np.exp(cfg.dt * symbol_grid(small_geometry))
    assert np.max(np.abs(out.coeffs - exact)) < 1e-13 * np.max(np.abs(u.coeffs))
    assert out.time == pytest.approx(cfg.dt)


def test_sponge_zero_gamma_is_identity(small_geometry):
    rng = np.random.default_rng(23)
    u = random_smooth_field(small_geometry, rng)
    cfg0 = SimConfig(dt=1e-2, T=1e-2, sponge_gamma=0.0)
    cfg1 = SimConfig(dt=1e-2, T=1e-2)
    a = step(u, cfg0)
    b = step(u, cfg1)
    assert np.array_equal(a.coeffs, b.coeffs)


def test_sponge_profile_is_seam_centered(small_geometry):
    fac = _sponge_factor(small_geometry, 0.01, 100.0)[:, 0]
    # strongest absorption at the box edge, none at the center
    assert fac[0] == np.min(fac)
    assert fac[small_geometry.Nx // 2] == pytest.approx(1.0, abs=1e-12)
    assert np.all(fac > 0.0) and np.all(fac <= 1.0)


def test_integrate_samples_and_cum_ux(small_geometry):
    # single x-mode, linear: ||u_x||^2(t) = 2L k^2 (2 a^2) e^{-2 k^2 t}
    g = small_geometry
    n = 3
    k = np.pi * n / g.L
    lam = (np.pi / g.B) ** 2
    a = 0.4
    c = np.zeros((g.Nx, g.Ny), dtype=complex)
    c[n % g.Nx, 0] = a
    c[(-n) % g.Nx, 0] = a
    u0 = SpectralField(coeffs=c, geometry=g)
    cfg = SimConfig(dt=1e-3, T=0.5, sample_every=100, nonlinearity_on=False)
    led = integrate(u0, cfg)
    T = led.t[-1]
    rate = 2.0 * k**2
    exact = 2.0 * g.L * k**2 * 2.0 * a**2 * (1.0 - np.exp(-rate * T)) / rate
    assert led.cum_ux[-1] == pytest.approx(exact, rel=1e-9)
    assert led.n_samples() == 6  # t = 0 plus 5 sampled instants


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_blow_up_carries_partial_ledger(small_geometry):
    u0 = gaussian_sine_field(small_geometry, amplitude=1e6)
    cfg = SimConfig(dt=10.0, T=100.0, sample_every=1)
    with pytest.raises(BlowUpError) as exc:
        integrate(u0, cfg)
    assert exc.value.ledger is not None
    assert exc.value.ledger.failed
    assert exc.value.ledger.n_samples() >= 1


def test_imex_bdf2_converges_to_etdrk4(small_geometry):
    u0 = gaussian_sine_field(small_geometry, amplitude=0.1)

    def gap(dt):
        lead = {}
        for name in ("etdrk4", "imex-bdf2"):
            cfg = SimConfig(dt=dt, T=0.1, sample_every=10**9, integrator=name)
            led = integrate(u0, cfg, store_states_every=cfg.n_steps)
            lead[name] = led.states[-1].coeffs
        return np.max(np.abs(lead["etdrk4"] - lead["imex-bdf2"]))

    coarse, fine = gap(5e-4), gap(1e-4)
    assert fine < coarse / 3.0   # both discretize the same flow


def test_determinism_bitwise(small_geometry):
    u0 = gaussian_sine_field(small_geometry, amplitude=0.2)
    cfg = SimConfig(dt=1e-2, T=0.1, sample_every=2)
    a = integrate(u0, cfg)
    b = integrate(u0, cfg)
    assert a.array("l2_sq").tobytes() == b.array("l2_sq").tobytes()
    assert a.array("w_u").tobytes() == b.array("w_u").tobytes()
