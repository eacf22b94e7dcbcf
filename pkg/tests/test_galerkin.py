import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kbstrip.errors import ParameterError
from kbstrip.galerkin import (
    convergence_study,
    decaying_gaussian_target,
    manufactured_run,
    traveling_pulse_target,
    truncate_modes,
)
from kbstrip.geometry import StripGeometry
from kbstrip.timestepping import SimConfig, integrate

from conftest import gaussian_sine_field, random_smooth_field


def test_truncate_validation(small_geometry):
    u = gaussian_sine_field(small_geometry, amplitude=0.1)
    with pytest.raises(ParameterError):
        truncate_modes(u, 0)
    with pytest.raises(ParameterError):
        truncate_modes(u, small_geometry.Ny + 1)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10**6),
       N=st.integers(min_value=1, max_value=8))
def test_truncation_is_projection(seed, N):
    g = StripGeometry(B=np.pi, L=10.0, Nx=64, Ny=8)
    u = random_smooth_field(g, np.random.default_rng(seed))
    v = truncate_modes(u, N)
    # idempotent, norm non-increasing, identity at N = Ny
    assert np.array_equal(truncate_modes(v, N).coeffs, v.coeffs)
    assert v.l2_sq() <= u.l2_sq() * (1.0 + 1e-15)
    assert np.all(v.coeffs[:, N:] == 0.0)
    assert np.array_equal(truncate_modes(u, g.Ny).coeffs, u.coeffs)


def test_convergence_study_validation(small_geometry):
    u = gaussian_sine_field(small_geometry, amplitude=0.1)
    cfg = SimConfig(dt=1e-2, T=0.05)
    with pytest.raises(ParameterError):
        convergence_study(u, cfg, [4, 2, 8])
    with pytest.raises(ParameterError):
        convergence_study(u, cfg, [2, 4, 16])


def test_convergence_errors_decrease(small_geometry):
    # data in modes 1 and 2 couples the whole ladder through the
    # nonlinearity; consecutive truncation differences must shrink
    g = small_geometry
    u = gaussian_sine_field(g, amplitude=0.4)
    extra = gaussian_sine_field(g, amplitude=0.2, y_mode=2)
    u = u.with_coeffs(u.coeffs + extra.coeffs)
    cfg = SimConfig(dt=5e-3, T=0.1)
    rep = convergence_study(u, cfg, [1, 2, 4, 8])
    assert len(rep.errors) == 3
    assert all(e >= 0.0 for e in rep.errors)
    assert rep.errors[-1] < rep.errors[0]
    # tail mass above the largest level vanishes by construction
    assert rep.tail_norms[-1] < 1e-14


def test_full_mode_count_matches_untruncated(small_geometry):
    # N = Ny applies the projection factor 1.0: bitwise identical evolution
    g = small_geometry
    u = gaussian_sine_field(g, amplitude=0.3)
    cfg = SimConfig(dt=5e-3, T=0.05)
    full = integrate(u, cfg, store_states_every=cfg.n_steps).states[-1]
    limited = integrate(u, cfg, mode_limit=g.Ny,
                        store_states_every=cfg.n_steps).states[-1]
    assert np.array_equal(full.coeffs, limited.coeffs)


def test_target_time_derivatives(small_geometry):
    g = small_geometry
    X = g.x_nodes()[:, None]
    Y = g.y_nodes()[None, :]
    h = 1e-6
    for target in (decaying_gaussian_target(g, j=2),
                   traveling_pulse_target(g, speed=0.7)):
        fd = (target.value(X, Y, 0.3 + h) - target.value(X, Y, 0.3 - h)) / (2 * h)
        assert np.max(np.abs(fd - target.dt(X, Y, 0.3))) < 1e-8
        # Dirichlet walls
        assert np.max(np.abs(target.value(X, Y, 0.3)[:, 0])) < 1e-14
        assert np.max(np.abs(target.value(X, Y, 0.3)[:, -1])) < 1e-14


def test_manufactured_linear_target_order_four():
    # linear-only run so the forcing balance is exact; ETDRK4 should show
    # clean fourth order on the smooth decaying target
    g = StripGeometry(B=np.pi, L=15.0, Nx=128, Ny=8)
    cfg = SimConfig(dt=4e-3, T=0.4, nonlinearity_on=False)
    out = manufactured_run(cfg, decaying_gaussian_target(g), g)
    assert out["clean"]
    assert out["order"] == pytest.approx(4.0, abs=0.4)


def test_manufactured_exactly_reproduced_target_is_clean(small_geometry):
    # the zero target makes every error identically zero: clean order 0
    from kbstrip.galerkin import ClosedFormTarget

    zero = ClosedFormTarget(
        value=lambda X, Y, t: np.zeros(np.broadcast(X, Y).shape),
        dt=lambda X, Y, t: np.zeros(np.broadcast(X, Y).shape),
    )
    cfg = SimConfig(dt=1e-2, T=0.05)
    out = manufactured_run(cfg, zero, small_geometry)
    assert out["clean"] and out["order"] == 0.0 and out["orders"] == []
