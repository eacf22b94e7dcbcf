"""Transverse-mode truncation harness.

The truncated system keeps the first N sine modes in y and projects the
nonlinearity back onto them at every evaluation, so each run solves the
coupled N-mode system rather than merely truncating the data.  A
manufactured-solution oracle measures the global temporal order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .geometry import StripGeometry, base_grid_field, to_spectral
from .spectral import SpectralField, full_rhs, symbol_grid
from .timestepping import SimConfig, integrate

ERROR_FLOOR = 1e-14


@dataclass
class ConvergenceReport:
    Ns: list
    errors: list          # terminal weighted-L2 differences between consecutive N
    rates: list           # log ratios of consecutive errors, above the floor only
    tail_norms: list      # terminal l2 mass above each N
    dt_orders: list = field(default_factory=list)


def truncate_modes(u0: SpectralField, N: int) -> SpectralField:
    """Projection onto the first N transverse sine modes."""
    if not 1 <= N <= u0.geometry.Ny:
        raise ParameterError(
            f"mode count must satisfy 1 <= N <= {u0.geometry.Ny}, got {N}"
        )
    coeffs = u0.coeffs.copy()
    coeffs[:, N:] = 0.0
    return u0.with_coeffs(coeffs)


def _terminal_state(u0: SpectralField, config: SimConfig, N: int) -> SpectralField:
    led = integrate(
        truncate_modes(u0, N),
        config,
        mode_limit=N,
        store_states_every=config.n_steps,
    )
    return led.states[-1]


def convergence_study(u0: SpectralField, config: SimConfig, Ns) -> ConvergenceReport:
    """Terminal differences between consecutive truncation levels.

    ``Ns`` must be increasing with max(Ns) <= Ny.  Differences are plain L2
    of the terminal states; ``tail_norms`` report the mass the largest run
    leaves above each level.
    """
    Ns = list(Ns)
    if Ns != sorted(Ns) or len(set(Ns)) != len(Ns):
        raise ParameterError(f"mode counts must be strictly increasing, got {Ns}")
    if Ns[-1] > u0.geometry.Ny:
        raise ParameterError(
            f"largest mode count {Ns[-1]} exceeds Ny = {u0.geometry.Ny}"
        )
    finals = [_terminal_state(u0, config, N) for N in Ns]
    errors = []
    for prev, nxt in zip(finals, finals[1:]):
        diff = nxt.with_coeffs(nxt.coeffs - prev.coeffs)
        errors.append(np.sqrt(diff.l2_sq()))
    rates = []
    for e0, e1 in zip(errors, errors[1:]):
        if e0 > ERROR_FLOOR and e1 > ERROR_FLOOR:
            rates.append(np.log(e0 / e1))
    full = finals[-1]
    L = u0.geometry.L
    tail_norms = [
        float(np.sqrt(2.0 * L * np.sum(np.abs(full.coeffs[:, N:]) ** 2)))
        for N in Ns
    ]
    return ConvergenceReport(Ns=Ns, errors=errors, rates=rates, tail_norms=tail_norms)


# ---------------------------------------------------------------------------
# Manufactured solutions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClosedFormTarget:
    """A closed-form space-time field with its exact time derivative.

    ``value`` and ``dt`` map (X, Y, t) to arrays; the target must vanish at
    y = 0, B and decay in x well inside the box.
    """

    value: object
    dt: object


def decaying_gaussian_target(geometry: StripGeometry, j: int = 1) -> ClosedFormTarget:
    """e^{-x^2} sin(j pi y / B) e^{-t}."""
    ky = j * np.pi / geometry.B

    def value(X, Y, t):
        return np.exp(-X**2) * np.sin(ky * Y) * np.exp(-t)

    return ClosedFormTarget(value=value, dt=lambda X, Y, t: -value(X, Y, t))


def traveling_pulse_target(geometry: StripGeometry, speed: float = 1.0) -> ClosedFormTarget:
    """e^{-(x - ct)^2} sin(pi y / B)."""
    ky = np.pi / geometry.B

    def value(X, Y, t):
        return np.exp(-((X - speed * t) ** 2)) * np.sin(ky * Y)

    def dt(X, Y, t):
        return 2.0 * speed * (X - speed * t) * value(X, Y, t)

    return ClosedFormTarget(value=value, dt=dt)


def _target_spectral(geometry: StripGeometry, target, t: float) -> SpectralField:
    X = geometry.x_nodes()[:, None]
    Y = geometry.y_nodes()[None, :]
    fld = base_grid_field(geometry, target.value(X, Y, t), time=t)
    return to_spectral(fld)


def _forcing_for(geometry: StripGeometry, target, config: SimConfig):
    """f_hat(t) = target_t - L(target) - N(target), all spectrally exact."""
    sigma = symbol_grid(geometry)
    X = geometry.x_nodes()[:, None]
    Y = geometry.y_nodes()[None, :]

    def forcing(t):
        u_t = to_spectral(base_grid_field(geometry, target.dt(X, Y, t), time=t))
        u = _target_spectral(geometry, target, t)
        rhs = full_rhs(
            u, nonlinearity_on=config.nonlinearity_on,
            form=config.nonlinearity_form,
        )
        return u_t.coeffs - rhs.coeffs

    return forcing


def manufactured_run(config: SimConfig, target, geometry: StripGeometry) -> dict:
    """Observed temporal order from a three-level Richardson sweep.

    Integrates from target(.,.,0) with the compensating forcing at dt, dt/2,
    dt/4 and compares terminal L2 errors against the closed form.  The two
    order estimates must agree to 0.5 or the configuration is rejected as
    transient-dominated.
    """
    import dataclasses

    errors = []
    dts = [config.dt, config.dt / 2.0, config.dt / 4.0]
    for dt in dts:
        cfg = dataclasses.replace(config, dt=dt, sample_every=10**9)
        forcing = _forcing_for(geometry, target, cfg)
        u0 = _target_spectral(geometry, target, 0.0)
        led = integrate(u0, cfg, forcing=forcing, store_states_every=cfg.n_steps)
        uT = led.states[-1]
        exact = _target_spectral(geometry, target, uT.time)
        diff = uT.with_coeffs(uT.coeffs - exact.coeffs)
        errors.append(np.sqrt(diff.l2_sq()))
    if all(e <= ERROR_FLOOR for e in errors):
        return {"dts": dts, "errors": errors, "orders": [], "order": 0.0,
                "clean": True}
    orders = [
        float(np.log2(e0 / e1)) for e0, e1 in zip(errors, errors[1:])
        if e0 > ERROR_FLOOR and e1 > ERROR_FLOOR
    ]
    clean = len(orders) == 2 and abs(orders[0] - orders[1]) <= 0.5
    if not clean:
        raise ParameterError(
            "order estimates disagree by more than 0.5 "
            f"({orders}); the configuration is transient- or floor-dominated"
        )
    return {
        "dts": dts,
        "errors": errors,
        "orders": orders,
        "order": orders[-1],
        "clean": clean,
    }
