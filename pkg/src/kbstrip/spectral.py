"""The PDE in the tensor spectral representation.

State is the coefficient tensor u_hat(k, j) of

    u(x, y) = sum_{k, j} u_hat(k, j) e^{i k x} w_j(y),

and the equation reads  u_hat_t = sigma(k, lambda_j) u_hat + N_hat(u),
with sigma = -k^2 + i (k^3 + lambda k + k^5) and N(u) = -1/2 (u^2)_x.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .errors import CapabilityError
from .geometry import (
    StripGeometry,
    _basis,
    _gauss_y,
    base_grid_field,
    diag_field,
    synthesize,
    to_physical,
    to_spectral,
)

MAX_DERIVATIVE_ORDER = 5


@dataclass(frozen=True)
class SpectralField:
    """Coefficient tensor on the Fourier x Dirichlet-sine tensor basis."""

    coeffs: np.ndarray = field(repr=False)
    geometry: StripGeometry
    time: float = 0.0

    def with_coeffs(self, coeffs, time=None) -> "SpectralField":
        return SpectralField(
            coeffs=coeffs,
            geometry=self.geometry,
            time=self.time if time is None else time,
        )

    def l2_sq(self) -> float:
        """Parseval: ||u||^2 over the box strip = 2L sum |u_hat|^2."""
        return 2.0 * self.geometry.L * float(np.sum(np.abs(self.coeffs) ** 2))

    def dx_l2_sq(self) -> float:
        k = self.geometry.wavenumbers()
        return 2.0 * self.geometry.L * float(
            np.sum(k[:, None] ** 2 * np.abs(self.coeffs) ** 2)
        )


def zero_field(geometry: StripGeometry, time=0.0) -> SpectralField:
    return SpectralField(
        coeffs=np.zeros((geometry.Nx, geometry.Ny), dtype=complex),
        geometry=geometry,
        time=time,
    )


def linear_symbol(k, lam):
    """sigma(k, lambda) = -k^2 + i (k^3 + lambda k + k^5)."""
    k = np.asarray(k, dtype=float)
    lam = np.asarray(lam, dtype=float)
    return -(k**2) + 1j * (k**3 + lam * k + k**5)


@lru_cache(maxsize=32)
def symbol_grid(geometry: StripGeometry) -> np.ndarray:
    k = geometry.wavenumbers()
    lam = geometry.lambdas()
    return linear_symbol(k[:, None], lam[None, :])


def derivative(u: SpectralField, mx: int, my: int):
    """Physical samples of d^mx_x d^my_y u on the base tensor grid."""
    if mx < 0 or my < 0 or mx + my > MAX_DERIVATIVE_ORDER:
        raise CapabilityError(
            f"derivative order ({mx}, {my}) outside supported range "
            f"mx + my <= {MAX_DERIVATIVE_ORDER}"
        )
    vals = synthesize(u, mx, my)
    return base_grid_field(u.geometry, vals, time=u.time)


@lru_cache(maxsize=32)
def _projection(geometry: StripGeometry):
    """Sine basis on the Gauss y grid and its quadrature-weighted adjoint.

    Projecting quadratic products through this rule is the exact L2 Galerkin
    projection (the products are trig polynomials well inside the rule's
    exactness range), so the nonlinear term carries no y aliasing.
    """
    y, wy = _gauss_y(geometry)
    S = geometry.sine_matrix(y)                 # (M, Ny)
    return S, S * wy[:, None]                   # synthesis, weighted analysis


def _product_coeffs(a: SpectralField, b: SpectralField) -> np.ndarray:
    """Spectral tensor of the pointwise product a*b (x-aliased above 2/3 band)."""
    g = a.geometry
    S, Sw = _projection(g)
    pa = np.real(np.fft.ifft(a.coeffs * g.Nx, axis=0)) @ S.T
    pb = pa if b is a else np.real(np.fft.ifft(b.coeffs * g.Nx, axis=0)) @ S.T
    prod = pa * pb
    return np.fft.fft(prod @ Sw, axis=0) / g.Nx


def nonlinear_rhs(
    u: SpectralField, form: str = "divergence", mode_limit: int | None = None
) -> SpectralField:
    """Spectral coefficients of -1/2 (u^2)_x, dealias-clean in k.

    ``form='convective'`` evaluates -u u_x instead; the divergence form is
    the default (exactly energy-neutral under the periodic truncation).
    ``mode_limit`` restricts the y projection to the first N sine modes,
    which is the truncated Galerkin system rather than mere data truncation.
    """
    g = u.geometry
    mask = g.dealias_mask()[:, None]
    if form == "divergence":
        sq = _product_coeffs(u, u)
        k = g.wavenumbers()[:, None]
        nl = -0.5j * k * sq
    elif form == "convective":
        ux = u.with_coeffs(u.coeffs * (1j * g.wavenumbers()[:, None]))
        nl = -_product_coeffs(u, ux)
    else:
        raise ValueError(f"unknown nonlinearity form {form!r}")
    nl = nl * mask
    if mode_limit is not None:
        keep = np.zeros(g.Ny)
        keep[:mode_limit] = 1.0
        nl = nl * keep[None, :]
    return u.with_coeffs(nl)


def full_rhs(
    u: SpectralField,
    nonlinearity_on: bool = True,
    form: str = "divergence",
    mode_limit: int | None = None,
    forcing=None,
) -> SpectralField:
    """Spectral image of u_t: sigma * u_hat + N_hat(u) (+ forcing)."""
    rhs = symbol_grid(u.geometry) * u.coeffs
    if nonlinearity_on:
        rhs = rhs + nonlinear_rhs(u, form=form, mode_limit=mode_limit).coeffs
    if forcing is not None:
        rhs = rhs + forcing(u.time)
    return u.with_coeffs(rhs)
