"""Strip geometry, Dirichlet sine eigenbasis in y, Fourier representation in x.

The channel strip is truncated to the periodic box [-L, L) in x.  In y the
exact Dirichlet eigenbasis w_j(y) = sqrt(2/B) sin(j pi y / B) is used, with
the uniform interior collocation grid y_m = B m/(Ny+1); on that grid the
discrete sine transform is exactly orthonormal under the uniform-weight
inner product.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import BoundaryConditionError, ConfigurationError, RepresentationError


@dataclass(frozen=True)
class StripGeometry:
    """Channel width, x truncation box, and grid resolutions."""

    B: float
    L: float
    Nx: int
    Ny: int
    buffer_frac: float = 0.1

    def __post_init__(self):
        if not self.B > 0:
            raise ConfigurationError(f"B must be > 0, got {self.B}")
        if not self.L > 0:
            raise ConfigurationError(f"L must be > 0, got {self.L}")
        if self.Nx < 16 or self.Nx % 2 != 0:
            raise ConfigurationError(f"Nx must be even and >= 16, got {self.Nx}")
        if self.Ny < 4:
            raise ConfigurationError(f"Ny must be >= 4, got {self.Ny}")
        if not 0.0 < self.buffer_frac < 0.25:
            raise ConfigurationError(
                f"buffer_frac must lie in (0, 0.25), got {self.buffer_frac}"
            )

    # -- grids ------------------------------------------------------------

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.Nx

    @property
    def dy(self) -> float:
        return self.B / (self.Ny + 1)

    def x_nodes(self) -> np.ndarray:
        return -self.L + self.dx * np.arange(self.Nx)

    def y_nodes(self) -> np.ndarray:
        """Collocation grid including the endpoint rows y = 0 and y = B."""
        return self.B * np.arange(self.Ny + 2) / (self.Ny + 1)

    def wavenumbers(self) -> np.ndarray:
        """Fourier wavenumbers k = pi n / L in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.Nx, d=self.dx)

    def mode_numbers(self) -> np.ndarray:
        return np.rint(np.fft.fftfreq(self.Nx) * self.Nx).astype(int)

    def lambdas(self) -> np.ndarray:
        """Dirichlet eigenvalues lambda_j = (j pi / B)^2, j = 1..Ny."""
        j = np.arange(1, self.Ny + 1)
        return (j * np.pi / self.B) ** 2

    def dealias_mask(self) -> np.ndarray:
        """2/3-rule mask in the x wavenumber index (True = retained)."""
        return np.abs(self.mode_numbers()) < self.Nx / 3.0

    # -- bases ------------------------------------------------------------

    def sine_matrix(self, y: np.ndarray) -> np.ndarray:
        """W[m, j] = sqrt(2/B) sin(j pi y_m / B); exact zeros at y = 0, B."""
        j = np.arange(1, self.Ny + 1)
        W = np.sqrt(2.0 / self.B) * np.sin(np.outer(y, j) * (np.pi / self.B))
        W[np.isclose(y, 0.0) | np.isclose(y, self.B)] = 0.0
        return W

    def cosine_matrix(self, y: np.ndarray) -> np.ndarray:
        j = np.arange(1, self.Ny + 1)
        return np.sqrt(2.0 / self.B) * np.cos(np.outer(y, j) * (np.pi / self.B))


@dataclass(frozen=True)
class EigenPair:
    """One Dirichlet eigenpair of w_yy + lambda w = 0 on (0, B)."""

    j: int
    lambda_j: float
    norm_const: float


def eigenpairs(geometry: StripGeometry) -> list[EigenPair]:
    """Ordered L2(0,B)-orthonormal eigenpairs, j = 1..Ny."""
    nc = np.sqrt(2.0 / geometry.B)
    return [
        EigenPair(j=j, lambda_j=(j * np.pi / geometry.B) ** 2, norm_const=nc)
        for j in range(1, geometry.Ny + 1)
    ]


# ---------------------------------------------------------------------------
# Cached per-geometry machinery.  StripGeometry is frozen and hashable, so
# the transform matrices and quadrature rules are built once per geometry.
# ---------------------------------------------------------------------------


@lru_cache(maxsize=32)
def _basis(geometry: StripGeometry):
    y = geometry.y_nodes()
    W_full = geometry.sine_matrix(y)            # (Ny+2, Ny), endpoint rows zero
    W_int = W_full[1:-1]                        # (Ny, Ny)
    return W_full, W_int


@lru_cache(maxsize=32)
def _gauss_y(geometry: StripGeometry):
    """Gauss-Legendre rule on [0, B], sized for quartic sine/cosine products."""
    M = 8 * (geometry.Ny + 1)
    nodes, weights = np.polynomial.legendre.leggauss(M)
    y = 0.5 * geometry.B * (nodes + 1.0)
    w = 0.5 * geometry.B * weights
    return y, w


@dataclass(frozen=True)
class PhysicalField:
    """Real samples on a tensor grid, with its x nodes and y quadrature rule."""

    values: np.ndarray = field(repr=False)
    x: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)
    x_weight: float
    y_weights: np.ndarray = field(repr=False)
    geometry: StripGeometry
    time: float = 0.0

    def same_grid(self, other: "PhysicalField") -> bool:
        return (
            self.values.shape == other.values.shape
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.y, other.y)
        )


def base_grid_field(geometry: StripGeometry, values: np.ndarray, time=0.0) -> PhysicalField:
    """Wrap samples on the geometry's own tensor grid.

    The y rule is the trapezoid over the full grid; for Dirichlet-parity
    fields it coincides with the uniform interior rule under which the sine
    basis is exactly orthonormal.
    """
    y = geometry.y_nodes()
    wy = np.full(y.size, geometry.dy)
    wy[0] *= 0.5
    wy[-1] *= 0.5
    return PhysicalField(
        values=values,
        x=geometry.x_nodes(),
        y=y,
        x_weight=geometry.dx,
        y_weights=wy,
        geometry=geometry,
        time=time,
    )


def to_spectral(fld: PhysicalField, tol: float = 1e-10):
    """Forward transform: tensor samples -> coefficient tensor u_hat(k, j).

    Exact inverse of ``to_physical`` on band-limited data.
    """
    from .spectral import SpectralField

    g = fld.geometry
    u = fld.values
    if u.shape != (g.Nx, g.Ny + 2):
        raise BoundaryConditionError(
            f"expected samples of shape {(g.Nx, g.Ny + 2)}, got {u.shape}"
        )
    edge = max(np.max(np.abs(u[:, 0])), np.max(np.abs(u[:, -1])))
    scale = np.max(np.abs(u)) if u.size else 0.0
    if edge > tol * max(scale, 1.0):
        raise BoundaryConditionError(
            f"nonzero y-endpoint samples (max {edge:.3e}) violate the Dirichlet rows"
        )
    _, W_int = _basis(g)
    gj = (u[:, 1:-1] * g.dy) @ W_int           # (Nx, Ny) sine coefficients per x
    coeffs = np.fft.fft(gj, axis=0) / g.Nx
    return SpectralField(coeffs=coeffs, geometry=g, time=fld.time)


def to_physical(fld, tol: float = 1e-10) -> PhysicalField:
    """Inverse transform: coefficient tensor -> real samples on the tensor grid."""
    g = fld.geometry
    c = fld.coeffs
    herm = np.max(np.abs(c - np.conj(c[(-np.arange(g.Nx)) % g.Nx])))
    scale = np.max(np.abs(c)) if c.size else 0.0
    if herm > tol * max(scale, 1.0):
        raise RepresentationError(
            f"broken Hermitian symmetry in k (max deviation {herm:.3e})"
        )
    W_full, _ = _basis(g)
    gj = np.fft.ifft(c * g.Nx, axis=0)
    u = np.real(gj) @ W_full.T
    return base_grid_field(g, u, time=fld.time)


def synthesize(fld, mx: int, my: int, x_factor: int = 1, y_nodes=None) -> np.ndarray:
    """Samples of d^mx_x d^my_y u on an optionally refined tensor grid.

    x refinement is exact zero-padded Fourier synthesis by ``x_factor``;
    ``y_nodes`` defaults to the collocation grid.  Even my stays on the sine
    basis, odd my moves to the cosine basis, with factors (j pi / B)^my and
    the sign fixed by differentiation parity.
    """
    g = fld.geometry
    k = g.wavenumbers()
    j = np.arange(1, g.Ny + 1)
    a = j * np.pi / g.B
    c = fld.coeffs * (1j * k[:, None]) ** mx
    c = c * ((-1.0) ** (my // 2) * a**my)[None, :]
    if x_factor > 1:
        c = pad_x(c, g, x_factor)
    gj = np.real(np.fft.ifft(c * (g.Nx * x_factor), axis=0))
    if y_nodes is None:
        y_nodes = g.y_nodes()
    basis = g.sine_matrix(y_nodes) if my % 2 == 0 else g.cosine_matrix(y_nodes)
    return gj @ basis.T


def pad_x(coeffs: np.ndarray, geometry: StripGeometry, factor: int) -> np.ndarray:
    """Zero-pad the FFT-ordered k axis to ``factor * Nx`` modes."""
    Nx = geometry.Nx
    out = np.zeros((factor * Nx, coeffs.shape[1]), dtype=complex)
    half = Nx // 2
    out[:half] = coeffs[:half]
    out[-(half - 1):] = coeffs[-(half - 1):]
    # the unpaired n = -Nx/2 mode is split across +-Nx/2 to keep the field real
    out[-half] = 0.5 * coeffs[half]
    out[half] = 0.5 * np.conj(coeffs[half])
    return out


@lru_cache(maxsize=32)
def diag_grid(geometry: StripGeometry):
    """Diagnostic quadrature grid: 2x-padded x nodes, Gauss-Legendre y rule.

    Quartic products of dealias-clean fields are alias-free in x on the
    padded grid, and the y rule integrates them to machine precision.
    """
    Nx2 = 2 * geometry.Nx
    x = -geometry.L + (2.0 * geometry.L / Nx2) * np.arange(Nx2)
    y, wy = _gauss_y(geometry)
    return x, 2.0 * geometry.L / Nx2, y, wy


def diag_field(fld, mx: int, my: int) -> PhysicalField:
    """Derivative samples of a spectral field on the diagnostic grid."""
    g = fld.geometry
    x, wx, y, wy = diag_grid(g)
    vals = synthesize(fld, mx, my, x_factor=2, y_nodes=y)
    return PhysicalField(
        values=vals, x=x, y=y, x_weight=wx, y_weights=wy, geometry=g, time=fld.time
    )
