"""Weighted norms, exact-identity residuals, and the inequality suite.

Every identity is evaluated instantaneously: time derivatives of weighted
quadratic functionals are replaced through the equation itself, e.g.
d/dt (e^{2bx}, v^2) -> 2 (e^{2bx} v, v_t) with v_t the matching derivative
of the spectral right side.  In exact arithmetic on the whole line each
residual vanishes; discretely it measures truncation plus box error.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CapabilityError, ConfigurationError, ParameterError, ShapeError
from .geometry import PhysicalField, StripGeometry, diag_field, diag_grid, synthesize
from .spectral import SpectralField, full_rhs

B_MAX = np.sqrt(0.6) / 2.0          # largest admissible weight rate
EPS_FLOOR = 1e-30                   # normalization floor for zero fields
BUFFER_CONTAMINATION = 1e-10        # flag level for e^{bx}|u| in the sponge zones

IDENTITY_IDS = ("E1-sharp", "E2", "E3", "E4", "ELEV")


@dataclass(frozen=True)
class WeightParams:
    """Exponential weight rate b of the measure e^{2bx} dx."""

    b: float

    def __post_init__(self):
        if not 0.0 < self.b <= B_MAX + 1e-15:
            raise ConfigurationError(
                f"b must satisfy 0 < b <= sqrt(0.6)/2 (so 6b - 40b^3 >= 0), got {self.b}"
            )


@dataclass
class NormSnapshot:
    t: float
    l2_sq: float
    cum_ux: float
    w_u: float
    w_ux: float
    w_uy: float
    w_uxx: float
    w_uxy: float
    w_uyy: float
    w_uxxx: float
    w_uxxy: float
    buffer_peak: float


@dataclass
class IdentityResidual:
    identity_id: str
    terms: dict
    residual: float
    scale: float

    def relative(self) -> float:
        return abs(self.residual) / max(self.scale, EPS_FLOOR)


@dataclass
class EnergyLedger:
    """Time series of norms, weighted functionals, and identity residuals."""

    geometry: StripGeometry
    b: WeightParams
    decay_reference: object = None    # optional DecayCertificate for env_ratio
    t: list = field(default_factory=list)
    l2_sq: list = field(default_factory=list)
    cum_ux: list = field(default_factory=list)
    w_u: list = field(default_factory=list)
    w_ux: list = field(default_factory=list)
    w_uy: list = field(default_factory=list)
    w_uxx: list = field(default_factory=list)
    w_uxy: list = field(default_factory=list)
    w_uyy: list = field(default_factory=list)
    w_uxxx: list = field(default_factory=list)
    w_uxxy: list = field(default_factory=list)
    res_E2: list = field(default_factory=list)
    res_E3: list = field(default_factory=list)
    res_E4: list = field(default_factory=list)
    res_ELEV: list = field(default_factory=list)
    env_ratio: list = field(default_factory=list)
    buffer_peak: list = field(default_factory=list)
    states: list = field(default_factory=list)
    failed: bool = False
    buffer_flagged: bool = False

    def record(self, u: SpectralField, cum: float, with_residuals: bool = False):
        snap = snapshot(u, self.b, cum_ux=cum)
        self.t.append(snap.t)
        self.l2_sq.append(snap.l2_sq)
        self.cum_ux.append(cum)
        for name in ("w_u", "w_ux", "w_uy", "w_uxx", "w_uxy", "w_uyy",
                     "w_uxxx", "w_uxxy"):
            getattr(self, name).append(getattr(snap, name))
        if with_residuals:
            for ident in ("E2", "E3", "E4", "ELEV"):
                res = identity_residual(u, self.b, ident)
                getattr(self, "res_" + ident).append(res.relative())
        else:
            for ident in ("E2", "E3", "E4", "ELEV"):
                getattr(self, "res_" + ident).append(float("nan"))
        if self.decay_reference is not None and self.w_u[0] > 0.0:
            chi = self.decay_reference.chi
            self.env_ratio.append(
                snap.w_u / (np.exp(-chi * snap.t) * self.w_u[0])
            )
        else:
            self.env_ratio.append(0.0)
        self.buffer_peak.append(snap.buffer_peak)
        global_peak = _weighted_sup(u, self.b)
        if snap.buffer_peak > BUFFER_CONTAMINATION * max(global_peak, EPS_FLOOR):
            self.buffer_flagged = True

    def array(self, name: str) -> np.ndarray:
        return np.asarray(getattr(self, name), dtype=float)

    def n_samples(self) -> int:
        return len(self.t)


# ---------------------------------------------------------------------------
# Quadrature primitives
# ---------------------------------------------------------------------------


def weighted_inner(f: PhysicalField, g: PhysicalField, b: WeightParams) -> float:
    """Quadrature of integral e^{2bx} f g dx dy over the box strip."""
    if not f.same_grid(g):
        raise ShapeError("fields sampled on different grids")
    wx = np.exp(2.0 * b.b * f.x) * f.x_weight
    return float(wx @ ((f.values * g.values) @ f.y_weights))


def _w_quad(x, wx_weight, wy, b, *sample_arrays):
    """Weighted integral of a pointwise product of diagnostic-grid samples."""
    prod = sample_arrays[0]
    for a in sample_arrays[1:]:
        prod = prod * a
    wx = np.exp(2.0 * b * x) * wx_weight
    return float(wx @ (prod @ wy))


class _Samples:
    """Lazily synthesized derivative samples on the diagnostic grid."""

    def __init__(self, u: SpectralField):
        self.u = u
        self.x, self.wx, self.y, self.wy = diag_grid(u.geometry)
        self._cache = {}

    def __call__(self, mx: int, my: int) -> np.ndarray:
        key = (mx, my)
        if key not in self._cache:
            self._cache[key] = synthesize(
                self.u, mx, my, x_factor=2, y_nodes=self.y
            )
        return self._cache[key]

    def wq(self, b: float, *arrays) -> float:
        return _w_quad(self.x, self.wx, self.wy, b, *arrays)


def _weighted_sup(u: SpectralField, b: WeightParams) -> float:
    """max e^{bx}|u| on the base grid (cheap global scale for flagging)."""
    g = u.geometry
    vals = synthesize(u, 0, 0)
    return float(np.max(np.exp(b.b * g.x_nodes())[:, None] * np.abs(vals)))


def buffer_peak(u: SpectralField, b: WeightParams) -> float:
    """max over the monitor zone (the high-weight x edge) of e^{bx}|u|.

    Every group velocity of the dispersion relation is negative, so on the
    whole line nothing ever reaches the right edge: content there can only
    be periodic wrap-around, which is exactly what corrupts the rightward
    growing weight e^{2bx}.  The low-weight left zone holds genuine outgoing
    radiation (present on the whole line too) and is the absorber's domain,
    so it is not part of the contamination monitor.
    """
    g = u.geometry
    vals = synthesize(u, 0, 0)
    nbuf = max(1, int(round(g.buffer_frac * g.Nx)))
    zone = vals[-nbuf:]
    xs = g.x_nodes()[-nbuf:]
    return float(np.max(np.exp(b.b * xs)[:, None] * np.abs(zone)))


# ---------------------------------------------------------------------------
# Snapshots
# ---------------------------------------------------------------------------


def snapshot(u: SpectralField, b: WeightParams, cum_ux: float = 0.0) -> NormSnapshot:
    """All weighted quadratic functionals of the current state."""
    s = _Samples(u)
    bb = b.b

    def w(mx, my):
        a = s(mx, my)
        return s.wq(bb, a, a)

    return NormSnapshot(
        t=u.time,
        l2_sq=u.l2_sq(),
        cum_ux=cum_ux,
        w_u=w(0, 0),
        w_ux=w(1, 0),
        w_uy=w(0, 1),
        w_uxx=w(2, 0),
        w_uxy=w(1, 1),
        w_uyy=w(0, 2),
        w_uxxx=w(3, 0),
        w_uxxy=w(2, 1),
        buffer_peak=buffer_peak(u, b),
    )


# ---------------------------------------------------------------------------
# Identity residuals
# ---------------------------------------------------------------------------


def identity_residual(
    u: SpectralField, b: WeightParams, identity_id: str, rhs_kwargs=None
) -> IdentityResidual:
    """Instantaneous residual of one continuum energy identity.

    ``identity_id`` is one of E1-sharp, E2, E3, E4, ELEV.  The breakdown of
    every summand is returned alongside the signed sum and the magnitude of
    the largest summand.
    """
    if identity_id not in IDENTITY_IDS:
        raise CapabilityError(f"unknown identity {identity_id!r}")
    bb = b.b
    s = _Samples(u)
    rhs = full_rhs(u, **(rhs_kwargs or {}))
    st = _Samples(rhs)   # derivatives of u_t

    c_visc = 2.0 + 6.0 * bb - 40.0 * bb**3
    c_low = 4.0 * bb**2 + 8.0 * bb**3 - 32.0 * bb**5

    if identity_id == "E1-sharp":
        terms = {
            "d/dt||u||^2": 2.0 * s.wq(0.0, s(0, 0), st(0, 0)),
            "2||u_x||^2": 2.0 * s.wq(0.0, s(1, 0), s(1, 0)),
        }
    elif identity_id == "E2":
        terms = {
            "d/dt(w,u^2)": 2.0 * s.wq(bb, s(0, 0), st(0, 0)),
            "visc(w,ux^2)": c_visc * s.wq(bb, s(1, 0), s(1, 0)),
            "2b(w,uy^2)": 2.0 * bb * s.wq(bb, s(0, 1), s(0, 1)),
            "10b(w,uxx^2)": 10.0 * bb * s.wq(bb, s(2, 0), s(2, 0)),
            "-4b/3(w,u^3)": -(4.0 * bb / 3.0) * s.wq(bb, s(0, 0), s(0, 0), s(0, 0)),
            "-low(w,u^2)": -c_low * s.wq(bb, s(0, 0), s(0, 0)),
        }
    elif identity_id == "E3":
        terms = {
            "d/dt(w,ux^2)": 2.0 * s.wq(bb, s(1, 0), st(1, 0)),
            "visc(w,uxx^2)": c_visc * s.wq(bb, s(2, 0), s(2, 0)),
            "2b(w,uxy^2)": 2.0 * bb * s.wq(bb, s(1, 1), s(1, 1)),
            "10b(w,uxxx^2)": 10.0 * bb * s.wq(bb, s(3, 0), s(3, 0)),
            "-low(w,ux^2)": -c_low * s.wq(bb, s(1, 0), s(1, 0)),
            "(w,ux^3)": s.wq(bb, s(1, 0), s(1, 0), s(1, 0)),
            "-2b(w,u*ux^2)": -2.0 * bb * s.wq(bb, s(0, 0), s(1, 0), s(1, 0)),
        }
    elif identity_id == "E4":
        terms = {
            "d/dt(w,uy^2)": 2.0 * s.wq(bb, s(0, 1), st(0, 1)),
            "visc(w,uxy^2)": c_visc * s.wq(bb, s(1, 1), s(1, 1)),
            "2b(w,uyy^2)": 2.0 * bb * s.wq(bb, s(0, 2), s(0, 2)),
            "10b(w,uxxy^2)": 10.0 * bb * s.wq(bb, s(2, 1), s(2, 1)),
            "-low(w,uy^2)": -c_low * s.wq(bb, s(0, 1), s(0, 1)),
            "(w,ux*uy^2)": s.wq(bb, s(1, 0), s(0, 1), s(0, 1)),
            "-2b(w,u*uy^2)": -2.0 * bb * s.wq(bb, s(0, 0), s(0, 1), s(0, 1)),
        }
    else:  # ELEV: the u_x, u_y, u_xx ledgers combined
        grad_sq = (
            s.wq(bb, s(1, 0), s(1, 0))
            + s.wq(bb, s(0, 1), s(0, 1))
            + s.wq(bb, s(2, 0), s(2, 0))
        )
        terms = {
            "d/dt(w,|grad u|^2+uxx^2)": 2.0
            * (
                s.wq(bb, s(1, 0), st(1, 0))
                + s.wq(bb, s(0, 1), st(0, 1))
                + s.wq(bb, s(2, 0), st(2, 0))
            ),
            "2(1+3b-20b^3)(w,|grad ux|^2+uxxx^2)": c_visc
            * (
                s.wq(bb, s(2, 0), s(2, 0))
                + s.wq(bb, s(1, 1), s(1, 1))
                + s.wq(bb, s(3, 0), s(3, 0))
            ),
            "2b(w,|grad uy|^2+uxxy^2)": 2.0 * bb
            * (
                s.wq(bb, s(1, 1), s(1, 1))
                + s.wq(bb, s(0, 2), s(0, 2))
                + s.wq(bb, s(2, 1), s(2, 1))
            ),
            "10b(w,|grad uxx|^2+ux4^2)": 10.0 * bb
            * (
                s.wq(bb, s(3, 0), s(3, 0))
                + s.wq(bb, s(2, 1), s(2, 1))
                + s.wq(bb, s(4, 0), s(4, 0))
            ),
            "-4b^2(1+2b-8b^3)(w,|grad u|^2+uxx^2)": -c_low * grad_sq,
            "(w,ux^3)": s.wq(bb, s(1, 0), s(1, 0), s(1, 0)),
            "(w,ux*uy^2)": s.wq(bb, s(1, 0), s(0, 1), s(0, 1)),
            "5(w,ux*uxx^2)": 5.0 * s.wq(bb, s(1, 0), s(2, 0), s(2, 0)),
            "-2b(w,u*(|grad u|^2+uxx^2))": -2.0 * bb
            * (
                s.wq(bb, s(0, 0), s(1, 0), s(1, 0))
                + s.wq(bb, s(0, 0), s(0, 1), s(0, 1))
                + s.wq(bb, s(0, 0), s(2, 0), s(2, 0))
            ),
        }

    if identity_id == "E1-sharp":
        residual = terms["d/dt||u||^2"] + terms["2||u_x||^2"]
    else:
        residual = sum(terms.values())
    scale = max(abs(v) for v in terms.values())
    return IdentityResidual(
        identity_id=identity_id, terms=terms, residual=residual, scale=scale
    )


def sharp_energy_check(ledger: EnergyLedger) -> float:
    """Max relative drift of ||u||^2(t) + 2 int ||u_x||^2 against ||u0||^2."""
    l2 = ledger.array("l2_sq")
    cum = ledger.array("cum_ux")
    if l2[0] == 0.0:
        return 0.0
    return float(np.max(np.abs(l2 + 2.0 * cum - l2[0])) / l2[0])


# ---------------------------------------------------------------------------
# Inequality suite
# ---------------------------------------------------------------------------


def _fine_sup_weighted(u: SpectralField, b: float, factor: int = 8) -> float:
    """sup over the strip of e^{bx}|u| on a ``factor``-times refined grid.

    Band-limited fields attain near-extrema between nodes, hence the
    zero-padded synthesis.
    """
    g = u.geometry
    xf = -g.L + (2.0 * g.L / (factor * g.Nx)) * np.arange(factor * g.Nx)
    yf = g.B * np.arange(factor * (g.Ny + 1) + 1) / (factor * (g.Ny + 1))
    vals = synthesize(u, 0, 0, x_factor=factor, y_nodes=yf)
    return float(np.max(np.exp(b * xf)[:, None] * np.abs(vals)))


def inequality_suite(u: SpectralField, b: WeightParams, probes) -> dict:
    """Steklov, L4-interpolation, and weighted-sup bounds, with margins.

    ``probes`` is a list of (delta, delta1) pairs for the sup bound; all
    entries must be positive.  Fields are understood as extended by zero
    outside the strip.
    """
    for d, d1 in probes:
        if not (d > 0 and d1 > 0):
            raise ParameterError(f"probe values must be positive, got {(d, d1)}")
    bb = b.b
    s = _Samples(u)
    g = u.geometry

    w_u = s.wq(bb, s(0, 0), s(0, 0))
    w_ux = s.wq(bb, s(1, 0), s(1, 0))
    w_uy = s.wq(bb, s(0, 1), s(0, 1))
    w_uxy = s.wq(bb, s(1, 1), s(1, 1))

    steklov_rhs = (g.B**2 / np.pi**2) * w_uy
    l4_sq = np.sqrt(s.wq(0.0, s(0, 0), s(0, 0), s(0, 0), s(0, 0)))
    l2 = np.sqrt(s.wq(0.0, s(0, 0), s(0, 0)))
    grad = np.sqrt(s.wq(0.0, s(1, 0), s(1, 0)) + s.wq(0.0, s(0, 1), s(0, 1)))
    l4_rhs = 2.0 * l2 * grad

    sup_sq = _fine_sup_weighted(u, bb) ** 2
    sup_checks = []
    for d, d1 in probes:
        rhs = (
            d * (1.0 + 2.0 * bb**2) * w_uy
            + 2.0 * d * w_uxy
            + (2.0 * d1 / d) * w_ux
            + (1.0 / d) * (1.0 / d1 + 2.0 * d1 * bb**2) * w_u
        )
        sup_checks.append(
            {"delta": d, "delta1": d1, "lhs": sup_sq, "rhs": rhs,
             "margin": rhs - sup_sq}
        )

    return {
        "steklov": {"lhs": w_u, "rhs": steklov_rhs, "margin": steklov_rhs - w_u},
        "l4_interpolation": {"lhs": l4_sq, "rhs": l4_rhs, "margin": l4_rhs - l4_sq},
        "weighted_sup": sup_checks,
    }


# ---------------------------------------------------------------------------
# Initial-data functional
# ---------------------------------------------------------------------------


def compute_J0(u0: SpectralField, b: WeightParams) -> float:
    """||u0||^2 + (e^{2bx}, u0^2 + |grad u0|^2 + |grad u0x|^2 + u0^2 u0x^2
    + |Lap u0x|^2 + |d^5_x u0|^2)."""
    s = _Samples(u0)
    bb = b.b
    lap_ux = s(3, 0) + s(1, 2)
    return (
        u0.l2_sq()
        + s.wq(bb, s(0, 0), s(0, 0))
        + s.wq(bb, s(1, 0), s(1, 0))
        + s.wq(bb, s(0, 1), s(0, 1))
        + s.wq(bb, s(2, 0), s(2, 0))
        + s.wq(bb, s(1, 1), s(1, 1))
        + s.wq(bb, s(0, 0), s(0, 0), s(1, 0), s(1, 0))
        + s.wq(bb, lap_ux, lap_ux)
        + s.wq(bb, s(5, 0), s(5, 0))
    )


# ---------------------------------------------------------------------------
# Weak-form identity
# ---------------------------------------------------------------------------


def weak_form_terms(u: SpectralField, v, b: WeightParams, t: float) -> float:
    """Integrand of the time integral in the weak-form identity at time t.

    ``v`` supplies closed-form derivative callables (x, y, t) -> array.
    Inner products are plain L2 over the box; the e^{bx} weight appears
    explicitly.
    """
    bb = b.b
    s = _Samples(u)
    X = s.x[:, None]
    Y = s.y[None, :]
    ebx = np.exp(bb * s.x)[:, None]
    quad = lambda arr: s.wx * float(np.sum(arr @ s.wy))
    uu = s(0, 0)
    term_vt = -quad(ebx * uu * v.dt(X, Y, t))
    term_nl = -0.5 * quad(
        ebx * uu * uu * (bb * v.value(X, Y, t) + v.dx(X, Y, t))
    )
    vx_combo = (
        v.dxxx(X, Y, t)
        + 3.0 * bb * v.dxx(X, Y, t)
        + (3.0 * bb**2 - 1.0) * v.dx(X, Y, t)
        + (bb**3 - bb - 1.0) * v.value(X, Y, t)
    )
    term_disp = quad(ebx * s(2, 0) * vx_combo)
    term_y = quad(ebx * s(0, 1) * (bb * v.dy(X, Y, t) + v.dxy(X, Y, t)))
    return term_vt + term_nl + term_disp + term_y


def _composite_quadrature(values: np.ndarray, times: np.ndarray) -> float:
    """Simpson on uniform odd-count samples, trapezoid otherwise."""
    n = times.size
    steps = np.diff(times)
    uniform = np.allclose(steps, steps[0], rtol=1e-10, atol=0.0)
    if n >= 3 and n % 2 == 1 and uniform:
        h = steps[0]
        return float(
            h / 3.0 * (values[0] + values[-1]
                       + 4.0 * np.sum(values[1:-1:2])
                       + 2.0 * np.sum(values[2:-1:2]))
        )
    return float(np.trapezoid(values, times))


def weak_form_residual(ledger: EnergyLedger, v, b: WeightParams) -> float:
    """|LHS - RHS| of the weak-form identity, normalized by the largest term.

    Time integrals use composite quadrature over the ledger's stored states
    (Simpson when the sampling supports it); the residual is dominated by
    the time-quadrature order.
    """
    from .errors import SamplingError

    states = ledger.states
    if len(states) < 3:
        raise SamplingError("need at least 3 stored states for time quadrature")
    times = np.array([st.time for st in states])
    integrand = np.array(
        [weak_form_terms(st, v, b, st.time) for st in states]
    )
    integral = _composite_quadrature(integrand, times)
    bb = b.b

    def boundary(u_state, t):
        s = _Samples(u_state)
        X, Y = s.x[:, None], s.y[None, :]
        ebx = np.exp(bb * s.x)[:, None]
        return float(s.wx * np.sum((ebx * s(0, 0) * v.value(X, Y, t)) @ s.wy))

    lhs_T = boundary(states[-1], times[-1])
    rhs_0 = boundary(states[0], times[0])
    residual = lhs_T + integral - rhs_0
    scale = max(abs(lhs_T), abs(rhs_0), abs(integral), EPS_FLOOR)
    return abs(residual) / scale
