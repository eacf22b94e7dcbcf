"""Line-oriented key = value experiment configuration.

Every parameter is scalar or a short tuple, so the format stays flat:
one ``key = value`` per line, ``#`` comments, unknown keys rejected, and
every failure reported with its line number.  Serialization uses 17
significant digits so doubles round-trip bit-exactly through text.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .geometry import StripGeometry, base_grid_field, to_spectral
from .energy import WeightParams
from .spectral import SpectralField, zero_field
from .timestepping import SimConfig

EXPERIMENTS = (
    "evolve",
    "decay_cert",
    "identity_suite",
    "convergence",
    "continuous_dependence",
    "manufactured",
)


@dataclass(frozen=True)
class GaussianSine:
    """amplitude * exp(-((x - x_center)/x_width)^2) * sin(y_mode pi y / B)."""

    amplitude: float = 0.3
    x_center: float = 0.0
    x_width: float = 1.0
    y_mode: int = 1


@dataclass(frozen=True)
class ModeSum:
    """Sum of single tensor modes; entries are (n, j, complex amplitude)
    with k = pi n / L and j the 1-based transverse mode."""

    entries: tuple = ()


@dataclass(frozen=True)
class FileIC:
    path: str = ""


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    geometry: StripGeometry
    weight: WeightParams
    sim: SimConfig
    initial_condition: object
    experiment: str
    output_dir: str
    ic_scale_to_norm: float | None = None   # rescale ||u0|| exactly to this
    scales: tuple = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)
    mode_counts: tuple = (4, 8, 16)
    with_residuals: bool = False
    store_states_every: int = 0
    decay_b_from_width: bool = False        # use b0(B) instead of the b key


_DEFAULTS = {
    "name": "default",
    "B": np.pi,
    "L": 30.0,
    "Nx": 256,
    "Ny": 16,
    "buffer_frac": 0.1,
    "b": 0.1,
    "dt": 1e-3,
    "T": 1.0,
    "sample_every": 1,
    "integrator": "etdrk4",
    "nonlinearity_on": True,
    "nonlinearity_form": "divergence",
    "sponge_gamma": 0.0,
    "ic": "gaussian_sine",
    "amplitude": 0.3,
    "x_center": 0.0,
    "x_width": 1.0,
    "y_mode": 1,
    "modes": "",
    "ic_file": "",
    "ic_scale_to_norm": "",
    "experiment": "evolve",
    "output_dir": "out",
    "scales": "1e-2,1e-3,1e-4,1e-5,1e-6",
    "mode_counts": "4,8,16",
    "with_residuals": False,
    "store_states_every": 0,
    "decay_b_from_width": False,
}

_FLOAT_KEYS = {"B", "L", "buffer_frac", "b", "dt", "T", "amplitude",
               "x_center", "x_width", "sponge_gamma"}
_INT_KEYS = {"Nx", "Ny", "sample_every", "y_mode", "store_states_every"}
_BOOL_KEYS = {"nonlinearity_on", "with_residuals", "decay_b_from_width"}


def _parse_bool(raw: str, line_no: int, key: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ConfigurationError(f"line {line_no}: {key} expects a boolean, got {raw!r}")


def _parse_value(key: str, raw: str, line_no: int):
    raw = raw.strip()
    try:
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _INT_KEYS:
            return int(raw)
    except ValueError:
        raise ConfigurationError(
            f"line {line_no}: {key} expects a number, got {raw!r}"
        ) from None
    if key in _BOOL_KEYS:
        return _parse_bool(raw, line_no, key)
    return raw


def _parse_modes(raw: str, line_no: int) -> tuple:
    """Semicolon-separated entries n,j,re,im."""
    entries = []
    if not raw.strip():
        return ()
    for part in raw.split(";"):
        bits = [p.strip() for p in part.split(",")]
        if len(bits) != 4:
            raise ConfigurationError(
                f"line {line_no}: mode entry {part!r} must be n,j,re,im"
            )
        try:
            n, j = int(bits[0]), int(bits[1])
            amp = complex(float(bits[2]), float(bits[3]))
        except ValueError:
            raise ConfigurationError(
                f"line {line_no}: bad numeric value in mode entry {part!r}"
            ) from None
        entries.append((n, j, amp))
    return tuple(entries)


def _parse_float_list(raw: str, line_no: int, key: str) -> tuple:
    try:
        return tuple(float(p) for p in raw.split(",") if p.strip())
    except ValueError:
        raise ConfigurationError(
            f"line {line_no}: {key} expects comma-separated numbers, got {raw!r}"
        ) from None


def parse_config(text: str) -> ExperimentSpec:
    """Parse and fully validate; every failure carries its line number."""
    values = dict(_DEFAULTS)
    lines_seen = {}
    for idx, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            col = len(line) - len(line.lstrip()) + 1
            raise ConfigurationError(
                f"line {idx}, column {col}: expected 'key = value', got {stripped!r}"
            )
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in _DEFAULTS:
            raise ConfigurationError(f"line {idx}: unknown key {key!r}")
        values[key] = _parse_value(key, raw, idx)
        lines_seen[key] = idx

    def where(key):
        return f"line {lines_seen[key]}: " if key in lines_seen else ""

    b = values["b"] if isinstance(values["b"], float) else float(values["b"])
    cap = 6.0 * b - 40.0 * b**3
    if cap < 0.0 or not b > 0.0:
        raise ConfigurationError(
            f"{where('b')}b must satisfy 6b - 40b^3 >= 0 and b > 0 "
            f"(got b = {b}, 6b - 40b^3 = {cap})"
        )
    try:
        geometry = StripGeometry(
            B=float(values["B"]), L=float(values["L"]),
            Nx=int(values["Nx"]), Ny=int(values["Ny"]),
            buffer_frac=float(values["buffer_frac"]),
        )
        weight = WeightParams(b=b)
        sim = SimConfig(
            dt=float(values["dt"]), T=float(values["T"]),
            sample_every=int(values["sample_every"]),
            integrator=str(values["integrator"]),
            nonlinearity_on=bool(values["nonlinearity_on"]),
            nonlinearity_form=str(values["nonlinearity_form"]),
            sponge_gamma=float(values["sponge_gamma"]),
        )
    except ConfigurationError as err:
        raise ConfigurationError(str(err)) from None

    ic_kind = str(values["ic"])
    if ic_kind == "gaussian_sine":
        amplitude = float(values["amplitude"])
        if not np.isfinite(amplitude):
            raise ConfigurationError(f"{where('amplitude')}amplitude must be finite")
        ic = GaussianSine(
            amplitude=amplitude,
            x_center=float(values["x_center"]),
            x_width=float(values["x_width"]),
            y_mode=int(values["y_mode"]),
        )
        if not 1 <= ic.y_mode <= geometry.Ny:
            raise ConfigurationError(
                f"{where('y_mode')}y_mode must lie in [1, Ny], got {ic.y_mode}"
            )
        if not ic.x_width > 0:
            raise ConfigurationError(f"{where('x_width')}x_width must be positive")
    elif ic_kind == "mode_sum":
        entries = _parse_modes(str(values["modes"]),
                               lines_seen.get("modes", 0))
        for n, j, _amp in entries:
            if not -geometry.Nx // 2 <= n < geometry.Nx // 2:
                raise ConfigurationError(
                    f"{where('modes')}x mode index {n} outside the grid band"
                )
            if not 1 <= j <= geometry.Ny:
                raise ConfigurationError(
                    f"{where('modes')}y mode {j} outside [1, Ny]"
                )
        ic = ModeSum(entries=entries)
    elif ic_kind == "file":
        path = str(values["ic_file"])
        if not path:
            raise ConfigurationError(f"{where('ic')}ic = file requires ic_file")
        if not os.path.exists(path):
            raise ConfigurationError(
                f"{where('ic_file')}initial-condition file {path!r} does not exist"
            )
        ic = FileIC(path=path)
    else:
        raise ConfigurationError(f"{where('ic')}unknown ic kind {ic_kind!r}")

    experiment = str(values["experiment"])
    if experiment not in EXPERIMENTS:
        raise ConfigurationError(
            f"{where('experiment')}unknown experiment {experiment!r}; "
            f"choose one of {', '.join(EXPERIMENTS)}"
        )

    raw_scale = str(values["ic_scale_to_norm"]).strip()
    scale_to = float(raw_scale) if raw_scale else None

    return ExperimentSpec(
        name=str(values["name"]),
        geometry=geometry,
        weight=weight,
        sim=sim,
        initial_condition=ic,
        experiment=experiment,
        output_dir=str(values["output_dir"]),
        ic_scale_to_norm=scale_to,
        scales=_parse_float_list(str(values["scales"]),
                                 lines_seen.get("scales", 0), "scales"),
        mode_counts=tuple(
            int(x) for x in _parse_float_list(
                str(values["mode_counts"]),
                lines_seen.get("mode_counts", 0), "mode_counts")
        ),
        with_residuals=bool(values["with_residuals"]),
        store_states_every=int(values["store_states_every"]),
        decay_b_from_width=bool(values["decay_b_from_width"]),
    )


def _fmt_float(x: float) -> str:
    return f"{x:.17g}"


def serialize(spec: ExperimentSpec) -> str:
    """Inverse of parse_config up to formatting: parse(serialize(s)) == s."""
    g, w, s = spec.geometry, spec.weight, spec.sim
    lines = [
        f"name = {spec.name}",
        f"B = {_fmt_float(g.B)}",
        f"L = {_fmt_float(g.L)}",
        f"Nx = {g.Nx}",
        f"Ny = {g.Ny}",
        f"buffer_frac = {_fmt_float(g.buffer_frac)}",
        f"b = {_fmt_float(w.b)}",
        f"dt = {_fmt_float(s.dt)}",
        f"T = {_fmt_float(s.T)}",
        f"sample_every = {s.sample_every}",
        f"integrator = {s.integrator}",
        f"nonlinearity_on = {'true' if s.nonlinearity_on else 'false'}",
        f"nonlinearity_form = {s.nonlinearity_form}",
        f"sponge_gamma = {_fmt_float(s.sponge_gamma)}",
    ]
    ic = spec.initial_condition
    if isinstance(ic, GaussianSine):
        lines += [
            "ic = gaussian_sine",
            f"amplitude = {_fmt_float(ic.amplitude)}",
            f"x_center = {_fmt_float(ic.x_center)}",
            f"x_width = {_fmt_float(ic.x_width)}",
            f"y_mode = {ic.y_mode}",
        ]
    elif isinstance(ic, ModeSum):
        entry = ";".join(
            f"{n},{j},{_fmt_float(a.real)},{_fmt_float(a.imag)}"
            for n, j, a in ic.entries
        )
        lines += ["ic = mode_sum", f"modes = {entry}"]
    else:
        lines += ["ic = file", f"ic_file = {ic.path}"]
    if spec.ic_scale_to_norm is not None:
        lines.append(f"ic_scale_to_norm = {_fmt_float(spec.ic_scale_to_norm)}")
    lines += [
        f"experiment = {spec.experiment}",
        f"output_dir = {spec.output_dir}",
        f"scales = {','.join(_fmt_float(x) for x in spec.scales)}",
        f"mode_counts = {','.join(str(int(x)) for x in spec.mode_counts)}",
        f"with_residuals = {'true' if spec.with_residuals else 'false'}",
        f"store_states_every = {spec.store_states_every}",
        f"decay_b_from_width = {'true' if spec.decay_b_from_width else 'false'}",
    ]
    return "\n".join(lines) + "\n"


def build_initial(spec: ExperimentSpec) -> SpectralField:
    """Materialize the configured initial condition as a spectral state."""
    g = spec.geometry
    ic = spec.initial_condition
    if isinstance(ic, GaussianSine):
        X = g.x_nodes()[:, None]
        Y = g.y_nodes()[None, :]
        vals = ic.amplitude * np.exp(
            -(((X - ic.x_center) / ic.x_width) ** 2)
        ) * np.sin(ic.y_mode * np.pi * Y / g.B)
        u0 = to_spectral(base_grid_field(g, vals))
    elif isinstance(ic, ModeSum):
        u0 = zero_field(g)
        coeffs = u0.coeffs.copy()
        for n, j, amp in ic.entries:
            coeffs[n % g.Nx, j - 1] += amp
            # keep the synthesized field real
            coeffs[(-n) % g.Nx, j - 1] += np.conj(amp)
        u0 = u0.with_coeffs(coeffs)
    else:
        data = np.load(ic.path)
        if data.shape != (g.Nx, g.Ny):
            raise ConfigurationError(
                f"initial-condition file shape {data.shape} does not match "
                f"grid ({g.Nx}, {g.Ny})"
            )
        u0 = SpectralField(coeffs=np.asarray(data, dtype=complex), geometry=g)
    if spec.ic_scale_to_norm is not None:
        norm = np.sqrt(u0.l2_sq())
        if norm == 0.0:
            raise ConfigurationError(
                "cannot rescale a zero initial condition to a nonzero norm"
            )
        u0 = u0.with_coeffs(u0.coeffs * (spec.ic_scale_to_norm / norm))
    return u0
