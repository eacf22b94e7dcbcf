"""Pseudo-spectral toolkit for the fifth-order dissipative-dispersive
channel-strip wave equation: simulation, exact energy identities, weighted
a-priori functionals, and exponential-decay certification."""

from .errors import (
    BlowUpError,
    BoundaryConditionError,
    CapabilityError,
    ConfigurationError,
    KbstripError,
    ParameterError,
    RepresentationError,
    SamplingError,
    ShapeError,
    ThresholdViolationError,
)
from .geometry import (
    EigenPair,
    PhysicalField,
    StripGeometry,
    base_grid_field,
    eigenpairs,
    to_physical,
    to_spectral,
)
from .spectral import (
    SpectralField,
    derivative,
    full_rhs,
    linear_symbol,
    nonlinear_rhs,
    zero_field,
)
from .energy import (
    EnergyLedger,
    WeightParams,
    identity_residual,
    inequality_suite,
    sharp_energy_check,
    weak_form_residual,
)
from .timestepping import SimConfig, integrate, phi_functions, step
from .decay import (
    DecayCertificate,
    continuous_dependence_experiment,
    decay_parameters,
    envelope_check,
    gradient_decay_check,
)
from .galerkin import (
    ConvergenceReport,
    convergence_study,
    manufactured_run,
    truncate_modes,
)
from .config import ExperimentSpec, build_initial, parse_config, serialize

__version__ = "0.1.0"
