"""Exception hierarchy for the kbstrip package."""


class KbstripError(Exception):
    """Base class for all package errors."""


class ConfigurationError(KbstripError):
    """Invalid geometry, weight, or run configuration; names the violated bound."""


class BoundaryConditionError(KbstripError):
    """Physical samples violate the homogeneous Dirichlet rows at y = 0, B."""


class RepresentationError(KbstripError):
    """Spectral coefficients break Hermitian symmetry beyond tolerance."""


class CapabilityError(KbstripError):
    """Requested derivative order or identity is outside the supported range."""


class ShapeError(KbstripError):
    """Fields on mismatched grids were combined."""


class ParameterError(KbstripError):
    """Out-of-range probe or truncation parameter."""


class ThresholdViolationError(KbstripError):
    """Initial data above the smallness threshold; the decay theorem does not apply."""


class SamplingError(KbstripError):
    """Stored trajectory too sparse for the requested quadrature."""


class BlowUpError(KbstripError):
    """Non-finite coefficient detected during time integration."""

    def __init__(self, t, ledger=None):
        super().__init__(f"non-finite coefficients at t = {t:g}")
        self.t = t
        self.ledger = ledger
