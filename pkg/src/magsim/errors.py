"""Exception and warning types shared across the package."""


class MagsimError(Exception):
    """Base class for all magsim errors."""


class DegenerateFrame(MagsimError):
    """A frame denominator (detuning, splitting) is too close to zero."""


class NonHermitian(MagsimError):
    """A matrix expected to be Hermitian is not, within tolerance."""


class InvalidAngle(MagsimError):
    """Pulse angle is not a finite number."""


class InvalidTiming(MagsimError):
    """Sequence timing is inconsistent (e.g. delay shorter than pulse)."""


class InvalidPlan(MagsimError):
    """Interpolation plan is malformed."""


class NoZeroFound(MagsimError):
    """No zero crossing found in the scanned frequency band."""


class NoPeak(MagsimError):
    """Spectrum has no significant non-DC peak."""


class FitDiverged(MagsimError):
    """Nonlinear fit failed to converge."""


class CsrNotConfigured(MagsimError):
    """Charge-state-readout parameters were not provided."""


class InconsistentMeasurements(MagsimError):
    """Vector reconstruction inputs violate the triangle inequality."""


class ParseError(MagsimError):
    """Config file could not be parsed; carries line info when known."""

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line


class ValidationError(MagsimError):
    """Config value failed validation; message names the field."""


class RegimeWarning(UserWarning):
    """Operating point is outside a validity regime (perturbative, RWA, ...)."""
