"""Exception types shared across the library."""


class CostapError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(CostapError, ValueError):
    """A configuration value breaks an invariant. Carries the field name."""

    def __init__(self, field: str, problem: str):
        self.field = field
        super().__init__(f"{field}: {problem}")


class ParseError(CostapError, ValueError):
    """A scenario or trace file could not be parsed."""


class NumericalError(CostapError):
    """Base class for runtime numerical failures (CLI exit code 3)."""


class NotHermitian(NumericalError):
    """Matrix asymmetry exceeds the Hermitian tolerance."""


class NotPSD(NumericalError):
    """An eigenvalue is below the negative PSD tolerance."""


class ZeroVector(NumericalError):
    """Vector norm is below the zero tolerance."""


class NoSignChange(NumericalError):
    """Root bracketing failed even after geometric expansion."""


class SingularCovariance(NumericalError):
    """Covariance solve failed; the matrix is not usable as PD."""


class ZeroSteering(NumericalError):
    """Effective steering vector (G s or G^H w) is numerically zero."""


class SingularHessian(NumericalError):
    """Zero-multiplier mode requested with a singular waveform Hessian."""


class Infeasible(NumericalError):
    """The Capon point already exceeds the power budget (r^2 < 0)."""


class NumericalFailure(NumericalError):
    """A solver produced a non-finite intermediate quantity."""


class ZeroWaveform(NumericalError):
    """Rescaling requested for a numerically zero waveform."""
