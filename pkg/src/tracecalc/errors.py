"""Exception hierarchy shared by all tracecalc modules."""


class TracecalcError(Exception):
    """Base class for library errors."""


class InputError(TracecalcError, ValueError):
    """Malformed or non-finite input data."""


class ParameterError(TracecalcError, ValueError):
    """A numerical parameter violates a documented constraint."""


class DomainError(TracecalcError, ValueError):
    """A function is evaluated where it is undefined or not differentiable."""


class SingularityError(TracecalcError, ArithmeticError):
    """A resolvent was requested at (or numerically at) a point of the spectrum."""


class DegeneracyError(TracecalcError, ArithmeticError):
    """An eigenvalue sits too close to a spectral threshold."""

    def __init__(self, message, eigenvalue=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class AccuracyError(TracecalcError, ArithmeticError):
    """A quadrature or integrator failed to reach its target accuracy."""

    def __init__(self, message, previous=None, last=None):
        super().__init__(message)
        self.previous = previous
        self.last = last


class ResourceError(TracecalcError, MemoryError):
    """A requested discretization exceeds the configured size cap."""


class DivergenceError(TracecalcError, ArithmeticError):
    """A quantity that must be summable/integrable is not."""


class ResonanceError(TracecalcError, ArithmeticError):
    """The Jost Wronskian vanishes numerically."""


class StiffnessError(TracecalcError, ArithmeticError):
    """The ODE integrator could not advance."""


class GridResolutionError(TracecalcError, ArithmeticError):
    """A phase-unwinding step could not be resolved on the given grid."""


class ConfigError(TracecalcError, ValueError):
    """Invalid experiment configuration."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line
