"""Exception hierarchy shared by the solver modules and the CLI."""


class ShockNozzleError(Exception):
    """Base class for every error raised by the package."""


class DomainError(ShockNozzleError, ValueError):
    """An input lies outside the admissible domain of an operation."""


class VacuumError(DomainError):
    """Bernoulli algebra produced a non-positive density radicand."""


class SonicDegeneracyError(ShockNozzleError):
    """The flow came too close to sonic for the 1D ODE to be integrated."""


class WindowError(DomainError):
    """The requested exit pressure admits no transonic shock in the nozzle."""

    def __init__(self, message, window=None):
        super().__init__(message)
        self.window = window


class MonotonicityError(ShockNozzleError):
    """The exit-pressure map is not decreasing in the shock position."""


class CoefficientDegeneracyError(ShockNozzleError):
    """A linearized coefficient violated its sign / positivity certificate."""


class CompatibilityError(DomainError):
    """Boundary data violate the wall compatibility conditions."""


class CharacteristicDegeneracyError(ShockNozzleError):
    """The transport characteristics became vertical (denominator too small)."""


class HatStateTooLargeError(ShockNozzleError):
    """The frozen perturbation is outside the range of the exact jump solve."""


class SolverError(ShockNozzleError):
    """A sparse linear solve failed or left a residual above tolerance."""


class DivergenceError(ShockNozzleError):
    """The fixed-point iteration did not converge."""

    def __init__(self, message, ratios=()):
        super().__init__(message)
        self.ratios = list(ratios)


class ConfigError(DomainError):
    """A configuration entry is missing or invalid."""


class TableParseError(ShockNozzleError):
    """A result table could not be parsed; carries the byte offset."""

    def __init__(self, message, path=None, offset=None):
        super().__init__(message)
        self.path = path
        self.offset = offset
