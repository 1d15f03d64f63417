"""Exception types shared across the package."""


class DdlpError(Exception):
    """Base class for all package errors."""


class NumericalFailure(DdlpError):
    """An iterative numerical routine hit its iteration cap."""


class SingularMatrix(DdlpError):
    pass


class ShapeError(DdlpError, ValueError):
    pass


class OracleTooLarge(DdlpError):
    """Brute-force enumeration refused because the instance is too big."""


class ConvergenceFailure(DdlpError):
    """Polyhedral projection did not reach tolerance.

    ``best`` holds the last iterate and ``column`` the offending column
    index when raised from a column-wise projection.
    """

    def __init__(self, message, best=None, column=None):
        super().__init__(message)
        self.best = best
        self.column = column


class InfeasibleProblem(DdlpError):
    pass


class AnchorInfeasible(DdlpError):
    pass


class MissingCertificate(DdlpError):
    pass


class ParseError(DdlpError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigError(DdlpError, ValueError):
    pass


class BenchmarkAbort(DdlpError):
    """A full-dimensional solve on a test instance was not optimal."""

    def __init__(self, message, instance_id=None):
        super().__init__(message)
        self.instance_id = instance_id
