"""Exception hierarchy shared by the library and the CLI exit-code mapping."""


class QmemError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class InvalidInputError(QmemError, ValueError):
    """Malformed or out-of-range input (dimensions, parameters, files)."""

    exit_code = 2


class SolverError(QmemError, RuntimeError):
    """The SDP engine did not reach an optimal certificate."""

    exit_code = 3

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


class CapacityError(QmemError):
    """Problem exceeds the dense-matrix size limits of this package."""

    exit_code = 4


class ParseError(InvalidInputError):
    """Malformed input file; the message names the line or field."""
