"""Exception hierarchy. The CLI maps these onto exit codes."""


class NcpotError(Exception):
    """Base class for all library errors."""

    exit_code = 3

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics

    def to_dict(self):
        return {"error": type(self).__name__, "message": str(self), **self.diagnostics}


class InputError(NcpotError, ValueError):
    """Malformed or out-of-contract input."""

    exit_code = 2


class DomainError(InputError):
    """A point or disc lies outside the domain it must live in."""


class PreconditionError(InputError):
    """A required hypothesis fails for the supplied data."""


class DegeneracyError(NcpotError, ArithmeticError):
    """Numerical degeneracy: singular matrices, divergent limits."""


class NotStrictlyPositiveError(DegeneracyError):
    """Data is not uniformly positive definite on the circle."""


class ConvergenceError(DegeneracyError):
    """An iteration exhausted its budget without meeting tolerance."""


class ResolutionError(DegeneracyError):
    """Sampling too coarse to resolve a phase; refine and retry."""
