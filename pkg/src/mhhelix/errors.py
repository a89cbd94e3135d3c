"""Exception hierarchy shared across the package."""


class MHError(Exception):
    """Base class for package errors."""


class DomainError(MHError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class InputError(MHError, ValueError):
    """Data unusable for the requested operation (too few points, bad shape)."""


class DegenerateInputError(InputError):
    """Data that carries no information for the fit (coincident points, rank 0)."""


class ParseError(InputError):
    """Malformed record in an input file."""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{': '.join(where)}: {message}" if where else message)


class ConvergenceError(MHError, ArithmeticError):
    """A numerical procedure failed to reach its tolerance."""

    def __init__(self, message, diagnostics=None):
        self.diagnostics = dict(diagnostics or {})
        if self.diagnostics:
            detail = ", ".join(f"{k}={v!r}" for k, v in self.diagnostics.items())
            message = f"{message} ({detail})"
        super().__init__(message)


class BenchmarkError(MHError, RuntimeError):
    """An estimator failed on too many benchmark replicates."""


class InitializationError(MHError, RuntimeError):
    """An iterative estimator could not be started from its initial value."""
