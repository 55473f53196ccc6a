"""Exception types shared across the package."""


class PreconditionError(ValueError):
    """An input violates a documented invariant of its type."""


class DomainError(ValueError):
    """A scalar argument lies outside the domain of a function."""


class StandardFormError(ValueError):
    """The covariance matrix cannot be brought to the symmetric standard form."""


class RegimeError(ValueError):
    """The bright-beam linearization does not hold for the given amplitudes."""


class NonConvergenceError(RuntimeError):
    """The basis optimizer failed to reach its residual tolerance."""

    def __init__(self, message, best_residual):
        super().__init__(f"{message} (best residual {best_residual:.3e})")
        self.best_residual = best_residual


class TraceFormatError(ValueError):
    """A homodyne trace file does not follow the CSV schema."""

    def __init__(self, message, line=None, column=None):
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)
        self.line = line
        self.column = column
