"""Exception hierarchy.

Two broad branches matter to callers: ``ValidationError`` for bad
parameters or malformed configuration (CLI exit code 2) and
``DomainError`` for data that cannot support the requested computation
(CLI exit code 4). ``ParseError`` covers malformed input files (exit 3).
"""


class TailbreakError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(TailbreakError, ValueError):
    """Invalid parameters, specs or configuration."""


class InvalidSpec(ValidationError):
    """A simulation spec violates its invariants."""


class InvalidHermiteRegime(ValidationError):
    """The product of Hermite rank and LRD exponent is outside (0, 1)."""


class EmptyGrid(ValidationError):
    """An evaluation grid is empty."""


class IndexOutOfRange(ValidationError):
    """Order-statistic index outside 1..n."""


class DomainError(TailbreakError):
    """The data cannot support the requested computation."""


class TooShort(DomainError):
    """Series shorter than the operation requires."""


class NonPositivePrice(DomainError):
    """Log returns need strictly positive prices."""


class DegenerateSeries(DomainError):
    """Zero sample variance where variability is required."""


class NoExceedances(DomainError):
    """No observation exceeds the threshold; widen t or lower the threshold."""


class InsufficientPrefix(DomainError):
    """Prefix too short for the requested number of order statistics."""


class NonPositiveReference(DomainError):
    """Reference order statistic is not positive; tail estimate undefined."""


class NoAdmissibleK(DomainError):
    """No candidate break index admits a tail estimate."""


class EmbeddingNotPSD(DomainError):
    """Circulant embedding produced a genuinely negative eigenvalue."""

    def __init__(self, eigenvalue: float):
        self.eigenvalue = float(eigenvalue)
        super().__init__(
            f"circulant embedding eigenvalue {eigenvalue:.3e} below tolerance"
        )


class ParseError(TailbreakError):
    """Malformed input file; carries the offending line number."""

    def __init__(self, message: str, line_number: int | None = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
