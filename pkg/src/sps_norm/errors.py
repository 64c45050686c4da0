"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input violates a documented precondition or type invariant."""


class ShapeError(ValidationError):
    """Operator or state shape does not match the declared space."""


class DimensionCapError(ValidationError):
    """Composite Hilbert dimension exceeds the configured cap."""


class TruncationError(RuntimeError):
    """Bosonic truncation too small for the requested correlator.

    Carries a suggested cap in ``suggested``.
    """

    def __init__(self, message: str, suggested: int | None = None):
        super().__init__(message)
        self.suggested = suggested


class DegenerateSteadyStateError(RuntimeError):
    """Steady-state solve failed or the kernel is not one-dimensional.

    ``residual`` holds the achieved infinity-norm residual, when known.
    """

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class UndefinedCorrelationError(RuntimeError):
    """Correlator normalization vanished. ``population`` reports the culprit."""

    def __init__(self, message: str, population: float | None = None):
        super().__init__(message)
        self.population = population


class NonConvergentSeriesError(RuntimeError):
    """Alternating correlator series diverges. ``partial_sums`` attached."""

    def __init__(self, message: str, partial_sums: list | None = None):
        super().__init__(message)
        self.partial_sums = partial_sums or []


class ParseError(ValueError):
    """Config text rejected; ``line`` is the 1-based offending line."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
