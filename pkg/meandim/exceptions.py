"""
Exception hierarchy for meandim.

Every error raised on purpose by the library derives from ``MeanDimError`` so
that the command line front end can turn it into a one-line message. Most
classes also derive from the matching builtin (``ValueError`` or
``ArithmeticError``) so callers that only know the builtins keep working.
"""


class MeanDimError(Exception):
    """Base class for all meandim errors."""


class DirectionFileError(MeanDimError, ValueError):
    """
    Raised when a direction-number file cannot be parsed.

    Attributes:
        line: 1-based line number of the offending record, or None when the
            problem is not tied to a single line (for example an empty file).
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DirectionTableTooSmall(MeanDimError, ValueError):
    """Raised when a dimension beyond the ingested direction table is requested."""

    def __init__(self, required: int, available: int):
        self.required = required
        self.available = available
        super().__init__(
            f"direction table supports {available} dimensions, {required} required"
        )


class DomainError(MeanDimError, ValueError):
    """Raised when an argument lies outside the domain of an operation."""


class DimensionError(MeanDimError, ValueError):
    """Raised on dimension mismatches and out-of-range coordinate indices."""


class ConvergenceError(MeanDimError, ArithmeticError):
    """
    Raised when an iterative inversion exhausts its iteration budget.

    Attributes:
        last_iterate: The final iterate (scalar or array) reached by the solver.
    """

    def __init__(self, message: str, last_iterate=None):
        self.last_iterate = last_iterate
        super().__init__(message)


class GridTooLargeError(MeanDimError, ValueError):
    """Raised when an exact enumeration would exceed the configured grid limit."""

    def __init__(self, size: int, limit: int):
        self.size = size
        self.limit = limit
        super().__init__(f"product grid has {size} points, limit is {limit}")


class DegenerateVarianceError(MeanDimError, ArithmeticError):
    """Raised when the total variance vanishes and the mean dimension is undefined."""


class MissingAssumptionError(MeanDimError, ValueError):
    """Raised when a bound needs assumption constants the summary does not carry."""


class BracketError(MeanDimError, ValueError):
    """
    Raised when a root bracket cannot be found.

    Attributes:
        nu_range: (smallest, largest) mean dimension reached during the scan.
    """

    def __init__(self, message: str, nu_range: tuple[float, float]):
        self.nu_range = nu_range
        super().__init__(f"{message} (achieved range {nu_range[0]:.6g}..{nu_range[1]:.6g})")


class ConfigError(MeanDimError):
    """Raised for invalid experiment configuration, from JSON or from flags."""
