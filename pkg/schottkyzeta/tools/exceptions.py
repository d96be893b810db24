from typing import Any, Optional

"""
Module Overview:

Error classes raised by the schottkyzeta library. Every error is a `ValueError`
so callers that only care about bad values can catch the builtin, while the CLI
maps each class to its own exit code.

Key Classes:

- `SchottkyZetaError`: Base class; carries `exit_code` and a `context` dict.
- One subclass per failure mode of the geometry, words, zeta, zeros and census
  modules.
"""


class SchottkyZetaError(ValueError):
    """
    Base class for all library errors.

    Args:
        message (str): Human readable description.
        **context: Structured details (offending indices, locations, amounts).
    """

    exit_code: int = 1
    label: str = "error"

    def __init__(self, message: str, **context: Any) -> None:
        super().__init__(message)
        self.context: dict[str, Any] = dict(context)

    def __repr__(self) -> str:
        return f"{type(self).__name__}[{self.label}]"


class InvalidParametersError(SchottkyZetaError):
    exit_code = 2
    label = "invalid-parameters"


class NotSchottkyError(SchottkyZetaError):
    """Raised when the isometric circles of the generators overlap."""

    exit_code = 3
    label = "not-schottky"

    def __init__(
        self,
        message: str,
        pair: Optional[tuple[int, int]] = None,
        overlap: float = 0.0,
        **context: Any,
    ) -> None:
        super().__init__(message, pair=pair, overlap=overlap, **context)
        self.pair = pair
        self.overlap = overlap


class NonHyperbolicError(SchottkyZetaError):
    exit_code = 4
    label = "non-hyperbolic"


class IndexOutOfRangeError(SchottkyZetaError):
    exit_code = 5
    label = "index-out-of-range"


class TooLargeError(SchottkyZetaError):
    exit_code = 6
    label = "too-large"


class AmbiguousClassError(SchottkyZetaError):
    exit_code = 7
    label = "ambiguous-class"


class CorruptGroupError(SchottkyZetaError):
    exit_code = 8
    label = "corrupt-group"


class OutsideConvergenceError(SchottkyZetaError):
    exit_code = 9
    label = "outside-convergence"


class OnPathZeroError(SchottkyZetaError):
    """Raised when a sample on an integration edge hits a zero of Z."""

    exit_code = 10
    label = "on-path-zero"

    def __init__(self, message: str, location: complex = 0j, **context: Any) -> None:
        super().__init__(message, location=location, **context)
        self.location = location


class BoundaryZeroError(SchottkyZetaError):
    exit_code = 11
    label = "boundary-zero"

    def __init__(self, message: str, location: complex = 0j, **context: Any) -> None:
        super().__init__(message, location=location, **context)
        self.location = location


class NoConvergenceError(SchottkyZetaError):
    exit_code = 12
    label = "no-convergence"


class IncompleteDataError(SchottkyZetaError):
    exit_code = 13
    label = "incomplete-data"


class InsufficientDataError(SchottkyZetaError):
    exit_code = 14
    label = "insufficient-data"


class ElementaryOrOutOfRangeError(SchottkyZetaError):
    exit_code = 15
    label = "elementary-or-out-of-range"


class FloorViolationError(SchottkyZetaError):
    exit_code = 16
    label = "floor-violation"


class CacheFormatError(SchottkyZetaError):
    exit_code = 17
    label = "cache-format"


ALL_ERRORS: tuple[type[SchottkyZetaError], ...] = (
    InvalidParametersError,
    NotSchottkyError,
    NonHyperbolicError,
    IndexOutOfRangeError,
    TooLargeError,
    AmbiguousClassError,
    CorruptGroupError,
    OutsideConvergenceError,
    OnPathZeroError,
    BoundaryZeroError,
    NoConvergenceError,
    IncompleteDataError,
    InsufficientDataError,
    ElementaryOrOutOfRangeError,
    FloorViolationError,
    CacheFormatError,
)
