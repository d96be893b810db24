from typing import Any, Callable

import functools
from dataclasses import dataclass

from .exceptions import SchottkyZetaError

"""
Value-check decorators for computed quantities.

Each decorator wraps a function (typically a property getter) and checks the value it
returns. A failed check raises `error` (a `SchottkyZetaError` subclass) with a
message naming the wrapped function, or clamps the value when `clamp=True`.

Usage:
1. Decorate a property getter, e.g. ``@is_greater_than(0.0, error=InvalidParametersError)``.
2. Reading the property raises as soon as the returned value violates the check.
"""


def is_positive(
    clamp: bool = False, error: type[SchottkyZetaError] = SchottkyZetaError
):
    """
    Creates a decorator to check if a returned value is positive.

    Args:
        clamp (bool): If True, the decorator will return 0 instead of raising an error. Defaults to False.
        error (type): Error class raised on violation.

    Returns:
        Callable: Decorator function.
    """

    def decorator(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            value = func(*args, **kwargs)
            if value <= 0:
                if clamp:
                    return 0
                raise error(f"{func.__name__} must be positive, got {value}")
            return value

        return wrapper

    return decorator


def is_within_range(
    min_value: float,
    max_value: float,
    clamp: bool = False,
    error: type[SchottkyZetaError] = SchottkyZetaError,
):
    """
    Creates a decorator to check if a returned value is within a given range.

    Args:
        min_value (float): Minimum value of the range.
        max_value (float): Maximum value of the range.
        clamp (bool): If True, the decorator will return the clamped value instead of raising an error. Defaults to False.
        error (type): Error class raised on violation.

    Returns:
        Callable: Decorator function.
    """

    def decorator(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            value = func(*args, **kwargs)
            if value < min_value or value > max_value:
                if clamp:
                    return min(max_value, max(min_value, value))
                raise error(
                    f"{func.__name__} must be within {min_value} and {max_value}, got {value}"
                )
            return value

        return wrapper

    return decorator


def is_greater_than(
    min_value: float,
    clamp: bool = False,
    error: type[SchottkyZetaError] = SchottkyZetaError,
):
    """
    Creates a decorator to check if a returned value is strictly greater than a given value.

    Args:
        min_value (float): Value to check against.
        clamp (bool): If True, the decorator will return min_value instead of raising an error. Defaults to False.
        error (type): Error class raised on violation.

    Returns:
        Callable: Decorator function.
    """

    def decorator(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            value = func(*args, **kwargs)
            if not value > min_value:
                if clamp:
                    return min_value
                raise error(
                    f"{func.__name__} must be greater than {min_value}, got {value}"
                )
            return value

        return wrapper

    return decorator


def custom_criteria(
    criteria: Callable[[Any], bool],
    description: str = "meet custom criteria",
    error: type[SchottkyZetaError] = SchottkyZetaError,
):
    """
    Creates a decorator to check if a returned value meets a custom criteria. The criteria
    is a function that takes the value as an argument and returns a boolean.

    Args:
        criteria (Callable): Custom criteria function.
        description (str): What the value has to do, completing "does not ...".
        error (type): Error class raised on violation.

    Returns:
        Callable: Decorator function.
    """

    def decorator(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            value = func(*args, **kwargs)
            if not criteria(value):
                raise error(f"{func.__name__} does not {description}, got {value}")
            return value

        return wrapper

    return decorator


@dataclass
class SafetyDecorators:
    """
    Dataclass that contains all safety decorators.
    """

    is_positive = is_positive
    is_within_range = is_within_range
    is_greater_than = is_greater_than
    custom_criteria = custom_criteria
